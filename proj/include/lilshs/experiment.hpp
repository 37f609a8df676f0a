#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lilshs/lilstat.hpp"
#include "lilshs/model.hpp"
#include "lilshs/sampler.hpp"

namespace lilshs {

/// One fully specified run: (config, seed) determines every output byte.
/// `scheme` is a builtin name, "exact", "brownian", or "table:<path>".
struct ExperimentConfig {
    std::string subcommand;

    std::string model_path;
    std::string scheme = "midpoint";
    double tau = 0.1;
    double horizon = 1e4;                 // time units
    std::optional<std::uint64_t> steps;   // step count; wins over horizon when set
    int paths = 64;
    std::uint64_t seed = 1;
    double m = 2.0;         // geometric checkpoint ratio
    std::string norm = "x"; // x | y | joint
    std::optional<double> eps;  // switches estimate-lil to the t^eps statistic
    bool allow_expansive = false;
    std::string checkpoints = "geometric:2.0";  // simulate: geometric:<m> | linear:<k>
    double h = 0.1;                             // classify / alpha-hat
    std::int64_t table_n = 100;                 // alpha-hat table length
    std::vector<double> tau_seq;                // check-order / preserve-sweep
    std::vector<int> m_seq;                     // preserve-sweep
    int threads = 0;                            // 0 = resolve from env/hardware

    std::string out;          // primary artifact (CSV or JSON per subcommand)
    std::string summary_out;  // optional JSON summary (estimate-lil)
};

/// Dispatches to the owning module and writes outputs atomically
/// (temp file + rename). Prints a one-line summary including the analytic
/// target when one is defined. Returns the process exit code.
int run_experiment(const ExperimentConfig& config, std::ostream& log);

/// Fixed 17-significant-digit formatting used for every numeric output so
/// reruns diff cleanly.
std::string format_g17(double v);

/// Writes content to path atomically (temp file in the same directory,
/// fsync-free rename).
void write_file_atomic(const std::string& path, const std::string& content);

// Exposed for tests: the individual runners return the artifact bytes they
// would write, keyed by output path.
struct Artifacts {
    std::vector<std::pair<std::string, std::string>> files;  // (path, content)
    std::string summary_line;
};
Artifacts run_estimate_lil(const ExperimentConfig& config);
Artifacts run_simulate(const ExperimentConfig& config);
Artifacts run_constants(const ExperimentConfig& config);
Artifacts run_classify(const ExperimentConfig& config);
Artifacts run_check_order(const ExperimentConfig& config);
Artifacts run_variance(const ExperimentConfig& config);
Artifacts run_preserve_sweep(const ExperimentConfig& config);
Artifacts run_alpha_hat_table(const ExperimentConfig& config);

}  // namespace lilshs

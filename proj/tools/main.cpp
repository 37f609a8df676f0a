// Command-line front end: every workflow is a subcommand over one config
// struct, so a (config, seed) pair reproduces its outputs byte for byte.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lilshs/experiment.hpp"

namespace {

void add_common(CLI::App* cmd, lilshs::ExperimentConfig& config) {
    cmd->add_option("--model", config.model_path, "Model JSON file");
    cmd->add_option("--scheme", config.scheme,
                    "Scheme name (euler_maruyama|backward_euler|midpoint), 'exact', 'brownian', "
                    "or table:<file>");
    cmd->add_flag_callback("--exact", [&config] { config.scheme = "exact"; },
                           "Shorthand for --scheme exact");
    cmd->add_option("--tau", config.tau, "Time step");
    cmd->add_option("--seed", config.seed, "RNG seed");
    cmd->add_option("--threads", config.threads,
                    "Worker threads (0 = hardware; env LIL_THREADS overrides)");
    cmd->add_option("--out", config.out, "Output file");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LIL constants and Monte Carlo estimators for linear stochastic Hamiltonian "
                 "systems"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "Print help");  // frees -h for the classify --h option
    app.set_config("--config", "", "Config file (INI/TOML; command-line flags win)");
    app.allow_config_extras(CLI::config_extras_mode::ignore_all);

    lilshs::ExperimentConfig config;

    auto* constants = app.add_subcommand("constants", "Per-mode xi constants and sup phi (CSV)");
    add_common(constants, config);

    auto* classify = app.add_subcommand("classify", "Scheme traits at a given h (JSON)");
    classify->set_help_flag("--help", "Print help");
    classify->add_option("--scheme", config.scheme, "Scheme name or table:<file>");
    classify->add_option("--h", config.h, "Rotation rate h = lambda * tau");
    classify->add_option("--out", config.out, "Optional JSON output file");

    auto* check_order = app.add_subcommand("check-order",
                                           "Convergence-order residuals over a tau sequence");
    add_common(check_order, config);
    check_order->add_option("--tau-seq", config.tau_seq, "Decreasing tau values")->delimiter(',');

    auto* simulate = app.add_subcommand("simulate", "Trajectory norms at checkpoints (CSV)");
    add_common(simulate, config);
    simulate->add_option("--steps", config.steps, "Step count (wins over --horizon)");
    simulate->add_option("--horizon", config.horizon, "Horizon in time units");
    simulate->add_option("--paths", config.paths, "Number of paths");
    simulate->add_option("--checkpoints", config.checkpoints, "geometric:<m> or linear:<k>");

    auto* estimate = app.add_subcommand("estimate-lil",
                                        "Running-sup ratio statistics on geometric checkpoints");
    add_common(estimate, config);
    estimate->add_option("--horizon", config.horizon, "Horizon in time units");
    estimate->add_option("--paths", config.paths, "Number of paths");
    estimate->add_option("--m", config.m, "Checkpoint ratio (t_p = m^p)");
    estimate->add_option("--norm", config.norm, "x | y | joint");
    estimate->add_option("--eps", config.eps,
                         "Use the t^eps growth statistic instead of sqrt(t log log t)");
    estimate->add_flag("--allow-expansive", config.allow_expansive,
                       "Force long-horizon runs for det A > 1 schemes");
    estimate->add_option("--summary", config.summary_out, "JSON summary file");

    auto* variance = app.add_subcommand("variance", "Sample-variance growth classification");
    add_common(variance, config);
    variance->add_option("--horizon", config.horizon, "Horizon in time units");
    variance->add_option("--paths", config.paths, "Number of paths");
    variance->add_option("--m", config.m, "Grid ratio");
    variance->add_option("--summary", config.summary_out, "JSON summary file");

    auto* sweep = app.add_subcommand("preserve-sweep",
                                     "Discrete LIL constants against the exact one over tau/M");
    add_common(sweep, config);
    sweep->add_option("--tau-seq", config.tau_seq, "Decreasing tau values")->delimiter(',');
    sweep->add_option("--m-seq", config.m_seq, "Increasing truncation dimensions")->delimiter(',');

    auto* alpha_hat = app.add_subcommand("alpha-hat", "Debug dump of the (n, alpha_hat_n) table");
    alpha_hat->set_help_flag("--help", "Print help");
    alpha_hat->add_option("--scheme", config.scheme, "Scheme name or table:<file>");
    alpha_hat->add_option("--h", config.h, "Rotation rate h");
    alpha_hat->add_option("--n", config.table_n, "Largest index in the table");
    alpha_hat->add_option("--out", config.out, "CSV output file");

    for (auto* cmd : app.get_subcommands({})) cmd->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    for (auto* cmd :
         {constants, classify, check_order, simulate, estimate, variance, sweep, alpha_hat})
        if (cmd->parsed()) config.subcommand = cmd->get_name();

    return lilshs::run_experiment(config, std::cout);
}

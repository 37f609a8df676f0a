#include "lilshs/experiment.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "lilshs/constants.hpp"
#include "lilshs/parallel.hpp"

namespace lilshs {

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

namespace {

struct EngineBox {
    Engine engine = Engine::exact();
    std::optional<SchemeDef> scheme;  // keeps the coefficient closure alive
    bool is_exact = false;
    bool is_brownian = false;
};

EngineBox make_engine(const ExperimentConfig& config, const ModelSpec& model) {
    EngineBox box;
    if (config.scheme == "exact") {
        box.engine = Engine::exact();
        box.is_exact = true;
    } else if (config.scheme == "brownian") {
        box.engine = Engine::brownian();
        box.is_brownian = true;
    } else if (config.scheme.rfind("table:", 0) == 0) {
        box.scheme = load_scheme_table(config.scheme.substr(6));
        box.engine = Engine::numeric(*box.scheme);
    } else {
        box.scheme = builtin(config.scheme, model.alpha1, model.alpha2);
        box.engine = Engine::numeric(*box.scheme);
    }
    return box;
}

ModelSpec require_model(const ExperimentConfig& config) {
    if (config.model_path.empty()) throw ConfigError(config.subcommand + ": --model is required");
    return load_model_json(config.model_path);
}

std::uint64_t steps_for(const ExperimentConfig& config) {
    if (!(config.tau > 0.0)) throw ConfigError("tau must be positive");
    if (config.steps) {
        if (*config.steps < 1) throw ConfigError("steps must be >= 1");
        return *config.steps;
    }
    if (!(config.horizon >= config.tau)) throw ConfigError("horizon must cover at least one step");
    return static_cast<std::uint64_t>(std::llround(config.horizon / config.tau));
}

std::vector<std::uint64_t> checkpoints_for(const ExperimentConfig& config,
                                           std::uint64_t n_steps) {
    const std::string& spec = config.checkpoints;
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "geometric")
        return geometric_checkpoints(arg.empty() ? config.m : std::stod(arg), config.tau, n_steps);
    if (kind == "linear")
        return linear_checkpoints(arg.empty() ? 100 : std::stoull(arg), n_steps);
    throw ConfigError("unknown checkpoint rule: " + spec + " (use geometric:<m> or linear:<k>)");
}

void gate_expansive(const EngineBox& box, const ExperimentConfig& config,
                    const ModelSpec& model) {
    if (!box.scheme) return;
    for (int k = 1; k <= model.num_modes; ++k) {
        const SchemeTraits traits = classify(*box.scheme, model.lambda[k - 1] * config.tau);
        if (!traits.admissible)
            throw InadmissibleError("scheme inadmissible at mode " + std::to_string(k));
        if (traits.det_class == DetClass::expansive && !config.allow_expansive)
            throw ExpansiveError(
                "expansive scheme (det A > 1): the scaled upper limit may not exist; pass "
                "--allow-expansive to force the run");
    }
}

double norm_of(const SystemFrame& frame, const std::string& norm) {
    if (norm == "x") return frame.norm_x;
    if (norm == "y") return frame.norm_y;
    if (norm == "joint") return frame.norm_joint;
    throw ConfigError("unknown norm: " + norm + " (use x|y|joint)");
}

double analytic_target(const ExperimentConfig& config, const EngineBox& box,
                       const ModelSpec& model) {
    if (config.eps) return 0.0;
    if (box.is_brownian) return std::sqrt(2.0);
    if (box.is_exact) return exact_lil_constant(model);
    bool symplectic = true;
    for (int k = 1; k <= model.num_modes; ++k)
        symplectic &= classify(*box.scheme, model.lambda[k - 1] * config.tau).symplectic;
    if (!symplectic) return std::numeric_limits<double>::quiet_NaN();
    const PhiForm form = phi_form(*box.scheme, model, config.tau);
    if (config.norm == "joint") return sup_phi(form).value;
    double best = 0.0;
    for (const auto& b : form.blocks) {
        const double xi = config.norm == "x" ? b.xi.xi1 : b.xi.xi2;
        best = std::max(best, std::sqrt(xi * b.eta));
    }
    return best;
}

std::string json_summary(std::initializer_list<std::pair<const char*, double>> fields) {
    std::ostringstream out;
    out << "{";
    bool first = true;
    for (const auto& [key, value] : fields) {
        if (!first) out << ", ";
        first = false;
        out << '"' << key << "\": ";
        if (std::isnan(value))
            out << "null";
        else
            out << format_g17(value);
    }
    out << "}\n";
    return out.str();
}

}  // namespace

Artifacts run_estimate_lil(const ExperimentConfig& config) {
    const bool model_free = config.scheme == "brownian";
    ModelSpec model;
    if (!model_free) model = require_model(config);
    const EngineBox box = make_engine(config, model);
    gate_expansive(box, config, model);

    const std::uint64_t n_steps = steps_for(config);
    const auto checkpoints = geometric_checkpoints(config.m, config.tau, n_steps);
    if (checkpoints.empty())
        throw ConfigError("estimate-lil: horizon too short for the checkpoint grid");
    const double target = analytic_target(config, box, model);
    const int threads = resolve_threads(config.threads);

    std::vector<RatioSeries> all(static_cast<std::size_t>(config.paths));
    parallel_for(config.paths, threads, [&](std::int64_t p) {
        const auto frames = evolve_system(box.engine, model, config.seed, std::uint32_t(p),
                                          config.tau, n_steps, checkpoints);
        std::vector<std::pair<double, double>> series;
        series.reserve(frames.size());
        for (const auto& f : frames) series.emplace_back(f.t, norm_of(f, config.norm));
        all[p] = config.eps ? eps_ratio_statistic(series, config.m, *config.eps)
                            : ratio_statistic(series, config.m, target);
    });

    std::ostringstream csv;
    csv << "path_id,n,t,ratio,running_sup\n";
    std::vector<double> finals, finals_pointwise;
    for (int p = 0; p < config.paths; ++p) {
        for (const RatioPoint& pt : all[p].points) {
            const auto n = static_cast<std::uint64_t>(std::llround(pt.t / config.tau));
            csv << p << ',' << n << ',' << format_g17(pt.t) << ',' << format_g17(pt.ratio)
                << ',' << format_g17(pt.running_sup) << '\n';
        }
        finals.push_back(all[p].final_running_sup());
        finals_pointwise.push_back(all[p].points.back().ratio);
    }

    const double med = median(finals);
    Artifacts artifacts;
    artifacts.files.emplace_back(config.out.empty() ? "estimate_lil.csv" : config.out, csv.str());
    const std::string summary = json_summary({{"median_final", med},
                                              {"q10", quantile(finals, 0.10)},
                                              {"q90", quantile(finals, 0.90)},
                                              {"median_final_pointwise", median(finals_pointwise)},
                                              {"analytic_target", target}});
    if (!config.summary_out.empty()) artifacts.files.emplace_back(config.summary_out, summary);

    std::ostringstream line;
    line << "estimate-lil " << config.scheme << " norm=" << config.norm << " paths="
         << config.paths << " T=" << format_g17(config.horizon) << ": median final ratio "
         << format_g17(med) << " (analytic target " << format_g17(target) << ")";
    artifacts.summary_line = line.str();
    return artifacts;
}

Artifacts run_simulate(const ExperimentConfig& config) {
    const ModelSpec model = require_model(config);
    const EngineBox box = make_engine(config, model);
    for (int k = 1; box.scheme && k <= model.num_modes; ++k)
        if (!classify(*box.scheme, model.lambda[k - 1] * config.tau).admissible)
            throw InadmissibleError("simulate: scheme inadmissible at mode " + std::to_string(k));

    const std::uint64_t n_steps = steps_for(config);
    const auto checkpoints = checkpoints_for(config, n_steps);
    const int threads = resolve_threads(config.threads);

    std::vector<std::vector<SystemFrame>> all(static_cast<std::size_t>(config.paths));
    parallel_for(config.paths, threads, [&](std::int64_t p) {
        all[p] = evolve_system(box.engine, model, config.seed, std::uint32_t(p), config.tau,
                               n_steps, checkpoints);
    });

    std::ostringstream csv;
    csv << "path_id,t,norm_x,norm_y,norm_joint\n";
    for (int p = 0; p < config.paths; ++p)
        for (const SystemFrame& f : all[p])
            csv << p << ',' << format_g17(f.t) << ',' << format_g17(f.norm_x) << ','
                << format_g17(f.norm_y) << ',' << format_g17(f.norm_joint) << '\n';

    Artifacts artifacts;
    artifacts.files.emplace_back(config.out.empty() ? "simulate.csv" : config.out, csv.str());
    std::ostringstream line;
    line << "simulate " << config.scheme << ": " << config.paths << " paths, "
         << checkpoints.size() << " checkpoints to t=" << format_g17(double(n_steps) * config.tau);
    artifacts.summary_line = line.str();
    return artifacts;
}

Artifacts run_constants(const ExperimentConfig& config) {
    const ModelSpec model = require_model(config);
    if (config.scheme == "exact" || config.scheme == "brownian")
        throw ConfigError("constants: requires a one-step scheme");
    const EngineBox box = make_engine(config, model);

    const PhiForm form = phi_form(*box.scheme, model, config.tau);
    const SupPhi sup = sup_phi(form);

    bool near_resonant = false;
    std::ostringstream csv;
    csv << "scheme,k,lambda,tau,h,theta,det,xi1,xi2,xi3,sup_phi_contrib\n";
    for (int k = 1; k <= model.num_modes; ++k) {
        const double h = model.lambda[k - 1] * config.tau;
        const ModeRotation rot = theta_of(*box.scheme, h);
        near_resonant |= rot.conditioning_warning;
        const auto& b = form.blocks[k - 1];
        // largest eigenvalue of the mode block, scaled by eta
        const double mean = 0.5 * (b.xi.xi1 + b.xi.xi2);
        const double rad = std::hypot(0.5 * (b.xi.xi1 - b.xi.xi2), 0.5 * b.xi.xi3);
        const double contrib = std::sqrt(std::max(0.0, (mean + rad) * b.eta));
        csv << box.scheme->name << ',' << k << ',' << format_g17(model.lambda[k - 1]) << ','
            << format_g17(config.tau) << ',' << format_g17(h) << ',' << format_g17(rot.theta)
            << ',' << format_g17(rot.det_a) << ',' << format_g17(b.xi.xi1) << ','
            << format_g17(b.xi.xi2) << ',' << format_g17(b.xi.xi3) << ','
            << format_g17(contrib) << '\n';
    }

    Artifacts artifacts;
    artifacts.files.emplace_back(config.out.empty() ? "constants.csv" : config.out, csv.str());
    std::ostringstream line;
    line << "constants " << box.scheme->name << " tau=" << format_g17(config.tau)
         << ": sup_phi=" << format_g17(sup.value) << " (exact constant "
         << format_g17(exact_lil_constant(model)) << ")";
    if (near_resonant)
        line << " [warning: sin(theta) < 1e-6 on some mode; xi values are ill-conditioned]";
    artifacts.summary_line = line.str();
    return artifacts;
}

Artifacts run_classify(const ExperimentConfig& config) {
    if (config.scheme == "exact" || config.scheme == "brownian")
        throw ConfigError("classify: requires a one-step scheme");
    SchemeDef scheme = config.scheme.rfind("table:", 0) == 0
                           ? load_scheme_table(config.scheme.substr(6))
                           : builtin(config.scheme, 0.0, 1.0);
    const SchemeTraits traits = classify(scheme, config.h);

    std::ostringstream out;
    out << "{\"scheme\": \"" << config.scheme << "\", \"h\": " << format_g17(config.h)
        << ", \"det\": " << format_g17(traits.det_a) << ", \"tr\": " << format_g17(traits.tr_a)
        << ", \"admissible\": " << (traits.admissible ? "true" : "false")
        << ", \"symplectic\": " << (traits.symplectic ? "true" : "false") << ", \"det_class\": \""
        << (traits.det_class == DetClass::unit
                ? "unit"
                : traits.det_class == DetClass::contractive ? "contractive" : "expansive")
        << "\"}\n";

    Artifacts artifacts;
    if (!config.out.empty()) artifacts.files.emplace_back(config.out, out.str());
    artifacts.summary_line = out.str();
    if (!artifacts.summary_line.empty() && artifacts.summary_line.back() == '\n')
        artifacts.summary_line.pop_back();
    return artifacts;
}

Artifacts run_check_order(const ExperimentConfig& config) {
    const ModelSpec model = require_model(config);
    if (config.scheme == "exact" || config.scheme == "brownian")
        throw ConfigError("check-order: requires a one-step scheme");
    const EngineBox box = make_engine(config, model);
    std::vector<double> taus = config.tau_seq;
    if (taus.empty())
        for (double tau = 0.1; taus.size() < 8; tau /= 2.0) taus.push_back(tau);
    const OrderReport report = check_convergence_order(*box.scheme, model, taus);

    std::ostringstream csv;
    csv << "tau,h,residual_a,residual_b\n";
    for (const OrderRow& row : report.rows)
        csv << format_g17(row.tau) << ',' << format_g17(row.h) << ','
            << format_g17(row.residual_a) << ',' << format_g17(row.residual_b) << '\n';

    Artifacts artifacts;
    artifacts.files.emplace_back(config.out.empty() ? "check_order.csv" : config.out, csv.str());
    std::ostringstream line;
    line << "check-order " << box.scheme->name << ": slope_a="
         << (report.exact_a ? "exact" : format_g17(report.slope_a))
         << " slope_b=" << (report.exact_b ? "exact" : format_g17(report.slope_b)) << " "
         << (report.pass() ? "PASS" : "FAIL");
    artifacts.summary_line = line.str();
    return artifacts;
}

Artifacts run_variance(const ExperimentConfig& config) {
    const ModelSpec model = require_model(config);
    const EngineBox box = make_engine(config, model);
    if (box.is_brownian) throw ConfigError("variance: use exact or a scheme engine");

    const std::uint64_t n_steps = steps_for(config);
    const auto grid = geometric_checkpoints(config.m, config.tau, n_steps);
    if (grid.size() < 4) throw ConfigError("variance: horizon too short for a growth fit");
    const int threads = resolve_threads(config.threads);
    const GrowthFit fit = variance_growth(box.engine, model, config.tau, grid, config.paths,
                                          config.seed, 1, threads);

    std::ostringstream csv;
    csv << "n,t,var\n";
    for (std::size_t i = 0; i < fit.var_curve.size(); ++i)
        csv << grid[i] << ',' << format_g17(fit.var_curve[i].first) << ','
            << format_g17(fit.var_curve[i].second) << '\n';

    const char* label = fit.classification == GrowthClass::linear_growth ? "linear_growth"
                        : fit.classification == GrowthClass::saturation  ? "saturation"
                        : fit.classification == GrowthClass::geometric_growth
                            ? "geometric_growth"
                            : "indeterminate";

    Artifacts artifacts;
    artifacts.files.emplace_back(config.out.empty() ? "variance.csv" : config.out, csv.str());
    if (!config.summary_out.empty()) {
        std::ostringstream js;
        js << "{\"classification\": \"" << label << "\", \"slope\": " << format_g17(fit.slope)
           << ", \"r2\": " << format_g17(fit.r2)
           << ", \"log_slope\": " << format_g17(fit.log_slope)
           << ", \"late_change\": " << format_g17(fit.late_change)
           << ", \"predicted_slope\": " << format_g17(fit.predicted_slope)
           << ", \"predicted_log_slope\": " << format_g17(fit.predicted_log_slope) << "}\n";
        artifacts.files.emplace_back(config.summary_out, js.str());
    }
    std::ostringstream line;
    line << "variance " << config.scheme << ": " << label << " slope=" << format_g17(fit.slope)
         << " predicted=" << format_g17(fit.predicted_slope);
    artifacts.summary_line = line.str();
    return artifacts;
}

Artifacts run_preserve_sweep(const ExperimentConfig& config) {
    const ModelSpec model = require_model(config);
    if (config.scheme == "exact" || config.scheme == "brownian")
        throw ConfigError("preserve-sweep: requires a one-step scheme");
    const EngineBox box = make_engine(config, model);
    std::vector<double> taus = config.tau_seq;
    if (taus.empty()) taus = {0.2, 0.1, 0.05, 0.025};
    std::vector<int> ms = config.m_seq;
    const PreservationReport report = preservation_limit(*box.scheme, model, taus, ms);

    std::ostringstream csv;
    csv << "tau,M,max_sqrt_xi1_eta,max_sqrt_xi2_eta,sup_phi,gap_x,gap_y,gap_joint\n";
    const auto emit = [&](const PreservationRow& row) {
        csv << format_g17(row.tau) << ',' << row.num_modes << ',' << format_g17(row.max_xi1_eta)
            << ',' << format_g17(row.max_xi2_eta) << ',' << format_g17(row.sup_phi_value) << ','
            << format_g17(row.gap_x) << ',' << format_g17(row.gap_y) << ','
            << format_g17(row.gap_joint) << '\n';
    };
    for (const auto& row : report.tau_rows) emit(row);
    for (const auto& row : report.m_rows) emit(row);

    Artifacts artifacts;
    artifacts.files.emplace_back(config.out.empty() ? "preserve_sweep.csv" : config.out,
                                 csv.str());
    std::ostringstream line;
    line << "preserve-sweep " << config.scheme << ": exact constant "
         << format_g17(report.exact_constant) << ", final gap_x "
         << format_g17(report.tau_rows.back().gap_x) << ", monotone "
         << (report.monotone_x && report.monotone_joint ? "yes" : "no");
    artifacts.summary_line = line.str();
    return artifacts;
}

Artifacts run_alpha_hat_table(const ExperimentConfig& config) {
    if (config.scheme == "exact" || config.scheme == "brownian")
        throw ConfigError("alpha-hat: requires a one-step scheme");
    SchemeDef scheme = config.scheme.rfind("table:", 0) == 0
                           ? load_scheme_table(config.scheme.substr(6))
                           : builtin(config.scheme, 0.0, 1.0);
    if (config.table_n < 0) throw ConfigError("alpha-hat: n must be >= 0");
    const ModeRotation rot = theta_of(scheme, config.h);

    std::ostringstream csv;
    csv << "n,alpha_hat\n";
    for (std::int64_t n = -1; n <= config.table_n; ++n)
        csv << n << ',' << format_g17(alpha_hat(rot, n)) << '\n';

    Artifacts artifacts;
    artifacts.files.emplace_back(config.out.empty() ? "alpha_hat.csv" : config.out, csv.str());
    std::ostringstream line;
    line << "alpha-hat " << scheme.name << " h=" << format_g17(config.h) << ": theta="
         << format_g17(rot.theta) << " det=" << format_g17(rot.det_a) << ", "
         << (config.table_n + 2) << " rows";
    artifacts.summary_line = line.str();
    return artifacts;
}

int run_experiment(const ExperimentConfig& config, std::ostream& log) {
    try {
        Artifacts artifacts;
        if (config.subcommand == "estimate-lil")
            artifacts = run_estimate_lil(config);
        else if (config.subcommand == "simulate")
            artifacts = run_simulate(config);
        else if (config.subcommand == "constants")
            artifacts = run_constants(config);
        else if (config.subcommand == "classify")
            artifacts = run_classify(config);
        else if (config.subcommand == "check-order")
            artifacts = run_check_order(config);
        else if (config.subcommand == "variance")
            artifacts = run_variance(config);
        else if (config.subcommand == "preserve-sweep")
            artifacts = run_preserve_sweep(config);
        else if (config.subcommand == "alpha-hat")
            artifacts = run_alpha_hat_table(config);
        else
            throw ConfigError("unknown subcommand: " + config.subcommand);

        for (const auto& [path, content] : artifacts.files) write_file_atomic(path, content);
        log << artifacts.summary_line << "\n";
        return 0;
    } catch (const ExpansiveError& e) {
        log << "error: " << e.what() << "\n";
        return 4;
    } catch (const InadmissibleError& e) {
        log << "error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace lilshs

#include "lilshs/lilstat.hpp"

#include <algorithm>
#include <cmath>

#include "lilshs/parallel.hpp"
#include "lilshs/rng.hpp"
#include "lilshs/rotation.hpp"

namespace lilshs {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit_line: need >= 2 points");
    const double n = double(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ConfigError("quantile of empty set");
    std::sort(values.begin(), values.end());
    const double pos = q * double(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double w = pos - double(lo);
    return values[lo] * (1.0 - w) + values[hi] * w;
}

namespace {

constexpr double kE = 2.718281828459045235;
const double kE2 = std::exp(2.0);

double lil_scaling(double t) { return std::sqrt(t * std::log(std::log(t))); }

/// Thins a (t, value) series to one point per integer power of m (the nearest
/// data point by log distance), dropping powers at or below e^2.
std::vector<std::pair<double, double>> grid_points(
    std::span<const std::pair<double, double>> series, double m) {
    if (!(m > 1.0)) throw ConfigError("ratio statistic requires m > 1");
    std::vector<std::pair<double, double>> kept;
    const double logm = std::log(m);
    long current_p = 0;
    bool have = false;
    double best_dist = 0.0;
    std::pair<double, double> best{};
    double prev_t = 0.0;
    for (const auto& pt : series) {
        if (!(pt.first > prev_t)) throw ConfigError("ratio statistic: times must be increasing");
        prev_t = pt.first;
        if (!(pt.first > kE)) continue;
        const double lp = std::log(pt.first) / logm;
        const long p = std::lround(lp);
        if (std::pow(m, double(p)) <= kE2) continue;
        const double dist = std::abs(lp - double(p));
        if (have && p == current_p) {
            if (dist < best_dist) {
                best_dist = dist;
                best = pt;
            }
        } else {
            if (have) kept.push_back(best);
            have = true;
            current_p = p;
            best_dist = dist;
            best = pt;
        }
    }
    if (have) kept.push_back(best);
    return kept;
}

RatioSeries build_series(std::span<const std::pair<double, double>> series, double m,
                         Scaling scaling, double eps, double target) {
    RatioSeries out;
    out.scaling = scaling;
    out.eps = eps;
    out.target = target;
    double sup = 0.0;
    for (const auto& [t, value] : grid_points(series, m)) {
        if (value < 0.0) throw ConfigError("ratio statistic: values must be non-negative");
        const double f = scaling == Scaling::sqrt_t_loglog_t ? lil_scaling(t) : std::pow(t, eps);
        const double ratio = value / f;
        sup = std::max(sup, ratio);
        out.points.push_back({t, value, ratio, sup});
    }
    if (out.points.empty())
        throw ConfigError("ratio statistic: no checkpoint beyond t = e (series too short)");
    return out;
}

}  // namespace

RatioSeries ratio_statistic(std::span<const std::pair<double, double>> series, double m,
                            double target) {
    return build_series(series, m, Scaling::sqrt_t_loglog_t, 0.0, target);
}

RatioSeries eps_ratio_statistic(std::span<const std::pair<double, double>> series, double m,
                                double eps) {
    if (!(eps > 0.0)) throw ConfigError("eps_ratio_statistic: eps must be positive");
    return build_series(series, m, Scaling::t_pow_eps, eps, 0.0);
}

GrowthFit variance_growth(const Engine& engine, const ModelSpec& model, double tau,
                          std::span<const std::uint64_t> n_grid, int paths,
                          std::uint64_t seed, int k, int threads,
                          const GrowthThresholds& thresholds) {
    if (paths < 1000) throw ConfigError("variance_growth: need at least 10^3 paths");
    if (n_grid.empty()) throw ConfigError("variance_growth: empty n grid");
    for (std::size_t i = 0; i + 1 < n_grid.size(); ++i)
        if (n_grid[i] >= n_grid[i + 1]) throw ConfigError("variance_growth: n grid must increase");

    const std::uint64_t n_steps = n_grid.back();
    const std::size_t cols = n_grid.size();
    std::vector<double> samples(static_cast<std::size_t>(paths) * cols);
    parallel_for(paths, threads, [&](std::int64_t p) {
        const auto states =
            engine.kind == Engine::Kind::exact
                ? evolve_exact(model, seed, std::uint32_t(p), k, tau, n_steps, n_grid)
                : evolve_numeric(*engine.scheme, model, seed, std::uint32_t(p), k, tau, n_steps,
                                 n_grid);
        for (std::size_t i = 0; i < cols; ++i)
            samples[static_cast<std::size_t>(p) * cols + i] = states[i].x;
    });

    GrowthFit fit;
    std::vector<double> ts, vars;
    for (std::size_t i = 0; i < cols; ++i) {
        double mean = 0.0;
        for (int p = 0; p < paths; ++p) mean += samples[static_cast<std::size_t>(p) * cols + i];
        mean /= paths;
        double ss = 0.0;
        for (int p = 0; p < paths; ++p) {
            const double d = samples[static_cast<std::size_t>(p) * cols + i] - mean;
            ss += d * d;
        }
        const double t = double(n_grid[i]) * tau;
        const double v = ss / double(paths - 1);
        ts.push_back(t);
        vars.push_back(v);
        fit.var_curve.emplace_back(t, v);
    }

    // Predictions from the engine.
    double det = 1.0;
    if (engine.kind == Engine::Kind::scheme) {
        const double h = model.lambda[k - 1] * tau;
        const SchemeCoeffs c = engine.scheme->coeffs(h);
        det = c.det();
        fit.predicted_slope = xi_constants(c, rotation_of(c, h)).xi1 * model.eta[k - 1] / 2.0;
        fit.predicted_log_slope = std::log(det);
    } else {
        fit.predicted_slope =
            model.eta[k - 1] * (model.alpha1 * model.alpha1 + model.alpha2 * model.alpha2) / 2.0;
        fit.predicted_log_slope = 0.0;
    }

    const LineFit linear = fit_line(ts, vars);
    fit.slope = linear.slope;
    fit.intercept = linear.intercept;
    fit.r2 = linear.r2;

    {  // late-window fit of log Var against step count
        std::vector<double> ns, lv;
        for (std::size_t i = cols / 2; i < cols; ++i) {
            if (vars[i] > 0.0) {
                ns.push_back(double(n_grid[i]));
                lv.push_back(std::log(vars[i]));
            }
        }
        fit.log_slope = ns.size() >= 2 ? fit_line(ns, lv).slope : 0.0;
    }

    {  // variance change over the trailing decade
        const double t_last = ts.back();
        std::size_t ref = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cols; ++i) {
            const double d = std::abs(std::log(ts[i]) - std::log(t_last / 10.0));
            if (d < best) {
                best = d;
                ref = i;
            }
        }
        fit.late_change = ts[ref] < t_last && vars[ref] > 0.0
                              ? std::abs(vars.back() - vars[ref]) / vars[ref]
                              : std::numeric_limits<double>::infinity();
    }

    if (fit.late_change < thresholds.saturation_change) {
        fit.classification = GrowthClass::saturation;
    } else if (fit.predicted_log_slope != 0.0 &&
               std::abs(fit.log_slope - fit.predicted_log_slope) <=
                   thresholds.log_slope_rel * std::abs(fit.predicted_log_slope)) {
        fit.classification = GrowthClass::geometric_growth;
    } else if (fit.r2 > thresholds.linear_r2 && fit.predicted_slope > 0.0 &&
               std::abs(fit.slope - fit.predicted_slope) <=
                   thresholds.slope_rel * fit.predicted_slope) {
        fit.classification = GrowthClass::linear_growth;
    } else {
        fit.classification = GrowthClass::indeterminate;
    }
    return fit;
}

bool QvCheck::pass(double z_max) const {
    for (double v : z)
        if (!(std::abs(v) < z_max)) return false;
    return true;
}

QvCheck qv_empirical_check(const SchemeDef& scheme, const ModelSpec& model, int k, double tau,
                           std::int64_t n, int paths, std::uint64_t seed, int threads) {
    if (n < 1) throw ConfigError("qv_empirical_check: n must be >= 1");
    if (paths < 2) throw ConfigError("qv_empirical_check: need >= 2 paths");
    const double h = model.lambda.at(k - 1) * tau;
    const double eta = model.eta.at(k - 1);
    const SchemeCoeffs c = scheme.coeffs(h);
    const ModeRotation rot = rotation_of(c, h);
    const double cx = c.a11 * c.b1 + c.a12 * c.b2;
    const double cy = c.a21 * c.b1 - c.a11 * c.b2;
    const double sq_eta = std::sqrt(eta);

    // Martingale coefficient streams (j-th increment weight), scaled by sqrt(eta).
    std::vector<std::array<double, 4>> coef(static_cast<std::size_t>(n));
    for (std::int64_t j = 0; j < n; ++j) {
        const double cj = std::cos(double(j) * rot.theta);
        const double sj = std::sin(double(j) * rot.theta);
        const double cj1 = std::cos(double(j + 1) * rot.theta);
        const double sj1 = std::sin(double(j + 1) * rot.theta);
        const double cjm1 = std::cos(double(j - 1) * rot.theta);
        const double sjm1 = std::sin(double(j - 1) * rot.theta);
        coef[j] = {sq_eta * (-c.b1 * cj1 + cx * cj) / rot.sin_theta,
                   sq_eta * (-c.b1 * sj1 + cx * sj) / rot.sin_theta,
                   sq_eta * (c.b2 * cjm1 + cy * cj) / rot.sin_theta,
                   sq_eta * (c.b2 * sjm1 + cy * sj) / rot.sin_theta};
    }

    std::vector<std::array<double, 4>> squares(static_cast<std::size_t>(paths));
    const double sq_tau = std::sqrt(tau);
    parallel_for(paths, threads, [&](std::int64_t p) {
        const NoiseStream stream(seed, std::uint32_t(p), static_cast<std::uint32_t>(k));
        std::array<double, 4> m{0.0, 0.0, 0.0, 0.0};
        for (std::int64_t j = 0; j < n; ++j) {
            const double db = sq_tau * stream.normal_first(std::uint64_t(j));
            for (int i = 0; i < 4; ++i) m[i] += coef[j][i] * db;
        }
        for (int i = 0; i < 4; ++i) squares[p][i] = m[i] * m[i];
    });

    const DiscreteQv qv = discrete_qv(scheme, h, eta, n, tau);
    QvCheck check;
    check.predicted = {qv.m1, qv.m2, qv.m3, qv.m4};
    for (int i = 0; i < 4; ++i) {
        double mean = 0.0;
        for (int p = 0; p < paths; ++p) mean += squares[p][i];
        check.sample_moment[i] = mean / paths;
        const double se = check.predicted[i] * std::sqrt(2.0 / double(paths));
        check.z[i] = se > 0.0 ? (check.sample_moment[i] - check.predicted[i]) / se : 0.0;
    }
    const double xi1 = xi_constants(c, rot).xi1;
    check.pair_identity_gap = std::abs(qv.m1 + qv.m2 - eta * xi1 * double(n) * tau);
    return check;
}

}  // namespace lilshs

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "lilshs/constants.hpp"
#include "lilshs/model.hpp"
#include "lilshs/sampler.hpp"
#include "lilshs/schemes.hpp"

namespace lilshs {

enum class Scaling { sqrt_t_loglog_t, t_pow_eps };

struct RatioPoint {
    double t = 0.0;
    double value = 0.0;        // input series value at this checkpoint
    double ratio = 0.0;        // value / f(t) at this checkpoint's own t
    double running_sup = 0.0;  // sup of ratio over checkpoints so far
};

/// Ratio diagnostics on a geometric checkpoint grid. `running_sup` is
/// non-decreasing by construction; the final entry is the empirical limsup
/// proxy. The whole series is kept so the slow (log log) convergence is
/// visible rather than hidden behind one number.
struct RatioSeries {
    std::vector<RatioPoint> points;
    Scaling scaling = Scaling::sqrt_t_loglog_t;
    double eps = 0.0;     // for t_pow_eps
    double target = std::numeric_limits<double>::quiet_NaN();  // analytic constant if any

    double final_running_sup() const { return points.empty() ? 0.0 : points.back().running_sup; }
};

/// Selects from `series` the points sitting on the geometric grid {m^p}
/// (nearest data point per integer power; finer series are thinned, series
/// generated on the grid pass through) and forms value / sqrt(t log log t).
/// Grid powers start above e^2 so the scaling is safely defined; throws when
/// no usable checkpoint remains.
RatioSeries ratio_statistic(std::span<const std::pair<double, double>> series, double m,
                            double target = std::numeric_limits<double>::quiet_NaN());

/// Same grid machinery with scaling t^eps (the growth statistic for
/// contractive schemes: the pointwise ratio must trend to zero).
RatioSeries eps_ratio_statistic(std::span<const std::pair<double, double>> series, double m,
                                double eps);

enum class GrowthClass { linear_growth, saturation, geometric_growth, indeterminate };

/// Sample-variance growth against the three asymptotic regimes:
///   linear_growth:    Var ~ (xi1 eta / 2) t            (symplectic)
///   saturation:       Var -> finite plateau            (contractive)
///   geometric_growth: Var ~ C det(A)^n                 (expansive)
struct GrowthFit {
    GrowthClass classification = GrowthClass::indeterminate;
    double slope = 0.0;        // linear fit of Var vs t
    double intercept = 0.0;
    double r2 = 0.0;
    double log_slope = 0.0;    // late-window fit of log Var vs n (per step)
    double late_change = 0.0;  // relative Var change over the last decade
    double predicted_slope = 0.0;      // xi1 eta / 2 (or continuous analogue)
    double predicted_log_slope = 0.0;  // log det(A)
    std::vector<std::pair<double, double>> var_curve;  // (t_n, sample Var)
};

/// Classifier thresholds: saturation when the late-decade change is < 5%,
/// linear growth when the linear fit has r^2 > 0.99 and slope within 15% of
/// the prediction, geometric growth when the late-window log-variance slope
/// is within 15% of log det(A).
struct GrowthThresholds {
    double saturation_change = 0.05;
    double linear_r2 = 0.99;
    double slope_rel = 0.15;
    double log_slope_rel = 0.15;
};

GrowthFit variance_growth(const Engine& engine, const ModelSpec& model, double tau,
                          std::span<const std::uint64_t> n_grid, int paths,
                          std::uint64_t seed, int k = 1, int threads = 1,
                          const GrowthThresholds& thresholds = {});

/// Monte Carlo second moments of the four discrete mode martingales (scaled
/// by sqrt(eta_k)) against the discrete_qv closed forms; z-scores use the
/// Gaussian estimator noise Var(M^2) = 2 (E M^2)^2.
struct QvCheck {
    std::array<double, 4> sample_moment{};
    std::array<double, 4> predicted{};
    std::array<double, 4> z{};
    double pair_identity_gap = 0.0;  // |m1 + m2 - eta xi1 t_n| (closed forms, exact pairing)
    bool pass(double z_max = 5.0) const;
};

QvCheck qv_empirical_check(const SchemeDef& scheme, const ModelSpec& model, int k, double tau,
                           std::int64_t n, int paths, std::uint64_t seed, int threads = 1);

// Small shared fitting helpers.
struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);
double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

}  // namespace lilshs

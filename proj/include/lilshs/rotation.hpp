#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "lilshs/errors.hpp"
#include "lilshs/model.hpp"
#include "lilshs/schemes.hpp"

namespace lilshs {

/// Every xi / quadratic-variation formula divides by sin^2(theta); the
/// admissibility condition guarantees sin(theta) > 0 but no lower bound.
inline constexpr double kConditioningWarn = 1e-6;
inline constexpr double kConditioningRefuse = 1e-12;

/// Rotation data of a one-step map at a given h: the angle theta in (0, pi)
/// with cos(theta) = tr A / (2 sqrt(det A)) and
/// sin(theta) = sqrt(4 det A - (tr A)^2) / (2 sqrt(det A)) > 0.
struct ModeRotation {
    double h = 0.0;
    double det_a = 0.0;
    double tr_a = 0.0;
    double sqrt_det = 0.0;
    double theta = 0.0;
    double sin_theta = 0.0;
    double cos_theta = 0.0;
    bool conditioning_warning = false;  // sin(theta) < kConditioningWarn
};

/// Throws InadmissibleError when 4 det - tr^2 <= 0, det <= 0, h <= 0, or
/// sin(theta) < kConditioningRefuse.
ModeRotation theta_of(const SchemeDef& scheme, double h);
ModeRotation rotation_of(const SchemeCoeffs& coeffs, double h);

/// Fundamental-solution coefficient
///   alpha_hat_n = det^{(n-1)/2} sin(n theta) / sin(theta),
/// defined for all integer n (alpha_hat_{-1} = -1/det), satisfying
///   alpha_hat_{n+1} = tr * alpha_hat_n - det * alpha_hat_{n-1},
/// alpha_hat_0 = 0, alpha_hat_1 = 1. Evaluated in closed form: for det != 1
/// the two-term recursion accumulates relative error over long horizons,
/// the closed form does not.
double alpha_hat(const ModeRotation& rot, std::int64_t n);

// Closed-form partial sums. The first two hold for any theta with
// sin(theta) != 0; the alpha_hat sums additionally assume det = 1.
double sum_sin2j(double theta, std::int64_t n);            // sum_{j=0}^{n-1} sin(2 j theta)
double sum_cos2j(double theta, std::int64_t n);            // sum_{j=0}^{n-1} cos(2 j theta)
double sum_alpha_hat_sq(double theta, std::int64_t n);     // sum_{j=0}^{n-2} alpha_hat_j^2
double sum_alpha_hat_cross(double theta, std::int64_t n);  // 2 sum_{j=1}^{n-1} alpha_hat_j alpha_hat_{j-1}

/// Closed-form coefficients of the n-step solution
///   X_n = x_det_part + sqrt(eta_k) sum_j x_coeff[j] dbeta_j,
///   Y_n = y_det_part + sqrt(eta_k) sum_j y_coeff[j] dbeta_j,
/// with
///   x_coeff[j] = -det * alpha_hat_{n-2-j} * b1 + (a11 b1 + a12 b2) * alpha_hat_{n-1-j}
///   y_coeff[j] = (a21 b1 - a11 b2) * alpha_hat_{n-1-j} + b2 * alpha_hat_{n-j}
/// The most recent increment always enters raw: x_coeff[n-1] = b1,
/// y_coeff[n-1] = b2.
struct CompactCoeffs {
    std::int64_t n = 0;
    double x_det_part = 0.0;
    double y_det_part = 0.0;
    std::vector<double> x_coeff;
    std::vector<double> y_coeff;
};

/// k is the 1-based mode index; requires admissibility at h = lambda_k tau.
CompactCoeffs compact_coeffs(const SchemeDef& scheme, const ModelSpec& model, int k,
                             double tau, std::int64_t n);

std::pair<double, double> compact_reconstruct(const CompactCoeffs& coeffs, double sqrt_eta,
                                              std::span<const double> increments);

/// Streaming reconstruction for large n: coefficients are produced blockwise
/// (never all materialised) and increments are consumed in order through the
/// supplied callable.
std::pair<double, double> compact_reconstruct_streamed(
    const SchemeDef& scheme, const ModelSpec& model, int k, double tau, std::int64_t n,
    const std::function<double(std::int64_t)>& increment);

/// Brute-force oracle: applies the raw one-step recursion.
std::pair<double, double> iterate_reference(const SchemeDef& scheme, const ModelSpec& model,
                                            int k, double tau,
                                            std::span<const double> increments);

namespace detail {

/// Extended-precision core shared by the closed-form and iteration routes.
/// States of expansive maps grow like det^{n/2} and leave double range near
/// n ~ 10^4 (e.g. det = 1.25); long double carries the comparison there.
template <class Real>
struct RotationT {
    Real det, tr, sqrt_det, theta, sin_theta;
};

template <class Real>
RotationT<Real> make_rotation(Real a11, Real a12, Real a21, Real a22) {
    const Real det = a11 * a22 - a12 * a21;
    const Real tr = a11 + a22;
    const Real disc = Real(4) * det - tr * tr;
    if (!(det > Real(0)) || !(disc > Real(0)))
        throw InadmissibleError("rotation requires 4 det A - (tr A)^2 > 0 and det A > 0");
    RotationT<Real> r;
    r.det = det;
    r.tr = tr;
    r.sqrt_det = std::sqrt(det);
    r.theta = std::atan2(std::sqrt(disc), tr);
    r.sin_theta = std::sqrt(disc) / (Real(2) * r.sqrt_det);
    return r;
}

template <class Real>
Real alpha_hat_t(const RotationT<Real>& r, std::int64_t n) {
    const Real power = std::pow(r.sqrt_det, Real(n - 1));
    return power * std::sin(Real(n) * r.theta) / std::sin(r.theta);
}

template <class Real>
std::pair<Real, Real> compact_pair(const RotationT<Real>& r, Real a11, Real a12, Real a21,
                                   Real b1, Real b2, Real x0, Real y0, Real sqrt_eta,
                                   std::int64_t n, std::span<const double> increments) {
    const Real cx = a11 * b1 + a12 * b2;
    const Real cy = a21 * b1 - a11 * b2;
    Real x = -r.det * alpha_hat_t(r, n - 1) * x0 + alpha_hat_t(r, n) * (a11 * x0 + a12 * y0);
    Real y = a21 * alpha_hat_t(r, n) * x0 + alpha_hat_t(r, n + 1) * y0 -
             a11 * alpha_hat_t(r, n) * y0;
    for (std::int64_t j = 0; j < n; ++j) {
        const Real db(increments[static_cast<std::size_t>(j)]);
        x += sqrt_eta * (-r.det * alpha_hat_t(r, n - 2 - j) * b1 + cx * alpha_hat_t(r, n - 1 - j)) * db;
        y += sqrt_eta * (cy * alpha_hat_t(r, n - 1 - j) + b2 * alpha_hat_t(r, n - j)) * db;
    }
    return {x, y};
}

template <class Real>
std::pair<Real, Real> iterate_pair(Real a11, Real a12, Real a21, Real a22, Real b1, Real b2,
                                   Real x0, Real y0, Real sqrt_eta,
                                   std::span<const double> increments) {
    Real x = x0, y = y0;
    for (double inc : increments) {
        const Real db(inc);
        const Real xn = a11 * x + a12 * y + sqrt_eta * b1 * db;
        const Real yn = a21 * x + a22 * y + sqrt_eta * b2 * db;
        x = xn;
        y = yn;
    }
    return {x, y};
}

}  // namespace detail

}  // namespace lilshs

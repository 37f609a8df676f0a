#include "lilshs/rotation.hpp"

#include <cmath>

namespace lilshs {

ModeRotation rotation_of(const SchemeCoeffs& coeffs, double h) {
    const double det = coeffs.det();
    const double tr = coeffs.tr();
    if (!(det > 0.0))
        throw InadmissibleError("rotation: det A must be positive (got " + std::to_string(det) + ")");
    const double disc = 4.0 * det - tr * tr;
    if (!(disc > 0.0))
        throw InadmissibleError("rotation: 4 det A - (tr A)^2 > 0 required (got " +
                                std::to_string(disc) + " at h = " + std::to_string(h) + ")");
    ModeRotation rot;
    rot.h = h;
    rot.det_a = det;
    rot.tr_a = tr;
    rot.sqrt_det = std::sqrt(det);
    rot.theta = std::atan2(std::sqrt(disc), tr);  // in (0, pi) since sin > 0
    rot.sin_theta = std::sqrt(disc) / (2.0 * rot.sqrt_det);
    rot.cos_theta = tr / (2.0 * rot.sqrt_det);
    if (rot.sin_theta < kConditioningRefuse)
        throw InadmissibleError("rotation: sin(theta) below conditioning floor (near-resonant h)");
    rot.conditioning_warning = rot.sin_theta < kConditioningWarn;
    return rot;
}

ModeRotation theta_of(const SchemeDef& scheme, double h) {
    if (!(h > 0.0)) throw InadmissibleError("theta_of: h must be positive");
    return rotation_of(scheme.coeffs(h), h);
}

double alpha_hat(const ModeRotation& rot, std::int64_t n) {
    const double power = std::pow(rot.sqrt_det, double(n - 1));
    return power * std::sin(double(n) * rot.theta) / rot.sin_theta;
}

double sum_sin2j(double theta, std::int64_t n) {
    return (std::cos(theta) - std::cos(double(2 * n - 1) * theta)) / (2.0 * std::sin(theta));
}

double sum_cos2j(double theta, std::int64_t n) {
    return 0.5 + std::sin(double(2 * n - 1) * theta) / (2.0 * std::sin(theta));
}

double sum_alpha_hat_sq(double theta, std::int64_t n) {
    const double s = std::sin(theta);
    return (double(n - 2) / 2.0 -
            (std::sin(double(2 * n - 3) * theta) - std::sin(theta)) / (4.0 * s)) /
           (s * s);
}

double sum_alpha_hat_cross(double theta, std::int64_t n) {
    const double s = std::sin(theta);
    return (double(n - 2) * std::cos(theta) -
            (std::sin(2.0 * double(n - 1) * theta) - std::sin(2.0 * theta)) / (2.0 * s)) /
           (s * s);
}

namespace {

struct ModeSetup {
    SchemeCoeffs c;
    ModeRotation rot;
    double sqrt_eta;
    double x0, y0;
};

ModeSetup mode_setup(const SchemeDef& scheme, const ModelSpec& model, int k, double tau) {
    if (k < 1 || k > model.stored_modes())
        throw ConfigError("mode index out of range: " + std::to_string(k));
    if (!(tau > 0.0)) throw InadmissibleError("tau must be positive");
    const double h = model.lambda[k - 1] * tau;
    ModeSetup s;
    s.c = scheme.coeffs(h);
    s.rot = rotation_of(s.c, h);
    s.sqrt_eta = std::sqrt(model.eta[k - 1]);
    s.x0 = model.x0[k - 1];
    s.y0 = model.y0[k - 1];
    return s;
}

}  // namespace

CompactCoeffs compact_coeffs(const SchemeDef& scheme, const ModelSpec& model, int k,
                             double tau, std::int64_t n) {
    if (n < 1) throw ConfigError("compact_coeffs: n must be >= 1");
    const ModeSetup s = mode_setup(scheme, model, k, tau);
    const double det = s.rot.det_a;
    const double cx = s.c.a11 * s.c.b1 + s.c.a12 * s.c.b2;
    const double cy = s.c.a21 * s.c.b1 - s.c.a11 * s.c.b2;

    CompactCoeffs out;
    out.n = n;
    out.x_det_part = -det * alpha_hat(s.rot, n - 1) * s.x0 +
                     alpha_hat(s.rot, n) * (s.c.a11 * s.x0 + s.c.a12 * s.y0);
    out.y_det_part = s.c.a21 * alpha_hat(s.rot, n) * s.x0 + alpha_hat(s.rot, n + 1) * s.y0 -
                     s.c.a11 * alpha_hat(s.rot, n) * s.y0;
    out.x_coeff.resize(static_cast<std::size_t>(n));
    out.y_coeff.resize(static_cast<std::size_t>(n));
    for (std::int64_t j = 0; j < n; ++j) {
        out.x_coeff[j] = -det * alpha_hat(s.rot, n - 2 - j) * s.c.b1 + cx * alpha_hat(s.rot, n - 1 - j);
        out.y_coeff[j] = cy * alpha_hat(s.rot, n - 1 - j) + s.c.b2 * alpha_hat(s.rot, n - j);
    }
    return out;
}

std::pair<double, double> compact_reconstruct(const CompactCoeffs& coeffs, double sqrt_eta,
                                              std::span<const double> increments) {
    if (std::int64_t(increments.size()) != coeffs.n)
        throw ConfigError("compact_reconstruct: increment count must equal n");
    double x = coeffs.x_det_part, y = coeffs.y_det_part;
    for (std::size_t j = 0; j < increments.size(); ++j) {
        x += sqrt_eta * coeffs.x_coeff[j] * increments[j];
        y += sqrt_eta * coeffs.y_coeff[j] * increments[j];
    }
    return {x, y};
}

std::pair<double, double> compact_reconstruct_streamed(
    const SchemeDef& scheme, const ModelSpec& model, int k, double tau, std::int64_t n,
    const std::function<double(std::int64_t)>& increment) {
    if (n < 1) throw ConfigError("compact_reconstruct_streamed: n must be >= 1");
    const ModeSetup s = mode_setup(scheme, model, k, tau);
    const double det = s.rot.det_a;
    const double cx = s.c.a11 * s.c.b1 + s.c.a12 * s.c.b2;
    const double cy = s.c.a21 * s.c.b1 - s.c.a11 * s.c.b2;

    double x = -det * alpha_hat(s.rot, n - 1) * s.x0 +
               alpha_hat(s.rot, n) * (s.c.a11 * s.x0 + s.c.a12 * s.y0);
    double y = s.c.a21 * alpha_hat(s.rot, n) * s.x0 + alpha_hat(s.rot, n + 1) * s.y0 -
               s.c.a11 * alpha_hat(s.rot, n) * s.y0;
    // Coefficients are produced in consumption order; nothing of size n is stored.
    for (std::int64_t j = 0; j < n; ++j) {
        const double db = increment(j);
        x += s.sqrt_eta * (-det * alpha_hat(s.rot, n - 2 - j) * s.c.b1 + cx * alpha_hat(s.rot, n - 1 - j)) * db;
        y += s.sqrt_eta * (cy * alpha_hat(s.rot, n - 1 - j) + s.c.b2 * alpha_hat(s.rot, n - j)) * db;
    }
    return {x, y};
}

std::pair<double, double> iterate_reference(const SchemeDef& scheme, const ModelSpec& model,
                                            int k, double tau,
                                            std::span<const double> increments) {
    const ModeSetup s = mode_setup(scheme, model, k, tau);
    return detail::iterate_pair<double>(s.c.a11, s.c.a12, s.c.a21, s.c.a22, s.c.b1, s.c.b2,
                                        s.x0, s.y0, s.sqrt_eta, increments);
}

}  // namespace lilshs

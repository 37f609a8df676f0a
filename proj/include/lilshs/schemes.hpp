#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lilshs/errors.hpp"
#include "lilshs/model.hpp"

namespace lilshs {

/// One-step method coefficients at rotation rate h = lambda_k * tau:
///   (X_{n+1}, Y_{n+1}) = A(h) (X_n, Y_n) + sqrt(eta_k) b(h) dbeta_{k,n}
/// with A = [[a11, a12], [a21, a22]], b = (b1, b2).
struct SchemeCoeffs {
    double a11, a12, a21, a22, b1, b2;

    double det() const { return a11 * a22 - a12 * a21; }
    double tr() const { return a11 + a22; }
};

/// A registered one-step method. `coeffs` must be a pure function of h,
/// defined on (0, h1) for some h1 > 0.
struct SchemeDef {
    std::string name;
    std::function<SchemeCoeffs(double)> coeffs;
    std::optional<bool> claimed_symplectic;
};

enum class BuiltinScheme { euler_maruyama, backward_euler, midpoint };

enum class DetClass { unit, contractive, expansive };

struct SchemeTraits {
    double det_a = 0.0;
    double tr_a = 0.0;
    bool admissible = false;  // 4 det A - (tr A)^2 > 0
    bool symplectic = false;  // |det A - 1| within tolerance
    DetClass det_class = DetClass::unit;
};

/// det is four multiplications away from its inputs, so genuinely symplectic
/// schemes only carry rounding noise.
inline constexpr double kSymplecticTol = 1e-12;

/// Builtin schemes for the rotation system with noise vector (alpha1, alpha2):
///   euler_maruyama:  A = [[1, h], [-h, 1]],                  b = (a1, a2)
///   backward_euler:  A = [[1, h], [-h, 1]] / (1 + h^2),      b = (a1 + h a2, a2 - h a1) / (1 + h^2)
///   midpoint:        A = [[1 - h^2/4, h], [-h, 1 - h^2/4]] / (1 + h^2/4),
///                    b = (a1 + h a2/2, a2 - h a1/2) / (1 + h^2/4)
/// The implicit b-vectors are the standard implicit treatment of the additive
/// noise term (solve the implicit update with the noise on the right-hand side).
SchemeDef builtin(BuiltinScheme name, double alpha1, double alpha2);
SchemeDef builtin(const std::string& name, double alpha1, double alpha2);
SchemeDef builtin_for(BuiltinScheme name, const ModelSpec& model);

std::vector<std::string> builtin_names();

SchemeTraits classify(const SchemeDef& scheme, double h, double tol = kSymplecticTol);
SchemeTraits classify(const SchemeCoeffs& coeffs, double tol = kSymplecticTol);

/// Per-tau residuals against the reference first-order expansion:
///   residual_a = |a11-1| + |a22-1| + |a12-tau| + |a21+tau|   (expected O(tau^2))
///   residual_b = |b1-alpha1| + |b2-alpha2|                   (expected O(tau))
/// evaluated at h = lambda_1 * tau.
struct OrderRow {
    double tau, h, residual_a, residual_b;
};

struct OrderReport {
    std::vector<OrderRow> rows;
    double slope_a = 0.0;  // log-log fit; NaN when the residual is identically zero
    double slope_b = 0.0;
    bool exact_a = false;  // residuals at rounding level for every tau
    bool exact_b = false;
    bool pass_a = false;   // slope >= 1.8, or exact
    bool pass_b = false;   // slope >= 0.8, or exact
    bool pass() const { return pass_a && pass_b; }
};

OrderReport check_convergence_order(const SchemeDef& scheme, const ModelSpec& model,
                                    std::span<const double> taus);

/// Loads a custom scheme from a whitespace/comma separated table with rows
///   h a11 a12 a21 a22 b1 b2
/// ('#' starts a comment). By default the coefficient function only accepts h
/// values present in the table (relative tolerance 1e-12); pass
/// interpolate=true to enable linear interpolation between bracketing rows.
SchemeDef load_scheme_table(const std::string& path, bool interpolate = false);

}  // namespace lilshs

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lilshs/model.hpp"
#include "lilshs/rotation.hpp"
#include "lilshs/schemes.hpp"

namespace lilshs {

/// Per-mode asymptotic variance/covariance rates of the discrete martingale
/// part. With c = a11 b1 + a12 b2 and d = a21 b1 - a11 b2:
///   xi1 = (b1^2 + c^2 - 2 b1 c cos(theta)) / sin^2(theta)
///   xi2 = (b2^2 + d^2 + 2 b2 d cos(theta)) / sin^2(theta)
///   xi3 = (-b1 b2 cos(2 theta) + (b2 c - b1 d) cos(theta) + c d) / sin^2(theta)
/// The symmetric matrix [[xi1, xi3/2], [xi3/2, xi2]] is the covariance rate
/// of the pair of mode martingales, hence positive semidefinite.
struct XiTriple {
    double xi1 = 0.0;
    double xi2 = 0.0;
    double xi3 = 0.0;
};

XiTriple xi_constants(const SchemeDef& scheme, double h);
XiTriple xi_constants(const SchemeCoeffs& coeffs, const ModeRotation& rot);

/// Block-diagonal quadratic form on the unit sphere of R^{2M}:
///   phi(rho) = sum_k (xi1 rho1k^2 + xi2 rho2k^2 + xi3 rho1k rho2k) eta_k
struct PhiBlock {
    XiTriple xi;
    double eta = 0.0;
};

struct PhiForm {
    std::vector<PhiBlock> blocks;
};

PhiForm phi_form(const SchemeDef& scheme, const ModelSpec& model, double tau);

double phi_value(const PhiForm& form, std::span<const std::array<double, 2>> rho);

/// The constraint couples blocks only through the total norm, so the sphere
/// supremum of the form is the largest per-block eigenvalue: the value is
/// max_k sqrt(lambda_max([[xi1, xi3/2], [xi3/2, xi2]]) eta_k) and the argmax
/// is the corresponding unit eigenvector placed in that block. Ties pick the
/// lowest mode index.
struct SupPhi {
    double value = 0.0;
    int argmax_mode = 0;                           // 1-based
    std::vector<std::array<double, 2>> argmax;     // one (rho1, rho2) per block
};

SupPhi sup_phi(const PhiForm& form);

/// Quadratic variations of the continuous mode martingales
///   qv_cos(t) = eta ( t/2 + sin(2 t lambda) / (4 lambda) )   [cos-integrand]
///   qv_sin(t) = eta ( t/2 - sin(2 t lambda) / (4 lambda) )   [sin-integrand]
/// so qv_cos + qv_sin = eta t exactly.
struct ContinuousQv {
    double qv_cos = 0.0;
    double qv_sin = 0.0;
};

ContinuousQv continuous_qv(double t, double lambda, double eta);

/// Quadratic variations of the four discrete mode martingales at step n,
/// scaled by eta:
///   m1 = eta ((xi1/2) t_n + K1)    m2 = eta ((xi1/2) t_n - K1)
///   m3 = eta ((xi2/2) t_n + K2)    m4 = eta ((xi2/2) t_n - K2)
/// with t_n = n tau and the oscillatory remainders
///   K1 = tau/(4 sin^2 th) (sin((2n-1)th)/sin th + 1)(b1^2 cos 2th + c^2 - 2 b1 c cos th)
///      + tau/sin^2 th (c - b1 cos th) b1 sin th (cos th - cos((2n-1)th))/(2 sin th)
/// (K2 likewise with b2, d and the opposite cross sign), bounded uniformly in
/// n by k1_bound / k2_bound.
struct DiscreteQv {
    double m1, m2, m3, m4;
    double k1, k2;
    double k1_bound, k2_bound;
};

DiscreteQv discrete_qv(const SchemeDef& scheme, double h, double eta, std::int64_t n,
                       double tau);
/// Convenience overload for the unit-frequency normalisation tau = h.
DiscreteQv discrete_qv(const SchemeDef& scheme, double h, double eta, std::int64_t n);

/// Convergence of the discrete LIL constants to the exact one as tau -> 0
/// and M -> infinity. Requires a symplectic scheme satisfying the
/// convergence-order residual bounds (verified via check_convergence_order);
/// for non-symplectic schemes the limit statement is vacuous and the call
/// throws.
struct PreservationRow {
    double tau = 0.0;
    int num_modes = 0;
    double max_xi1_eta = 0.0;  // max_k sqrt(xi_{k,1} eta_k)
    double max_xi2_eta = 0.0;
    double sup_phi_value = 0.0;
    double max_abs_xi3 = 0.0;
    double gap_x = 0.0;  // |max_xi1_eta - exact constant|
    double gap_y = 0.0;
    double gap_joint = 0.0;
};

struct PreservationReport {
    double exact_constant = 0.0;
    std::vector<PreservationRow> tau_rows;  // M fixed at model truncation
    std::vector<PreservationRow> m_rows;    // tau fixed at finest, M swept
    bool monotone_x = false;                // gap_x strictly decreasing over tau_rows
    bool monotone_y = false;
    bool monotone_joint = false;
};

PreservationReport preservation_limit(const SchemeDef& scheme, const ModelSpec& model,
                                      std::span<const double> tau_seq,
                                      std::span<const int> m_seq);

}  // namespace lilshs

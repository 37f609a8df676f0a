#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lilshs/model.hpp"
#include "lilshs/rng.hpp"
#include "lilshs/schemes.hpp"

namespace lilshs {

struct ModeState {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
    int k = 1;
};

/// One-step law of the exact mode solution over a step of length tau:
///   z(t + tau) = R z(t) + L g,  g ~ N(0, I2),
/// where R = [[cos(lambda tau), sin(lambda tau)], [-sin(...), cos(...)]] and
/// L L^T = C(tau) = int_0^tau R(lambda s) sigma sigma^T R(lambda s)^T ds with
/// sigma = sqrt(eta) (alpha1, alpha2)^T. Entries of C are closed-form
/// combinations of tau, sin(2 lambda tau)/lambda and (1-cos(2 lambda tau))/lambda,
/// and trace C = eta (alpha1^2 + alpha2^2) tau exactly.
///
/// The factor L is lower-triangular in (x, y) order when the noise enters
/// predominantly through x (|alpha1| >= |alpha2|) and in (y, x) order
/// otherwise, so the first normal of each step's pair always drives the
/// dominant noise direction and can be shared with a numerical path.
/// mean_response = int_0^tau R(lambda s) sigma ds is the conditional loading
/// of the step's increment on its Brownian increment (used by coupling
/// diagnostics: E[increment | dbeta] = mean_response * dbeta / tau).
struct ExactTransition {
    double r00, r01, r10, r11;
    double c00, c01, c11;
    double l00, l10, l11;       // noise = (l00*ga + 0, l10*ga + l11*gb) in factor order
    bool pivot_y;               // factor order is (y, x)
    double mean_x, mean_y;      // mean_response components

    /// Applies the transition in (x, y) coordinates with the step's pair.
    void apply(double& x, double& y, const GaussPair& g) const {
        const double nx0 = r00 * x + r01 * y;
        const double ny0 = r10 * x + r11 * y;
        if (pivot_y) {
            x = nx0 + l10 * g.g0 + l11 * g.g1;
            y = ny0 + l00 * g.g0;
        } else {
            x = nx0 + l00 * g.g0;
            y = ny0 + l10 * g.g0 + l11 * g.g1;
        }
    }
};

ExactTransition exact_transition(double lambda, double eta, double alpha1, double alpha2,
                                 double tau);
ExactTransition exact_transition(const ModelSpec& model, int k, double tau);

/// Exact-in-law trajectory of mode k (1-based) at the given step size,
/// returned at the requested checkpoint steps (sorted, 1-based step counts).
std::vector<ModeState> evolve_exact(const ModelSpec& model, std::uint64_t seed,
                                    std::uint32_t path, int k, double tau,
                                    std::uint64_t n_steps,
                                    std::span<const std::uint64_t> checkpoints);

/// Raw scheme recursion for mode k; dbeta_n = sqrt(tau) * (first normal of
/// step n's pair), the same increments an exact run of this stream consumes.
std::vector<ModeState> evolve_numeric(const SchemeDef& scheme, const ModelSpec& model,
                                      std::uint64_t seed, std::uint32_t path, int k,
                                      double tau, std::uint64_t n_steps,
                                      std::span<const std::uint64_t> checkpoints);

/// Scalar Brownian partial sums B_n = sum sqrt(tau) g (stream mode index 0;
/// system modes are 1-based).
std::vector<std::pair<double, double>> evolve_brownian(std::uint64_t seed, std::uint32_t path,
                                                       double tau, std::uint64_t n_steps,
                                                       std::span<const std::uint64_t> checkpoints);

/// Trajectory engine selector for system-level runs.
struct Engine {
    enum class Kind { exact, scheme, brownian };
    Kind kind = Kind::exact;
    const SchemeDef* scheme = nullptr;  // required for Kind::scheme

    static Engine exact() { return {Kind::exact, nullptr}; }
    static Engine brownian() { return {Kind::brownian, nullptr}; }
    static Engine numeric(const SchemeDef& s) { return {Kind::scheme, &s}; }
};

struct SystemFrame {
    double t = 0.0;
    double norm_x = 0.0;
    double norm_y = 0.0;
    double norm_joint = 0.0;
};

/// Evolves all modes of the model (independent streams per mode, mode k uses
/// stream index k) and reduces to the three norms at each checkpoint. The
/// reduction runs in increasing mode order, so results are bit-identical for
/// any thread count.
std::vector<SystemFrame> evolve_system(const Engine& engine, const ModelSpec& model,
                                       std::uint64_t seed, std::uint32_t path, double tau,
                                       std::uint64_t n_steps,
                                       std::span<const std::uint64_t> checkpoints);

/// Geometric checkpoint grid: step indices nearest to t = m^p for integer p,
/// starting at the smallest power above e^2 (so log log t is safely positive)
/// and clipped to [1, n_steps]. Duplicates collapse.
std::vector<std::uint64_t> geometric_checkpoints(double m, double tau, std::uint64_t n_steps);

/// count equally spaced steps ending at n_steps.
std::vector<std::uint64_t> linear_checkpoints(std::uint64_t count, std::uint64_t n_steps);

}  // namespace lilshs

#pragma once

#include <map>
#include <string>
#include <vector>

#include "lilshs/errors.hpp"

namespace lilshs {

/// Spectral description of the linear system
///   d(X,Y) = (0 B; -B 0)(X,Y) dt + (alpha1, alpha2) dW
/// diagonalised on the eigenbasis of B. `lambda[k]` is the angular frequency
/// of mode k+1, `eta[k]` the noise intensity of that mode (eigenvalue of the
/// trace-class covariance of W). Sequences may store more than `num_modes`
/// entries; the truncation used by samplers is `num_modes`, while spectral
/// suprema (sup eta) are taken over everything stored.
///
/// Immutable after construction; share freely across threads.
struct ModelSpec {
    std::vector<double> lambda;  // positive, non-decreasing
    std::vector<double> eta;     // non-negative, summable (trace recorded)
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    std::vector<double> x0;  // per-mode initial data <X0,e_k>
    std::vector<double> y0;  // per-mode initial data <Y0,e_k>
    int num_modes = 1;       // spectral truncation M
    double trace_q = 0.0;    // sum of stored eta

    int stored_modes() const { return static_cast<int>(lambda.size()); }

    /// Largest stored noise eigenvalue (the user must store enough modes to
    /// cover the maximiser; eta is summable so the sup is attained finitely).
    double sup_eta() const;

    /// Throws ConfigError when an invariant is violated.
    void validate(double trace_cap = kDefaultTraceCap) const;

    static constexpr double kDefaultTraceCap = 1e9;
};

enum class PresetKind { oscillator, schrodinger };

/// Named model family plus its free parameters.
///  - oscillator: M=1, lambda=[1], eta=[1], alpha=(0,alpha); parameter "alpha">0.
///  - schrodinger: lambda_k = k^2 (Dirichlet Laplacian modes on (0,pi)),
///    alpha=(0,alpha); parameters "alpha">0, "M", "eta_p" (eta_k = k^-p) or a
///    caller-supplied eta sequence via the JSON interface.
struct Preset {
    PresetKind kind = PresetKind::oscillator;
    std::map<std::string, double> parameters;
};

Preset make_preset(const std::string& name);

/// Builds a validated ModelSpec from a preset. Override keys (applied on top
/// of preset parameters): "alpha", "M", "eta_p", "x0", "y0", "trace_cap".
/// Unknown keys are rejected.
ModelSpec build_model(const Preset& preset,
                      const std::map<std::string, double>& overrides = {});

/// a.s. limsup of ||X(t)|| / sqrt(t log log t) for the exact solution
/// (same constant for Y and the joint norm):
/// sqrt(alpha1^2 + alpha2^2) * sqrt(sup_k eta_k).
double exact_lil_constant(const ModelSpec& model);

/// Model file loader. Schema:
///   {"preset": "oscillator"|"schrodinger" (optional),
///    "M": int, "alpha": [a1, a2],
///    "lambda": [...] | {"rule": "k^2"},
///    "eta":    [...] | {"rule": "k^-p", "p": <real>},
///    "x0": [...], "y0": [...]}
/// Rule records generate the first M entries. Fields omitted fall back to the
/// preset (or to zero initial data / eta=1 when no preset is given).
ModelSpec load_model_json(const std::string& path);
ModelSpec parse_model_json(const std::string& text);

}  // namespace lilshs

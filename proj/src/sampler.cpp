#include "lilshs/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "lilshs/rotation.hpp"

namespace lilshs {

ExactTransition exact_transition(double lambda, double eta, double alpha1, double alpha2,
                                 double tau) {
    if (!(lambda > 0.0)) throw ConfigError("exact_transition: lambda must be positive");
    if (!(tau > 0.0)) throw ConfigError("exact_transition: tau must be positive");

    ExactTransition tr;
    const double ct = std::cos(lambda * tau), st = std::sin(lambda * tau);
    tr.r00 = ct;
    tr.r01 = st;
    tr.r10 = -st;
    tr.r11 = ct;

    const double s2 = std::sin(2.0 * lambda * tau);
    const double c2 = 1.0 - std::cos(2.0 * lambda * tau);
    const double a1s = alpha1 * alpha1, a2s = alpha2 * alpha2, cross = alpha1 * alpha2;
    tr.c00 = eta * (tau * (a1s + a2s) / 2.0 + (a1s - a2s) * s2 / (4.0 * lambda) +
                    cross * c2 / (2.0 * lambda));
    tr.c11 = eta * (tau * (a1s + a2s) / 2.0 - (a1s - a2s) * s2 / (4.0 * lambda) -
                    cross * c2 / (2.0 * lambda));
    tr.c01 = eta * (cross * s2 / (2.0 * lambda) + (a2s - a1s) * c2 / (4.0 * lambda));

    const double c1 = 1.0 - ct;  // 1 - cos(lambda tau)
    tr.mean_x = std::sqrt(eta) * (alpha1 * st + alpha2 * c1) / lambda;
    tr.mean_y = std::sqrt(eta) * (-alpha1 * c1 + alpha2 * st) / lambda;

    // Factor C = L L^T pivoting on the dominant noise direction, so the first
    // normal of the pair carries the increment shared with numerical paths.
    // C is analytically PSD; tiny negative Schur complements are rounding.
    tr.pivot_y = std::abs(alpha2) >= std::abs(alpha1);
    const double p00 = tr.pivot_y ? tr.c11 : tr.c00;
    const double p11 = tr.pivot_y ? tr.c00 : tr.c11;
    const auto clamp_psd = [](double v) {
        if (v < 0.0) {
            if (v < -1e-14) throw Error("exact_transition: covariance not PSD");
            return 0.0;
        }
        return v;
    };
    const double l00 = std::sqrt(clamp_psd(p00));
    const double l10 = l00 > 0.0 ? tr.c01 / l00 : 0.0;
    const double l11 = std::sqrt(clamp_psd(p11 - l10 * l10));
    tr.l00 = l00;
    tr.l10 = l10;
    tr.l11 = l11;
    return tr;
}

ExactTransition exact_transition(const ModelSpec& model, int k, double tau) {
    if (k < 1 || k > model.stored_modes())
        throw ConfigError("exact_transition: mode index out of range");
    return exact_transition(model.lambda[k - 1], model.eta[k - 1], model.alpha1, model.alpha2,
                            tau);
}

namespace {

void check_checkpoints(std::span<const std::uint64_t> checkpoints, std::uint64_t n_steps) {
    std::uint64_t prev = 0;
    for (std::uint64_t c : checkpoints) {
        if (c < 1 || c > n_steps) throw ConfigError("checkpoint step out of range");
        if (c <= prev) throw ConfigError("checkpoints must be strictly increasing");
        prev = c;
    }
}

}  // namespace

std::vector<ModeState> evolve_exact(const ModelSpec& model, std::uint64_t seed,
                                    std::uint32_t path, int k, double tau,
                                    std::uint64_t n_steps,
                                    std::span<const std::uint64_t> checkpoints) {
    if (n_steps < 1) throw ConfigError("evolve_exact: n_steps must be >= 1");
    check_checkpoints(checkpoints, n_steps);
    const ExactTransition tr = exact_transition(model, k, tau);
    const NoiseStream stream(seed, path, static_cast<std::uint32_t>(k));

    std::vector<ModeState> out;
    out.reserve(checkpoints.size());
    double x = model.x0[k - 1], y = model.y0[k - 1];
    std::size_t ci = 0;
    for (std::uint64_t step = 0; step < n_steps && ci < checkpoints.size(); ++step) {
        tr.apply(x, y, stream.normal_pair(step));
        if (step + 1 == checkpoints[ci]) {
            out.push_back({x, y, double(step + 1) * tau, k});
            ++ci;
        }
    }
    return out;
}

std::vector<ModeState> evolve_numeric(const SchemeDef& scheme, const ModelSpec& model,
                                      std::uint64_t seed, std::uint32_t path, int k,
                                      double tau, std::uint64_t n_steps,
                                      std::span<const std::uint64_t> checkpoints) {
    if (n_steps < 1) throw ConfigError("evolve_numeric: n_steps must be >= 1");
    check_checkpoints(checkpoints, n_steps);
    if (k < 1 || k > model.stored_modes()) throw ConfigError("evolve_numeric: mode out of range");
    const double h = model.lambda[k - 1] * tau;
    const SchemeCoeffs c = scheme.coeffs(h);
    if (!(4.0 * c.det() - c.tr() * c.tr() > 0.0))
        throw InadmissibleError("evolve_numeric: scheme inadmissible at h = " + std::to_string(h));
    const double sq_eta = std::sqrt(model.eta[k - 1]);
    const double sq_tau = std::sqrt(tau);
    const double bx = sq_eta * c.b1, by = sq_eta * c.b2;
    const NoiseStream stream(seed, path, static_cast<std::uint32_t>(k));

    std::vector<ModeState> out;
    out.reserve(checkpoints.size());
    double x = model.x0[k - 1], y = model.y0[k - 1];
    std::size_t ci = 0;
    for (std::uint64_t step = 0; step < n_steps && ci < checkpoints.size(); ++step) {
        const double db = sq_tau * stream.normal_first(step);
        const double xn = c.a11 * x + c.a12 * y + bx * db;
        const double yn = c.a21 * x + c.a22 * y + by * db;
        x = xn;
        y = yn;
        if (step + 1 == checkpoints[ci]) {
            out.push_back({x, y, double(step + 1) * tau, k});
            ++ci;
        }
    }
    return out;
}

std::vector<std::pair<double, double>> evolve_brownian(std::uint64_t seed, std::uint32_t path,
                                                       double tau, std::uint64_t n_steps,
                                                       std::span<const std::uint64_t> checkpoints) {
    if (!(tau > 0.0)) throw ConfigError("evolve_brownian: tau must be positive");
    check_checkpoints(checkpoints, n_steps);
    const NoiseStream stream(seed, path, 0);
    const double sq_tau = std::sqrt(tau);
    std::vector<std::pair<double, double>> out;
    out.reserve(checkpoints.size());
    double b = 0.0;
    std::size_t ci = 0;
    for (std::uint64_t step = 0; step < n_steps && ci < checkpoints.size(); ++step) {
        b += sq_tau * stream.normal_first(step);
        if (step + 1 == checkpoints[ci]) {
            out.emplace_back(double(step + 1) * tau, b);
            ++ci;
        }
    }
    return out;
}

std::vector<SystemFrame> evolve_system(const Engine& engine, const ModelSpec& model,
                                       std::uint64_t seed, std::uint32_t path, double tau,
                                       std::uint64_t n_steps,
                                       std::span<const std::uint64_t> checkpoints) {
    std::vector<SystemFrame> frames(checkpoints.size());
    for (std::size_t i = 0; i < checkpoints.size(); ++i)
        frames[i].t = double(checkpoints[i]) * tau;

    if (engine.kind == Engine::Kind::brownian) {
        const auto series = evolve_brownian(seed, path, tau, n_steps, checkpoints);
        for (std::size_t i = 0; i < series.size(); ++i) {
            const double v = std::abs(series[i].second);
            frames[i].norm_x = v;
            frames[i].norm_y = 0.0;
            frames[i].norm_joint = v;
        }
        return frames;
    }
    if (engine.kind == Engine::Kind::scheme && engine.scheme == nullptr)
        throw ConfigError("evolve_system: scheme engine without a scheme");

    // Modes accumulate in increasing k so the reduction order is fixed.
    for (int k = 1; k <= model.num_modes; ++k) {
        const auto states =
            engine.kind == Engine::Kind::exact
                ? evolve_exact(model, seed, path, k, tau, n_steps, checkpoints)
                : evolve_numeric(*engine.scheme, model, seed, path, k, tau, n_steps, checkpoints);
        for (std::size_t i = 0; i < states.size(); ++i) {
            frames[i].norm_x += states[i].x * states[i].x;
            frames[i].norm_y += states[i].y * states[i].y;
        }
    }
    for (auto& f : frames) {
        f.norm_joint = std::sqrt(f.norm_x + f.norm_y);
        f.norm_x = std::sqrt(f.norm_x);
        f.norm_y = std::sqrt(f.norm_y);
    }
    return frames;
}

std::vector<std::uint64_t> geometric_checkpoints(double m, double tau, std::uint64_t n_steps) {
    if (!(m > 1.0)) throw ConfigError("geometric checkpoints require m > 1");
    if (!(tau > 0.0)) throw ConfigError("geometric checkpoints require tau > 0");
    const double e2 = std::exp(2.0);
    std::vector<std::uint64_t> steps;
    // first power strictly above e^2 so log log t is bounded away from 0
    long p = static_cast<long>(std::ceil(std::log(e2) / std::log(m)));
    if (std::pow(m, double(p)) <= e2) ++p;
    for (;; ++p) {
        const double t = std::pow(m, double(p));
        if (!(t <= double(n_steps) * tau * (1.0 + 1e-12))) break;
        const auto step = static_cast<std::uint64_t>(std::llround(t / tau));
        if (step < 1) continue;
        const std::uint64_t clipped = std::min(step, n_steps);
        if (steps.empty() || clipped > steps.back()) steps.push_back(clipped);
    }
    return steps;
}

std::vector<std::uint64_t> linear_checkpoints(std::uint64_t count, std::uint64_t n_steps) {
    if (count < 1) throw ConfigError("linear checkpoints require count >= 1");
    count = std::min(count, n_steps);
    std::vector<std::uint64_t> steps;
    steps.reserve(count);
    for (std::uint64_t i = 1; i <= count; ++i) {
        const auto step = static_cast<std::uint64_t>(
            std::llround(double(i) * double(n_steps) / double(count)));
        const std::uint64_t clipped = std::max<std::uint64_t>(1, std::min(step, n_steps));
        if (steps.empty() || clipped > steps.back()) steps.push_back(clipped);
    }
    return steps;
}

}  // namespace lilshs

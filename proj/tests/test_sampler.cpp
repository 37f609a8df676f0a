#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lilshs/constants.hpp"
#include "lilshs/parallel.hpp"
#include "lilshs/sampler.hpp"

using namespace lilshs;

namespace {

const ModelSpec kOsc = build_model(make_preset("oscillator"), {{"alpha", 1.0}});

ModelSpec osc_with_initial(double x0, double y0) {
    ModelSpec m = kOsc;
    m.x0 = {x0};
    m.y0 = {y0};
    return m;
}

}  // namespace

TEST_CASE("exact transition closed form") {
    SUBCASE("trace identity is exact") {
        for (double tau : {0.1, 0.5, std::numbers::pi, 4.0})
            for (double lambda : {0.5, 1.0, 3.0}) {
                const ExactTransition tr = exact_transition(lambda, 0.8, 0.3, 1.1, tau);
                CHECK(tr.c00 + tr.c11 ==
                      doctest::Approx(0.8 * (0.3 * 0.3 + 1.1 * 1.1) * tau).epsilon(1e-13));
            }
    }
    SUBCASE("alpha=(0,1), lambda=1, tau=pi: off-diagonal-free split of the trace") {
        const ExactTransition tr = exact_transition(1.0, 1.0, 0.0, 1.0, std::numbers::pi);
        CHECK(tr.c00 + tr.c11 == doctest::Approx(std::numbers::pi).epsilon(1e-13));
        CHECK(tr.c00 == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
        CHECK(tr.c01 == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("entries match Simpson quadrature of the defining integral") {
        const double lambda = 2.0, eta = 0.6, a1 = 0.4, a2 = 0.9;
        for (double tau : {0.3, 1.7}) {
            const int panels = 10000;
            double q00 = 0, q01 = 0, q11 = 0;
            for (int i = 0; i <= panels; ++i) {
                const double s = tau * double(i) / panels;
                const double c = std::cos(lambda * s), sn = std::sin(lambda * s);
                const double mx = std::sqrt(eta) * (c * a1 + sn * a2);
                const double my = std::sqrt(eta) * (-sn * a1 + c * a2);
                const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
                q00 += w * mx * mx;
                q01 += w * mx * my;
                q11 += w * my * my;
            }
            const double scale = (tau / panels) / 3.0;
            const ExactTransition tr = exact_transition(lambda, eta, a1, a2, tau);
            CHECK(std::abs(tr.c00 - q00 * scale) < 1e-9);
            CHECK(std::abs(tr.c01 - q01 * scale) < 1e-9);
            CHECK(std::abs(tr.c11 - q11 * scale) < 1e-9);
        }
    }
    SUBCASE("tau -> 0: C(tau)/tau -> sigma sigma^T entrywise, first order in tau") {
        const double eta = 0.8, a1 = 0.3, a2 = 1.1, lambda = 1.0;
        const auto gap = [&](double tau) {
            const ExactTransition tr = exact_transition(lambda, eta, a1, a2, tau);
            return std::max({std::abs(tr.c00 / tau - eta * a1 * a1),
                             std::abs(tr.c01 / tau - eta * a1 * a2),
                             std::abs(tr.c11 / tau - eta * a2 * a2)});
        };
        // off-diagonal error is ~ eta |alpha|^2 lambda tau; bound with slack 2
        const double tau = 1e-4;
        CHECK(gap(tau) < 2.0 * eta * (a1 * a1 + a2 * a2) * lambda * tau);
        CHECK(gap(1e-3) / gap(1e-4) == doctest::Approx(10.0).epsilon(0.05));
    }
    SUBCASE("cholesky factor reproduces C") {
        const ExactTransition tr = exact_transition(1.5, 0.7, 0.2, 1.0, 0.8);
        const double p00 = tr.pivot_y ? tr.c11 : tr.c00;
        const double p11 = tr.pivot_y ? tr.c00 : tr.c11;
        CHECK(tr.l00 * tr.l00 == doctest::Approx(p00).epsilon(1e-12));
        CHECK(tr.l00 * tr.l10 == doctest::Approx(tr.c01).epsilon(1e-12));
        CHECK(tr.l10 * tr.l10 + tr.l11 * tr.l11 == doctest::Approx(p11).epsilon(1e-12));
    }
    SUBCASE("zero noise gives the pure rotation") {
        ModelSpec silent = kOsc;
        silent.eta = {0.0};
        silent.trace_q = 0.0;
        silent.x0 = {0.6};
        silent.y0 = {0.8};
        const std::vector<std::uint64_t> cp = {50};
        const auto states = evolve_exact(silent, 1, 0, 1, 0.3, 50, cp);
        CHECK(states[0].x * states[0].x + states[0].y * states[0].y ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("exact sampler marginal law") {
    // sample variance of X at t=pi vs qv_sin(pi) = pi/2 (oscillator, alpha=1)
    const double tau = std::numbers::pi / 8;
    const std::uint64_t n_steps = 8;
    const std::vector<std::uint64_t> cp = {8};
    const int paths = 10000;
    std::vector<double> xs(paths);
    parallel_for(paths, 2, [&](std::int64_t p) {
        xs[p] = evolve_exact(kOsc, 77, std::uint32_t(p), 1, tau, n_steps, cp)[0].x;
    });
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= paths;
    double var = 0.0;
    for (double v : xs) var += (v - mean) * (v - mean);
    var /= paths - 1;
    const double predicted = continuous_qv(std::numbers::pi, 1.0, 1.0).qv_sin;
    const double se = predicted * std::sqrt(2.0 / paths);
    CHECK(std::abs(var - predicted) < 5.0 * se);
}

TEST_CASE("exact sampler covariance matches the analytic covariance") {
    // at several times, full (X,Y) covariance vs C(t) closed form (x0=y0=0)
    const double tau = 0.5;
    const std::vector<std::uint64_t> cp = {2, 20, 200};
    const int paths = 20000;
    std::vector<std::array<double, 3>> acc(cp.size(), {0, 0, 0});
    std::vector<std::vector<ModeState>> all(paths);
    parallel_for(paths, 2, [&](std::int64_t p) {
        all[p] = evolve_exact(kOsc, 1234, std::uint32_t(p), 1, tau, 200, cp);
    });
    for (int p = 0; p < paths; ++p)
        for (std::size_t i = 0; i < cp.size(); ++i) {
            acc[i][0] += all[p][i].x * all[p][i].x;
            acc[i][1] += all[p][i].x * all[p][i].y;
            acc[i][2] += all[p][i].y * all[p][i].y;
        }
    for (std::size_t i = 0; i < cp.size(); ++i) {
        const double t = double(cp[i]) * tau;
        const ExactTransition ref = exact_transition(1.0, 1.0, 0.0, 1.0, t);
        const double c00 = acc[i][0] / paths, c01 = acc[i][1] / paths, c11 = acc[i][2] / paths;
        const double se_00 = ref.c00 * std::sqrt(2.0 / paths);
        const double se_11 = ref.c11 * std::sqrt(2.0 / paths);
        const double se_01 =
            std::sqrt((ref.c00 * ref.c11 + ref.c01 * ref.c01) / paths);
        CHECK(std::abs(c00 - ref.c00) < 5.0 * se_00);
        CHECK(std::abs(c11 - ref.c11) < 5.0 * se_11);
        CHECK(std::abs(c01 - ref.c01) < 5.0 * se_01);
    }
}

TEST_CASE("numeric evolution basics") {
    SUBCASE("zero noise: midpoint norm constant, EM expands by sqrt(1+h^2) per step") {
        ModelSpec silent = osc_with_initial(0.6, 0.8);
        silent.eta = {0.0};
        silent.trace_q = 0.0;
        const std::vector<std::uint64_t> cp = {1, 2, 10};
        const auto mp = evolve_numeric(builtin(BuiltinScheme::midpoint, 0.0, 1.0), silent, 9, 0,
                                       1, 1.0, 10, cp);
        for (const auto& s : mp)
            CHECK(s.x * s.x + s.y * s.y == doctest::Approx(1.0).epsilon(1e-12));
        const auto em = evolve_numeric(builtin(BuiltinScheme::euler_maruyama, 0.0, 1.0), silent,
                                       9, 0, 1, 1.0, 10, cp);
        CHECK(em[0].x * em[0].x + em[0].y * em[0].y == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(em[2].x * em[2].x + em[2].y * em[2].y ==
              doctest::Approx(std::pow(2.0, 10)).epsilon(1e-10));
        const auto be = evolve_numeric(builtin(BuiltinScheme::backward_euler, 0.0, 1.0), silent,
                                       9, 0, 1, 1.0, 10, cp);
        CHECK(be[0].x * be[0].x + be[0].y * be[0].y == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("inadmissible h is refused") {
        const SchemeDef id{"identity", [](double) { return SchemeCoeffs{1, 0, 0, 1, 0, 1}; }, {}};
        const std::vector<std::uint64_t> cp = {1};
        CHECK_THROWS_AS(evolve_numeric(id, kOsc, 1, 0, 1, 0.1, 1, cp), InadmissibleError);
    }
    SUBCASE("sample variance matches the discrete QV prediction window") {
        const SchemeDef mp = builtin(BuiltinScheme::midpoint, 0.0, 1.0);
        const double tau = 0.1;
        const std::int64_t n = 1000;
        const std::vector<std::uint64_t> cp = {std::uint64_t(n)};
        const int paths = 10000;
        std::vector<double> xs(paths);
        parallel_for(paths, 2, [&](std::int64_t p) {
            xs[p] = evolve_numeric(mp, kOsc, 555, std::uint32_t(p), 1, tau, n, cp)[0].x;
        });
        double mean = 0.0;
        for (double v : xs) mean += v;
        mean /= paths;
        double var = 0.0;
        for (double v : xs) var += (v - mean) * (v - mean);
        var /= paths - 1;
        const DiscreteQv qv = discrete_qv(mp, tau, 1.0, n, tau);
        const double center = (qv.m1 + qv.m2) / 2.0;  // (xi1/2) t_n,  eta = 1
        const double se = var * std::sqrt(2.0 / paths);
        const double lo = center - qv.k1_bound - 5.0 * se;
        const double hi = center + qv.k1_bound + 5.0 * se;
        CHECK(var > lo);
        CHECK(var < hi);
    }
}

TEST_CASE("reproducibility across thread counts and checkpoint splits") {
    const SchemeDef mp = builtin(BuiltinScheme::midpoint, 0.0, 1.0);
    const std::vector<std::uint64_t> cp = {5, 50, 500};
    const auto base = evolve_numeric(mp, kOsc, 31337, 11, 1, 0.05, 500, cp);
    // identical addressing regardless of how many checkpoints are requested
    const std::vector<std::uint64_t> cp2 = {500};
    const auto tail = evolve_numeric(mp, kOsc, 31337, 11, 1, 0.05, 500, cp2);
    CHECK(base.back().x == tail[0].x);
    CHECK(base.back().y == tail[0].y);

    // bit-identical norms independent of worker count
    std::vector<std::vector<SystemFrame>> runs;
    for (int threads : {1, 4}) {
        std::vector<SystemFrame> frames(cp.size());
        std::vector<std::vector<SystemFrame>> per_path(8);
        parallel_for(8, threads, [&](std::int64_t p) {
            per_path[p] =
                evolve_system(Engine::numeric(mp), kOsc, 99, std::uint32_t(p), 0.05, 500, cp);
        });
        runs.push_back(per_path[5]);
    }
    for (std::size_t i = 0; i < cp.size(); ++i) {
        CHECK(runs[0][i].norm_x == runs[1][i].norm_x);
        CHECK(runs[0][i].norm_joint == runs[1][i].norm_joint);
    }
}

TEST_CASE("coupled consistency against the dbeta-conditioned transition") {
    // Sharing increments with the conditional-mean exact propagation
    //   z' = R z + mean_response * dbeta / tau
    // removes the scheme-independent iterated-integral noise, exposing the
    // midpoint map's second-order accuracy; halving tau quarters the error.
    // (Against the full exact sampler the coupled error is first order: the
    // residual normal the scheme never sees dominates; checked below.)
    const SchemeDef mp = builtin(BuiltinScheme::midpoint, 0.0, 1.0);
    const double t_end = 10.0;
    const int paths = 2000;

    const auto rms_conditioned = [&](double tau) {
        const auto n = std::uint64_t(std::llround(t_end / tau));
        const ExactTransition tr = exact_transition(1.0, 1.0, 0.0, 1.0, tau);
        const SchemeCoeffs c = mp.coeffs(tau);
        double err2 = 0.0;
        const double sq_tau = std::sqrt(tau);
        for (int p = 0; p < paths; ++p) {
            const NoiseStream stream(4242, std::uint32_t(p), 1);
            double xe = 0, ye = 0, xn = 0, yn = 0;
            for (std::uint64_t s = 0; s < n; ++s) {
                const double db = sq_tau * stream.normal_first(s);
                const double nxe = tr.r00 * xe + tr.r01 * ye + tr.mean_x * db / tau;
                const double nye = tr.r10 * xe + tr.r11 * ye + tr.mean_y * db / tau;
                xe = nxe;
                ye = nye;
                const double nxn = c.a11 * xn + c.a12 * yn + c.b1 * db;
                const double nyn = c.a21 * xn + c.a22 * yn + c.b2 * db;
                xn = nxn;
                yn = nyn;
            }
            err2 += (xe - xn) * (xe - xn);
        }
        return std::sqrt(err2 / paths);
    };

    const double e1 = rms_conditioned(0.2);
    const double e2 = rms_conditioned(0.1);
    const double e3 = rms_conditioned(0.05);
    const double slope = std::log2(e1 / e3) / 2.0;
    CHECK(slope == doctest::Approx(2.0).epsilon(0.15));  // +-0.3

    // full-sampler coupling: strong order 1 (the residual normal dominates)
    const auto rms_full = [&](double tau) {
        const auto n = std::uint64_t(std::llround(t_end / tau));
        const std::vector<std::uint64_t> cp = {n};
        double err2 = 0.0;
        for (int p = 0; p < paths; ++p) {
            const auto ze = evolve_exact(kOsc, 4242, std::uint32_t(p), 1, tau, n, cp)[0];
            const auto zn = evolve_numeric(mp, kOsc, 4242, std::uint32_t(p), 1, tau, n, cp)[0];
            err2 += (ze.x - zn.x) * (ze.x - zn.x);
        }
        return std::sqrt(err2 / paths);
    };
    const double f1 = rms_full(0.2);
    const double f3 = rms_full(0.05);
    CHECK(std::log2(f1 / f3) / 2.0 == doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("system norms") {
    SUBCASE("M=1 reduces to the per-mode norms") {
        const std::vector<std::uint64_t> cp = {10, 100};
        const auto frames = evolve_system(Engine::exact(), kOsc, 7, 3, 0.2, 100, cp);
        const auto states = evolve_exact(kOsc, 7, 3, 1, 0.2, 100, cp);
        for (std::size_t i = 0; i < cp.size(); ++i) {
            CHECK(frames[i].norm_x == doctest::Approx(std::abs(states[i].x)));
            CHECK(frames[i].norm_joint ==
                  doctest::Approx(std::hypot(states[i].x, states[i].y)));
        }
    }
    SUBCASE("zero noise, midpoint: joint norm constant") {
        ModelSpec sch = build_model(make_preset("schrodinger"), {{"M", 3}});
        sch.eta = {0.0, 0.0, 0.0};
        sch.trace_q = 0.0;
        sch.x0 = {1.0, 0.5, 0.25};
        sch.y0 = {0.0, -0.5, 0.1};
        const double norm0 = std::sqrt(1.0 + 0.25 + 0.0625 + 0.25 + 0.01);
        const SchemeDef mp = builtin(BuiltinScheme::midpoint, 0.0, 1.0);
        const std::vector<std::uint64_t> cp = {1, 7, 40};
        const auto frames = evolve_system(Engine::numeric(mp), sch, 5, 0, 0.05, 40, cp);
        for (const auto& f : frames)
            CHECK(f.norm_joint == doctest::Approx(norm0).epsilon(1e-12));
    }
    SUBCASE("mean squared joint norm grows with slope sum((xi1+xi2) eta / 2)") {
        const ModelSpec sch = build_model(make_preset("schrodinger"), {{"M", 4}});
        const SchemeDef mp = builtin(BuiltinScheme::midpoint, 0.0, 1.0);
        const double tau = 0.05;
        const std::vector<std::uint64_t> cp = {400, 800};
        const int paths = 4000;
        std::vector<std::array<double, 2>> sq(paths);
        parallel_for(paths, 2, [&](std::int64_t p) {
            const auto frames =
                evolve_system(Engine::numeric(mp), sch, 2024, std::uint32_t(p), tau, 800, cp);
            sq[p] = {frames[0].norm_joint * frames[0].norm_joint,
                     frames[1].norm_joint * frames[1].norm_joint};
        });
        double m1 = 0, m2 = 0;
        for (const auto& v : sq) {
            m1 += v[0];
            m2 += v[1];
        }
        m1 /= paths;
        m2 /= paths;
        double slope_pred = 0.0;
        for (int k = 1; k <= sch.num_modes; ++k) {
            const XiTriple xi = xi_constants(mp, sch.lambda[k - 1] * tau);
            slope_pred += (xi.xi1 + xi.xi2) * sch.eta[k - 1] / 2.0;
        }
        const double slope_mc = (m2 - m1) / (800 * tau - 400 * tau);
        CHECK(slope_mc == doctest::Approx(slope_pred).epsilon(0.1));
    }
}

TEST_CASE("checkpoint grids") {
    SUBCASE("geometric grid starts above e^2 and is increasing") {
        const auto cp = geometric_checkpoints(2.0, 1.0, 1u << 20);
        REQUIRE(!cp.empty());
        CHECK(double(cp.front()) > std::exp(2.0));
        for (std::size_t i = 0; i + 1 < cp.size(); ++i) CHECK(cp[i] < cp[i + 1]);
        CHECK(cp.back() <= (1u << 20));
    }
    SUBCASE("grid respects tau scaling") {
        const auto cp = geometric_checkpoints(2.0, 0.25, 1024);
        for (std::size_t i = 0; i + 1 < cp.size(); ++i)
            CHECK(double(cp[i + 1]) == doctest::Approx(2.0 * double(cp[i])).epsilon(0.01));
    }
    SUBCASE("linear grid") {
        const auto cp = linear_checkpoints(4, 100);
        CHECK(cp == std::vector<std::uint64_t>{25, 50, 75, 100});
    }
}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "lilshs/rotation.hpp"

using namespace lilshs;

namespace {

const ModelSpec kOsc = build_model(make_preset("oscillator"), {{"alpha", 1.0}});

ModelSpec osc_with_initial(double x0, double y0) {
    ModelSpec m = kOsc;
    m.x0 = {x0};
    m.y0 = {y0};
    return m;
}

std::vector<double> gaussian_increments(std::int64_t n, double tau, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(tau));
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& v : out) v = normal(gen);
    return out;
}

}  // namespace

TEST_CASE("theta for reference cases") {
    SUBCASE("midpoint h=2: tr=0, theta=pi/2") {
        const ModeRotation rot = theta_of(builtin(BuiltinScheme::midpoint, 0.0, 1.0), 2.0);
        CHECK(rot.cos_theta == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(rot.theta == doctest::Approx(std::numbers::pi / 2));
    }
    SUBCASE("euler_maruyama h=1: theta=pi/4") {
        const ModeRotation rot = theta_of(builtin(BuiltinScheme::euler_maruyama, 0.0, 1.0), 1.0);
        CHECK(rot.cos_theta == doctest::Approx(1.0 / std::sqrt(2.0)));
        CHECK(rot.theta == doctest::Approx(std::numbers::pi / 4));
    }
    SUBCASE("identity map fails") {
        const SchemeDef id{"identity", [](double) { return SchemeCoeffs{1, 0, 0, 1, 0, 0}; }, {}};
        CHECK_THROWS_AS(theta_of(id, 0.1), InadmissibleError);
    }
    SUBCASE("theta is in (0, pi), sin positive") {
        for (const char* name : {"euler_maruyama", "backward_euler", "midpoint"}) {
            const SchemeDef s = builtin(name, 0.3, 0.7);
            for (double h : {0.01, 0.1, 0.5, 1.0}) {
                const ModeRotation rot = theta_of(s, h);
                CHECK(rot.theta > 0.0);
                CHECK(rot.theta < std::numbers::pi);
                CHECK(rot.sin_theta > 0.0);
            }
        }
    }
}

TEST_CASE("alpha_hat special values") {
    const ModeRotation rot = theta_of(builtin(BuiltinScheme::euler_maruyama, 0.0, 1.0), 0.5);
    CHECK(alpha_hat(rot, 0) == doctest::Approx(0.0));
    CHECK(alpha_hat(rot, 1) == doctest::Approx(1.0));
    CHECK(alpha_hat(rot, 2) == doctest::Approx(rot.tr_a));
    CHECK(alpha_hat(rot, -1) == doctest::Approx(-1.0 / rot.det_a));

    // det=1, theta=pi/2, n=3 -> sin(3pi/2)/sin(pi/2) = -1
    const ModeRotation right = theta_of(builtin(BuiltinScheme::midpoint, 0.0, 1.0), 2.0);
    CHECK(alpha_hat(right, 3) == doctest::Approx(-1.0));
}

TEST_CASE("alpha_hat recursion identity") {
    // resonance-free grid: EM at h=1 puts theta exactly at pi/4 where the
    // closed form hits sin(n theta) = 0 with catastrophic cancellation
    for (const char* name : {"euler_maruyama", "backward_euler", "midpoint"}) {
        const SchemeDef s = builtin(name, 0.3, 1.1);
        for (double h : {0.05, 0.15, 0.4, 0.75, 0.9}) {
            const ModeRotation rot = theta_of(s, h);
            for (std::int64_t n = 1; n <= 1000; ++n) {
                const double lhs = alpha_hat(rot, n + 1);
                const double rhs = rot.tr_a * alpha_hat(rot, n) - rot.det_a * alpha_hat(rot, n - 1);
                CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(lhs)));
            }
        }
    }
}

TEST_CASE("trig-sum identities") {
    const double pi = std::numbers::pi;
    for (double theta : {0.3, pi / 4, pi / 2, 2.8}) {
        for (std::int64_t n : {2, 17, 1000}) {
            double direct_sin = 0.0, direct_cos = 0.0;
            for (std::int64_t j = 0; j < n; ++j) {
                direct_sin += std::sin(2.0 * double(j) * theta);
                direct_cos += std::cos(2.0 * double(j) * theta);
            }
            CHECK(std::abs(direct_sin - sum_sin2j(theta, n)) < 1e-9);
            CHECK(std::abs(direct_cos - sum_cos2j(theta, n)) < 1e-9);
        }
    }
}

TEST_CASE("symplectic alpha_hat sum identities") {
    const double pi = std::numbers::pi;
    for (double theta : {0.3, pi / 4, pi / 2, 2.8}) {
        for (std::int64_t n : {2, 17, 1000}) {
            // det = 1: alpha_hat_j = sin(j theta)/sin(theta)
            const auto ah = [theta](std::int64_t j) {
                return std::sin(double(j) * theta) / std::sin(theta);
            };
            double sq = 0.0;
            for (std::int64_t j = 0; j <= n - 2; ++j) sq += ah(j) * ah(j);
            double cross = 0.0;
            for (std::int64_t j = 1; j <= n - 1; ++j) cross += 2.0 * ah(j) * ah(j - 1);
            CHECK(std::abs(sq - sum_alpha_hat_sq(theta, n)) <= 1e-9 * std::max(1.0, std::abs(sq)));
            CHECK(std::abs(cross - sum_alpha_hat_cross(theta, n)) <=
                  1e-9 * std::max(1.0, std::abs(cross)));
        }
    }
}

TEST_CASE("compact coefficient endpoints") {
    const ModelSpec model = osc_with_initial(0.7, -0.4);
    for (const char* name : {"euler_maruyama", "backward_euler", "midpoint"}) {
        const SchemeDef s = builtin(name, 0.3, 1.1);
        const double tau = 0.25;
        const SchemeCoeffs c = s.coeffs(tau);
        const CompactCoeffs cc = compact_coeffs(s, model, 1, tau, 12);
        // the most recent increment enters with the raw b
        CHECK(cc.x_coeff.back() == doctest::Approx(c.b1).epsilon(1e-12));
        CHECK(cc.y_coeff.back() == doctest::Approx(c.b2).epsilon(1e-12));
    }
}

TEST_CASE("compact coefficients at theta = pi/2") {
    // midpoint at h=2 has tr=0, so theta=pi/2 and alpha_hat_0 = 0: the oldest
    // increment of a two-step window enters with weight a11 b1 + a12 b2
    const SchemeDef s = builtin(BuiltinScheme::midpoint, 0.3, 1.1);
    const SchemeCoeffs c = s.coeffs(2.0);
    const CompactCoeffs cc = compact_coeffs(s, kOsc, 1, 2.0, 2);
    CHECK(cc.x_coeff[0] == doctest::Approx(c.a11 * c.b1 + c.a12 * c.b2).epsilon(1e-13));
    CHECK(cc.x_coeff[1] == doctest::Approx(c.b1).epsilon(1e-13));
}

TEST_CASE("one-step compact equals the scheme map") {
    const ModelSpec model = osc_with_initial(0.7, -0.4);
    const SchemeDef s = builtin(BuiltinScheme::midpoint, 0.3, 1.1);
    const double tau = 0.4;
    const SchemeCoeffs c = s.coeffs(tau);
    const std::vector<double> inc = {0.83};
    const auto [x, y] = compact_reconstruct(compact_coeffs(s, model, 1, tau, 1), 1.0, inc);
    CHECK(x == doctest::Approx(c.a11 * 0.7 + c.a12 * -0.4 + c.b1 * 0.83));
    CHECK(y == doctest::Approx(c.a21 * 0.7 + c.a22 * -0.4 + c.b2 * 0.83));
}

TEST_CASE("zero noise leaves the midpoint state on its circle") {
    const ModelSpec model = osc_with_initial(0.6, 0.8);
    const SchemeDef s = builtin(BuiltinScheme::midpoint, 0.0, 1.0);
    const std::vector<double> inc(200, 0.0);
    const auto [x, y] = iterate_reference(s, model, 1, 0.3, inc);
    CHECK(x * x + y * y == doctest::Approx(1.0).epsilon(1e-12));

    const SchemeDef zero_noise = builtin(BuiltinScheme::midpoint, 0.0, 0.0);
    const auto cc = compact_coeffs(zero_noise, model, 1, 0.3, 50);
    for (double v : cc.x_coeff) CHECK(v == 0.0);
    for (double v : cc.y_coeff) CHECK(v == 0.0);
}

TEST_CASE("compact reconstruction matches iteration") {
    const ModelSpec model = osc_with_initial(0.7, -0.4);
    int case_id = 0;
    for (const char* name : {"euler_maruyama", "backward_euler", "midpoint"}) {
        const SchemeDef s = builtin(name, 0.3, 1.1);
        for (double tau : {0.5, 0.1, 0.01}) {
            const std::int64_t n = 1000;
            const auto inc = gaussian_increments(n, tau, 1234 + case_id++);
            const auto [xi, yi] = iterate_reference(s, model, 1, tau, inc);
            const auto [xc, yc] = compact_reconstruct(compact_coeffs(s, model, 1, tau, n), 1.0, inc);
            CHECK(std::abs(xc - xi) <= 1e-10 * std::max(1.0, std::abs(xi)));
            CHECK(std::abs(yc - yi) <= 1e-10 * std::max(1.0, std::abs(yi)));
        }
    }
}

TEST_CASE("streamed reconstruction agrees with the materialised one") {
    const ModelSpec model = osc_with_initial(0.7, -0.4);
    const SchemeDef s = builtin(BuiltinScheme::backward_euler, 0.3, 1.1);
    const double tau = 0.2;
    const std::int64_t n = 300;
    const auto inc = gaussian_increments(n, tau, 99);
    const auto a = compact_reconstruct(compact_coeffs(s, model, 1, tau, n), 1.0, inc);
    const auto b = compact_reconstruct_streamed(s, model, 1, tau, n,
                                                [&inc](std::int64_t j) { return inc[j]; });
    CHECK(a.first == doctest::Approx(b.first).epsilon(1e-13));
    CHECK(a.second == doctest::Approx(b.second).epsilon(1e-13));
}

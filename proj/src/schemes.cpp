#include "lilshs/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "lilshs/lilstat.hpp"

namespace lilshs {

SchemeDef builtin(BuiltinScheme name, double alpha1, double alpha2) {
    switch (name) {
        case BuiltinScheme::euler_maruyama:
            return {"euler_maruyama",
                    [alpha1, alpha2](double h) {
                        return SchemeCoeffs{1.0, h, -h, 1.0, alpha1, alpha2};
                    },
                    false};
        case BuiltinScheme::backward_euler:
            return {"backward_euler",
                    [alpha1, alpha2](double h) {
                        const double d = 1.0 + h * h;
                        return SchemeCoeffs{1.0 / d,  h / d, -h / d, 1.0 / d,
                                            (alpha1 + h * alpha2) / d,
                                            (alpha2 - h * alpha1) / d};
                    },
                    false};
        case BuiltinScheme::midpoint:
            return {"midpoint",
                    [alpha1, alpha2](double h) {
                        const double d = 1.0 + h * h / 4.0;
                        const double a = (1.0 - h * h / 4.0) / d;
                        return SchemeCoeffs{a, h / d, -h / d, a,
                                            (alpha1 + h * alpha2 / 2.0) / d,
                                            (alpha2 - h * alpha1 / 2.0) / d};
                    },
                    true};
    }
    throw ConfigError("unknown builtin scheme");
}

SchemeDef builtin(const std::string& name, double alpha1, double alpha2) {
    if (name == "euler_maruyama") return builtin(BuiltinScheme::euler_maruyama, alpha1, alpha2);
    if (name == "backward_euler") return builtin(BuiltinScheme::backward_euler, alpha1, alpha2);
    if (name == "midpoint") return builtin(BuiltinScheme::midpoint, alpha1, alpha2);
    throw ConfigError("unknown scheme: " + name);
}

SchemeDef builtin_for(BuiltinScheme name, const ModelSpec& model) {
    return builtin(name, model.alpha1, model.alpha2);
}

std::vector<std::string> builtin_names() {
    return {"euler_maruyama", "backward_euler", "midpoint"};
}

SchemeTraits classify(const SchemeCoeffs& coeffs, double tol) {
    SchemeTraits traits;
    traits.det_a = coeffs.det();
    traits.tr_a = coeffs.tr();
    traits.admissible = 4.0 * traits.det_a - traits.tr_a * traits.tr_a > 0.0;
    const double gap = std::abs(traits.det_a - 1.0);
    traits.symplectic = gap <= tol * std::max(1.0, std::abs(traits.det_a));
    if (traits.symplectic)
        traits.det_class = DetClass::unit;
    else
        traits.det_class = traits.det_a < 1.0 ? DetClass::contractive : DetClass::expansive;
    return traits;
}

SchemeTraits classify(const SchemeDef& scheme, double h, double tol) {
    if (!(h > 0.0)) throw InadmissibleError("classify: h must be positive");
    return classify(scheme.coeffs(h), tol);
}

OrderReport check_convergence_order(const SchemeDef& scheme, const ModelSpec& model,
                                    std::span<const double> taus) {
    if (taus.size() < 2) throw ConfigError("check_convergence_order: need at least two tau values");
    for (std::size_t i = 0; i + 1 < taus.size(); ++i)
        if (!(taus[i] > taus[i + 1]))
            throw ConfigError("check_convergence_order: taus must be positive decreasing");

    const double lambda1 = model.lambda.at(0);
    OrderReport report;
    double scale_a = 0.0, scale_b = 0.0;
    for (double tau : taus) {
        const double h = lambda1 * tau;
        const SchemeCoeffs c = scheme.coeffs(h);
        if (!(4.0 * c.det() - c.tr() * c.tr() > 0.0))
            throw InadmissibleError("check_convergence_order: scheme inadmissible at h = " +
                                    std::to_string(h));
        OrderRow row;
        row.tau = tau;
        row.h = h;
        row.residual_a = std::abs(c.a11 - 1.0) + std::abs(c.a22 - 1.0) +
                         std::abs(c.a12 - tau) + std::abs(c.a21 + tau);
        row.residual_b = std::abs(c.b1 - model.alpha1) + std::abs(c.b2 - model.alpha2);
        scale_a = std::max({scale_a, std::abs(c.a11), std::abs(c.a12), 1.0});
        scale_b = std::max({scale_b, std::abs(model.alpha1), std::abs(model.alpha2), 1.0});
        report.rows.push_back(row);
    }

    const double floor_a = 64.0 * std::numeric_limits<double>::epsilon() * scale_a;
    const double floor_b = 64.0 * std::numeric_limits<double>::epsilon() * scale_b;
    const auto fit_slope = [&](auto residual_of, double floor_val, bool& exact) {
        std::vector<double> lx, ly;
        for (const OrderRow& row : report.rows) {
            const double r = residual_of(row);
            if (r > floor_val) {
                lx.push_back(std::log(row.tau));
                ly.push_back(std::log(r));
            }
        }
        exact = lx.empty();
        if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
        return fit_line(lx, ly).slope;
    };

    report.slope_a = fit_slope([](const OrderRow& r) { return r.residual_a; }, floor_a,
                               report.exact_a);
    report.slope_b = fit_slope([](const OrderRow& r) { return r.residual_b; }, floor_b,
                               report.exact_b);
    report.pass_a = report.exact_a || report.slope_a >= 2.0 - 0.2;
    report.pass_b = report.exact_b || report.slope_b >= 1.0 - 0.2;
    return report;
}

SchemeDef load_scheme_table(const std::string& path, bool interpolate) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scheme table: " + path);

    struct Row {
        double h;
        SchemeCoeffs c;
    };
    auto rows = std::make_shared<std::vector<Row>>();
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        Row row;
        if (!(ls >> row.h)) continue;  // blank/comment line
        if (!(ls >> row.c.a11 >> row.c.a12 >> row.c.a21 >> row.c.a22 >> row.c.b1 >> row.c.b2))
            throw ConfigError("scheme table: malformed row in " + path);
        if (!(row.h > 0.0)) throw ConfigError("scheme table: h must be positive");
        rows->push_back(row);
    }
    if (rows->empty()) throw ConfigError("scheme table: no rows in " + path);
    std::sort(rows->begin(), rows->end(), [](const Row& a, const Row& b) { return a.h < b.h; });

    std::string name = "table:" + path;
    return {name,
            [rows, interpolate, path](double h) -> SchemeCoeffs {
                const auto match = [h](const Row& r) {
                    return std::abs(r.h - h) <= 1e-12 * std::max(1.0, std::abs(h));
                };
                auto lo = std::lower_bound(rows->begin(), rows->end(), h,
                                           [](const Row& r, double v) { return r.h < v; });
                if (lo != rows->end() && match(*lo)) return lo->c;
                if (lo != rows->begin() && match(*std::prev(lo))) return std::prev(lo)->c;
                if (!interpolate)
                    throw ConfigError("scheme table " + path + ": no row for h (exact match required)");
                if (lo == rows->begin() || lo == rows->end())
                    throw ConfigError("scheme table " + path + ": h outside tabulated range");
                const Row& a = *std::prev(lo);
                const Row& b = *lo;
                const double w = (h - a.h) / (b.h - a.h);
                const auto lerp = [w](double u, double v) { return u + w * (v - u); };
                return SchemeCoeffs{lerp(a.c.a11, b.c.a11), lerp(a.c.a12, b.c.a12),
                                    lerp(a.c.a21, b.c.a21), lerp(a.c.a22, b.c.a22),
                                    lerp(a.c.b1, b.c.b1),   lerp(a.c.b2, b.c.b2)};
            },
            std::nullopt};
}

}  // namespace lilshs

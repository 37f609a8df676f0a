#include "lilshs/constants.hpp"

#include <algorithm>
#include <cmath>

namespace lilshs {

XiTriple xi_constants(const SchemeCoeffs& c, const ModeRotation& rot) {
    const double s2 = rot.sin_theta * rot.sin_theta;
    const double cth = rot.cos_theta;
    const double cx = c.a11 * c.b1 + c.a12 * c.b2;
    const double cy = c.a21 * c.b1 - c.a11 * c.b2;
    XiTriple xi;
    xi.xi1 = (c.b1 * c.b1 + cx * cx - 2.0 * c.b1 * cx * cth) / s2;
    xi.xi2 = (c.b2 * c.b2 + cy * cy + 2.0 * c.b2 * cy * cth) / s2;
    const double cos2 = 2.0 * cth * cth - 1.0;  // cos(2 theta)
    xi.xi3 = (-c.b1 * c.b2 * cos2 + (c.b2 * cx - c.b1 * cy) * cth + cx * cy) / s2;
    return xi;
}

XiTriple xi_constants(const SchemeDef& scheme, double h) {
    if (!(h > 0.0)) throw InadmissibleError("xi_constants: h must be positive");
    const SchemeCoeffs c = scheme.coeffs(h);
    return xi_constants(c, rotation_of(c, h));
}

PhiForm phi_form(const SchemeDef& scheme, const ModelSpec& model, double tau) {
    PhiForm form;
    form.blocks.reserve(static_cast<std::size_t>(model.num_modes));
    for (int k = 1; k <= model.num_modes; ++k) {
        const double h = model.lambda[k - 1] * tau;
        form.blocks.push_back({xi_constants(scheme, h), model.eta[k - 1]});
    }
    return form;
}

double phi_value(const PhiForm& form, std::span<const std::array<double, 2>> rho) {
    if (rho.size() != form.blocks.size())
        throw ConfigError("phi_value: rho must supply one (rho1, rho2) pair per block");
    double total = 0.0;
    for (std::size_t k = 0; k < form.blocks.size(); ++k) {
        const auto& b = form.blocks[k];
        const double r1 = rho[k][0], r2 = rho[k][1];
        total += (b.xi.xi1 * r1 * r1 + b.xi.xi2 * r2 * r2 + b.xi.xi3 * r1 * r2) * b.eta;
    }
    return total;
}

namespace {

// Largest eigenvalue and unit eigenvector of [[p, r], [r, q]].
void eig2_max(double p, double q, double r, double& value, double& v1, double& v2) {
    const double mean = 0.5 * (p + q);
    const double diff = 0.5 * (p - q);
    const double rad = std::hypot(diff, r);
    value = mean + rad;
    if (rad == 0.0) {  // isotropic block
        v1 = 1.0;
        v2 = 0.0;
        return;
    }
    // pick the eigenvector expression with the better-conditioned denominator
    if (diff >= 0.0) {
        v1 = diff + rad;
        v2 = r;
    } else {
        v1 = r;
        v2 = rad - diff;
    }
    const double norm = std::hypot(v1, v2);
    v1 /= norm;
    v2 /= norm;
}

}  // namespace

SupPhi sup_phi(const PhiForm& form) {
    if (form.blocks.empty()) throw ConfigError("sup_phi: empty form");
    SupPhi out;
    out.argmax.assign(form.blocks.size(), {0.0, 0.0});
    double best = -1.0;
    double best_v1 = 1.0, best_v2 = 0.0;
    int best_k = 0;
    for (std::size_t k = 0; k < form.blocks.size(); ++k) {
        const auto& b = form.blocks[k];
        double value, v1, v2;
        eig2_max(b.xi.xi1, b.xi.xi2, 0.5 * b.xi.xi3, value, v1, v2);
        const double scaled = value * b.eta;
        if (scaled > best) {  // strict: ties keep the lowest mode index
            best = scaled;
            best_k = static_cast<int>(k);
            best_v1 = v1;
            best_v2 = v2;
        }
    }
    out.value = std::sqrt(std::max(0.0, best));
    out.argmax_mode = best_k + 1;
    out.argmax[best_k] = {best_v1, best_v2};
    return out;
}

ContinuousQv continuous_qv(double t, double lambda, double eta) {
    if (!(lambda > 0.0)) throw ConfigError("continuous_qv: lambda must be positive");
    if (t < 0.0) throw ConfigError("continuous_qv: t must be non-negative");
    const double osc = eta * std::sin(2.0 * t * lambda) / (4.0 * lambda);
    return {t * eta / 2.0 + osc, t * eta / 2.0 - osc};
}

DiscreteQv discrete_qv(const SchemeDef& scheme, double h, double eta, std::int64_t n,
                       double tau) {
    if (n < 1) throw ConfigError("discrete_qv: n must be >= 1");
    if (!(tau > 0.0)) throw ConfigError("discrete_qv: tau must be positive");
    const SchemeCoeffs c = scheme.coeffs(h);
    const ModeRotation rot = rotation_of(c, h);
    const XiTriple xi = xi_constants(c, rot);
    const double s = rot.sin_theta;
    const double cth = rot.cos_theta;
    const double cos2 = 2.0 * cth * cth - 1.0;
    const double cx = c.a11 * c.b1 + c.a12 * c.b2;
    const double cy = c.a21 * c.b1 - c.a11 * c.b2;
    const double tn = double(n) * tau;

    const double wave = std::sin(double(2 * n - 1) * rot.theta);
    const double cwave = std::cos(double(2 * n - 1) * rot.theta);
    const double k1 =
        (wave / s + 1.0) * (c.b1 * c.b1 * cos2 + cx * cx - 2.0 * c.b1 * cx * cth) * tau /
            (4.0 * s * s) +
        (-c.b1 * cth + cx) * c.b1 * s * ((cth - cwave) / (2.0 * s)) * tau / (s * s);
    const double k2 =
        (wave / s + 1.0) * (c.b2 * c.b2 * cos2 + cy * cy + 2.0 * c.b2 * cy * cth) * tau /
            (4.0 * s * s) +
        (c.b2 * cth + cy) * c.b2 * s * ((cth - cwave) / (2.0 * s)) * tau / (s * s);

    DiscreteQv qv;
    qv.k1 = k1;
    qv.k2 = k2;
    qv.k1_bound = (1.0 / s + 1.0) *
                      (c.b1 * c.b1 + cx * cx + 2.0 * std::abs(c.b1 * cx)) * tau / (4.0 * s * s) +
                  std::abs((-c.b1 * cth + cx) * c.b1) * tau / (s * s);
    qv.k2_bound = (1.0 / s + 1.0) *
                      (c.b2 * c.b2 + cy * cy + 2.0 * std::abs(c.b2 * cy)) * tau / (4.0 * s * s) +
                  std::abs((c.b2 * cth + cy) * c.b2) * tau / (s * s);
    qv.m1 = eta * (xi.xi1 / 2.0 * tn + k1);
    qv.m2 = eta * (xi.xi1 / 2.0 * tn - k1);
    qv.m3 = eta * (xi.xi2 / 2.0 * tn + k2);
    qv.m4 = eta * (xi.xi2 / 2.0 * tn - k2);
    return qv;
}

DiscreteQv discrete_qv(const SchemeDef& scheme, double h, double eta, std::int64_t n) {
    return discrete_qv(scheme, h, eta, n, h);
}

PreservationReport preservation_limit(const SchemeDef& scheme, const ModelSpec& model,
                                      std::span<const double> tau_seq,
                                      std::span<const int> m_seq) {
    if (tau_seq.empty()) throw ConfigError("preservation_limit: empty tau sequence");
    for (std::size_t i = 0; i + 1 < tau_seq.size(); ++i)
        if (!(tau_seq[i] > tau_seq[i + 1]))
            throw ConfigError("preservation_limit: taus must be decreasing");

    for (double tau : tau_seq)
        for (int k = 1; k <= model.num_modes; ++k) {
            const SchemeTraits traits = classify(scheme, model.lambda[k - 1] * tau);
            if (!traits.admissible)
                throw InadmissibleError("preservation_limit: inadmissible h encountered");
            if (!traits.symplectic)
                throw InadmissibleError(
                    "preservation_limit: scheme is not symplectic; the limit statement is vacuous");
        }
    {
        // Assumption on convergence of the coefficients, checked on the tau grid.
        std::vector<double> taus(tau_seq.begin(), tau_seq.end());
        const OrderReport order = check_convergence_order(scheme, model, taus);
        if (!order.pass())
            throw ConfigError("preservation_limit: scheme fails the convergence-order residual check");
    }

    PreservationReport report;
    report.exact_constant = exact_lil_constant(model);

    const auto row_for = [&](double tau, int num_modes) {
        PreservationRow row;
        row.tau = tau;
        row.num_modes = num_modes;
        ModelSpec truncated = model;
        truncated.num_modes = std::min(num_modes, model.stored_modes());
        const PhiForm form = phi_form(scheme, truncated, tau);
        for (int k = 0; k < truncated.num_modes; ++k) {
            const auto& b = form.blocks[k];
            row.max_xi1_eta = std::max(row.max_xi1_eta, std::sqrt(b.xi.xi1 * b.eta));
            row.max_xi2_eta = std::max(row.max_xi2_eta, std::sqrt(b.xi.xi2 * b.eta));
            row.max_abs_xi3 = std::max(row.max_abs_xi3, std::abs(b.xi.xi3));
        }
        row.sup_phi_value = sup_phi(form).value;
        row.gap_x = std::abs(row.max_xi1_eta - report.exact_constant);
        row.gap_y = std::abs(row.max_xi2_eta - report.exact_constant);
        row.gap_joint = std::abs(row.sup_phi_value - report.exact_constant);
        return row;
    };

    for (double tau : tau_seq) report.tau_rows.push_back(row_for(tau, model.num_modes));
    const double finest = tau_seq.back();
    for (int m : m_seq) report.m_rows.push_back(row_for(finest, m));

    const auto monotone = [&](auto gap_of) {
        for (std::size_t i = 0; i + 1 < report.tau_rows.size(); ++i)
            if (!(gap_of(report.tau_rows[i + 1]) < gap_of(report.tau_rows[i]))) return false;
        return true;
    };
    report.monotone_x = monotone([](const PreservationRow& r) { return r.gap_x; });
    report.monotone_y = monotone([](const PreservationRow& r) { return r.gap_y; });
    report.monotone_joint = monotone([](const PreservationRow& r) { return r.gap_joint; });
    return report;
}

}  // namespace lilshs

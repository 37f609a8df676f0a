#include "lilshs/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace lilshs {

namespace {

double sum_kahan(const std::vector<double>& v) {
    double sum = 0.0, carry = 0.0;
    for (double x : v) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace

double ModelSpec::sup_eta() const {
    double best = 0.0;
    for (double e : eta) best = std::max(best, e);
    return best;
}

void ModelSpec::validate(double trace_cap) const {
    if (num_modes < 1) throw ConfigError("model: M must be >= 1");
    const auto m = static_cast<std::size_t>(num_modes);
    if (lambda.size() < m || eta.size() < m || x0.size() < m || y0.size() < m)
        throw ConfigError("model: all sequences must have length >= M");
    if (lambda.empty() || !(lambda.front() > 0.0))
        throw ConfigError("model: lambda[0] must be positive");
    for (std::size_t i = 0; i + 1 < lambda.size(); ++i)
        if (lambda[i + 1] < lambda[i])
            throw ConfigError("model: lambda must be non-decreasing");
    for (double l : lambda)
        if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("model: lambda entries must be positive");
    for (double e : eta)
        if (e < 0.0 || !std::isfinite(e)) throw ConfigError("model: eta entries must be non-negative");
    const double tr = sum_kahan(eta);
    if (!(tr <= trace_cap))
        throw ConfigError("model: trace of Q over stored modes exceeds the configured cap (divergent trace?)");
    if (std::abs(tr - trace_q) > 1e-12 * std::max(1.0, tr))
        throw ConfigError("model: trace_q does not match the stored eta sequence");
}

Preset make_preset(const std::string& name) {
    if (name == "oscillator") return {PresetKind::oscillator, {}};
    if (name == "schrodinger") return {PresetKind::schrodinger, {}};
    throw ConfigError("unknown preset: " + name);
}

namespace {

ModelSpec finalize(ModelSpec model, double trace_cap) {
    model.trace_q = sum_kahan(model.eta);
    model.validate(trace_cap);
    return model;
}

}  // namespace

ModelSpec build_model(const Preset& preset, const std::map<std::string, double>& overrides) {
    std::map<std::string, double> p = preset.parameters;
    for (const auto& [key, value] : overrides) p[key] = value;

    const auto take = [&p](const std::string& key, double fallback) {
        auto it = p.find(key);
        if (it == p.end()) return fallback;
        const double v = it->second;
        p.erase(it);
        return v;
    };

    const double alpha = take("alpha", 1.0);
    const double trace_cap = take("trace_cap", ModelSpec::kDefaultTraceCap);
    const double x0 = take("x0", 0.0);
    const double y0 = take("y0", 0.0);

    ModelSpec model;
    model.alpha1 = 0.0;
    model.alpha2 = alpha;

    if (preset.kind == PresetKind::oscillator) {
        if (!(alpha > 0.0)) throw ConfigError("oscillator preset requires alpha > 0");
        const double m_req = take("M", 1.0);
        if (m_req != 1.0) throw ConfigError("oscillator preset is one-dimensional (M = 1)");
        model.num_modes = 1;
        model.lambda = {1.0};
        model.eta = {1.0};
        model.x0 = {x0};
        model.y0 = {y0};
    } else {
        if (!(alpha > 0.0)) throw ConfigError("schrodinger preset requires alpha > 0");
        const int m = static_cast<int>(take("M", 4.0));
        const double eta_p = take("eta_p", 2.0);
        if (m < 1) throw ConfigError("schrodinger preset: M must be >= 1");
        model.num_modes = m;
        for (int k = 1; k <= m; ++k) {
            model.lambda.push_back(double(k) * double(k));
            model.eta.push_back(std::pow(double(k), -eta_p));
        }
        model.x0.assign(m, x0);
        model.y0.assign(m, y0);
    }

    if (!p.empty()) throw ConfigError("unknown model parameter: " + p.begin()->first);
    return finalize(std::move(model), trace_cap);
}

double exact_lil_constant(const ModelSpec& model) {
    return std::sqrt(model.alpha1 * model.alpha1 + model.alpha2 * model.alpha2) *
           std::sqrt(model.sup_eta());
}

namespace {

using nlohmann::json;

std::vector<double> sequence_field(const json& j, const std::string& key, int m,
                                   const std::vector<double>& fallback) {
    if (!j.contains(key)) return fallback;
    const json& f = j.at(key);
    if (f.is_array()) return f.get<std::vector<double>>();
    if (f.is_object() && f.contains("rule")) {
        const std::string rule = f.at("rule").get<std::string>();
        std::vector<double> out;
        out.reserve(m);
        if (rule == "k^2") {
            for (int k = 1; k <= m; ++k) out.push_back(double(k) * double(k));
        } else if (rule == "k^-p") {
            const double p = f.at("p").get<double>();
            for (int k = 1; k <= m; ++k) out.push_back(std::pow(double(k), -p));
        } else {
            throw ConfigError("model json: unknown generator rule '" + rule + "' for " + key);
        }
        return out;
    }
    throw ConfigError("model json: " + key + " must be an array or a {\"rule\":...} record");
}

}  // namespace

ModelSpec parse_model_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model json: ") + e.what());
    }

    ModelSpec base;
    bool have_preset = false;
    if (j.contains("preset")) {
        have_preset = true;
        Preset preset = make_preset(j.at("preset").get<std::string>());
        std::map<std::string, double> overrides;
        if (j.contains("alpha") && j.at("alpha").is_number())
            overrides["alpha"] = j.at("alpha").get<double>();
        if (j.contains("M")) overrides["M"] = j.at("M").get<double>();
        if (j.contains("eta_p")) overrides["eta_p"] = j.at("eta_p").get<double>();
        base = build_model(preset, overrides);
    }

    ModelSpec model = base;
    if (j.contains("M")) model.num_modes = j.at("M").get<int>();
    if (model.num_modes < 1) throw ConfigError("model json: M must be >= 1");
    const int m = model.num_modes;

    if (j.contains("alpha") && j.at("alpha").is_array()) {
        const auto a = j.at("alpha").get<std::vector<double>>();
        if (a.size() != 2) throw ConfigError("model json: alpha must be [alpha1, alpha2]");
        model.alpha1 = a[0];
        model.alpha2 = a[1];
    }

    model.lambda = sequence_field(j, "lambda", m, model.lambda);
    model.eta = sequence_field(j, "eta", m, model.eta);
    model.x0 = sequence_field(j, "x0", m, model.x0);
    model.y0 = sequence_field(j, "y0", m, model.y0);

    if (!have_preset) {
        if (model.lambda.empty()) throw ConfigError("model json: lambda is required without a preset");
        if (model.eta.empty()) model.eta.assign(model.lambda.size(), 1.0);
    }
    if (model.x0.empty()) model.x0.assign(model.lambda.size(), 0.0);
    if (model.y0.empty()) model.y0.assign(model.lambda.size(), 0.0);

    const double trace_cap =
        j.contains("trace_cap") ? j.at("trace_cap").get<double>() : ModelSpec::kDefaultTraceCap;
    return finalize(std::move(model), trace_cap);
}

ModelSpec load_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_json(buf.str());
}

}  // namespace lilshs

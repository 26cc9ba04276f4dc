#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lagreg/experiments.hpp"
#include "lagreg/model.hpp"

namespace lagreg {

// Configuration problem: bad syntax, unknown key, failed validation.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}

// Flat key = value configuration text. One pair per line; '#' starts a
// comment; lists are comma-separated. Getters record which keys were read so
// unknown keys can be rejected per command.
class Config {
public:
    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config c;
        c.origin_ = origin;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string stripped = detail::trim(line);
            if (stripped.empty()) continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value', got \"" + stripped + "\"");
            const std::string key = detail::trim(stripped.substr(0, eq));
            const std::string value = detail::trim(stripped.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (c.kv_.count(key))
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                                  key + "' (first at line " +
                                  std::to_string(c.kv_[key].line) + ")");
            c.kv_[key] = Entry{value, lineno};
        }
        return c;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config file not found: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str(), path);
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string where(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return origin_;
        return origin_ + ":" + std::to_string(it->second.line);
    }

    std::string get_string(const std::string& key, const std::string& dflt) const {
        auto it = kv_.find(key);
        used_.insert(key);
        return it == kv_.end() ? dflt : it->second.value;
    }

    std::string require_string(const std::string& key) const {
        auto it = kv_.find(key);
        used_.insert(key);
        if (it == kv_.end())
            throw ConfigError(origin_ + ": missing required key '" + key + "'");
        return it->second.value;
    }

    double get_double(const std::string& key, double dflt) const {
        if (!has(key)) {
            used_.insert(key);
            return dflt;
        }
        return parse_double(key, kv_.at(key).value);
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
        if (!has(key)) {
            used_.insert(key);
            return dflt;
        }
        used_.insert(key);
        const std::string& v = kv_.at(key).value;
        try {
            // stoull would wrap "-4" instead of rejecting it.
            if (v.find('-') != std::string::npos) throw std::invalid_argument(v);
            std::size_t pos = 0;
            const std::uint64_t r = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw ConfigError(where(key) + ": key '" + key +
                              "': expected an unsigned integer, got \"" + v + "\"");
        }
    }

    int get_int(const std::string& key, int dflt) const {
        const std::uint64_t r = get_u64(key, static_cast<std::uint64_t>(dflt));
        if (r > 0x7fffffffULL)
            throw ConfigError(where(key) + ": key '" + key + "': value out of range");
        return static_cast<int>(r);
    }

    bool get_bool(const std::string& key, bool dflt) const {
        if (!has(key)) {
            used_.insert(key);
            return dflt;
        }
        used_.insert(key);
        std::string v = kv_.at(key).value;
        std::transform(v.begin(), v.end(), v.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError(where(key) + ": key '" + key + "': expected a boolean, got \"" +
                          kv_.at(key).value + "\"");
    }

    std::vector<std::size_t> require_size_list(const std::string& key) const {
        const std::string v = require_string(key);
        std::vector<std::size_t> out;
        for (const std::string& item : split_list(key, v)) {
            try {
                if (item.find('-') != std::string::npos) throw std::invalid_argument(item);
                std::size_t pos = 0;
                const unsigned long long r = std::stoull(item, &pos);
                if (pos != item.size()) throw std::invalid_argument(item);
                out.push_back(static_cast<std::size_t>(r));
            } catch (const std::exception&) {
                throw ConfigError(where(key) + ": key '" + key +
                                  "': expected a list of integers, got \"" + v + "\"");
            }
        }
        return out;
    }

    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& dflt) const {
        if (!has(key)) {
            used_.insert(key);
            return dflt;
        }
        const std::string v = get_string(key, "");
        std::vector<double> out;
        for (const std::string& item : split_list(key, v))
            out.push_back(parse_double_raw(key, item));
        return out;
    }

    // Rejects any key no getter has touched; call once per command after all
    // reads, so typos surface instead of being silently ignored.
    void reject_unknown_keys() const {
        for (const auto& [key, entry] : kv_)
            if (!used_.count(key))
                throw ConfigError(origin_ + ":" + std::to_string(entry.line) +
                                  ": unknown key '" + key + "'");
    }

private:
    struct Entry {
        std::string value;
        int line = 0;
    };

    double parse_double(const std::string& key, const std::string& v) const {
        used_.insert(key);
        return parse_double_raw(key, v);
    }

    double parse_double_raw(const std::string& key, const std::string& v) const {
        try {
            std::size_t pos = 0;
            const double r = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw ConfigError(where(key) + ": key '" + key + "': expected a number, got \"" +
                              v + "\"");
        }
    }

    std::vector<std::string> split_list(const std::string& key, const std::string& v) const {
        std::vector<std::string> parts;
        std::string cur;
        std::istringstream in(v);
        while (std::getline(in, cur, ',')) {
            cur = detail::trim(cur);
            if (cur.empty())
                throw ConfigError(where(key) + ": key '" + key + "': empty list element");
            parts.push_back(cur);
        }
        if (parts.empty())
            throw ConfigError(where(key) + ": key '" + key + "': empty list");
        return parts;
    }

    std::map<std::string, Entry> kv_;
    mutable std::set<std::string> used_;
    std::string origin_;
};

namespace detail {

inline void check_alpha_key(const Config& c, const std::string& key, double v) {
    if (!(v > 0.0) || v > 1.0)
        throw ConfigError(c.where(key) + ": " + key + " must lie in (0,1]");
}

}

// Model portion shared by every command: test function, support, noise
// structure, design density. Documented defaults: b = 1, uniform design,
// phi0-sqrt, i.i.d. noise, sigma = 0.
inline ModelSpec build_model_spec(const Config& c) {
    ModelSpec m;
    m.f_name = c.get_string("function", "phi0-sqrt");
    m.b = c.get_double("b", 1.0);
    if (!(m.b > 0.0)) throw ConfigError(c.where("b") + ": b must be > 0");
    m.sigma = c.get_double("sigma", 0.0);
    if (!(m.sigma >= 0.0)) throw ConfigError(c.where("sigma") + ": sigma must be >= 0");
    m.n = static_cast<std::size_t>(c.get_u64("n", 0));

    const std::string design = c.get_string("design", "uniform");
    if (design == "uniform") {
        m.g.kind = DesignKind::Uniform;
    } else if (design == "trunc-exp") {
        m.g.kind = DesignKind::TruncExp;
        m.g.rate = c.get_double("design_rate", 1.0);
    } else {
        throw ConfigError(c.where("design") + ": design must be 'uniform' or 'trunc-exp'");
    }
    try {
        validate_design(m.g, m.b);
    } catch (const std::exception& e) {
        const std::string key = c.has("design_rate") ? "design_rate" : "design";
        throw ConfigError(c.where(key) + ": " + e.what());
    }
    try {
        test_function(m.f_name, m.b);  // bound checks: catalog membership, stated M_2
    } catch (const std::exception& e) {
        throw ConfigError(c.where("function") + ": " + e.what());
    }

    const std::string noise = c.get_string("noise", "iid");
    if (noise == "iid") {
        m.noise.kind = NoiseKind::IID;
    } else if (noise == "lm") {
        m.noise.kind = NoiseKind::LongMemory;
    } else {
        throw ConfigError(c.where("noise") + ": noise must be 'iid' or 'lm'");
    }
    const double alpha_both = c.get_double("alpha", 1.0);
    m.noise.alpha1 = c.get_double("alpha1", alpha_both);
    m.noise.alpha2 = c.get_double("alpha2", alpha_both);
    detail::check_alpha_key(c, c.has("alpha1") ? "alpha1" : "alpha", m.noise.alpha1);
    detail::check_alpha_key(c, c.has("alpha2") ? "alpha2" : "alpha", m.noise.alpha2);
    m.noise.seed = c.get_u64("seed", 0);
    return m;
}

// Estimator knobs. Documented defaults: gamma = 1, m_cap = 1024, regime
// follows the noise kind, quadrature order 256.
inline EstimatorConfig build_estimator_config(const Config& c, const ModelSpec& model) {
    EstimatorConfig cfg;
    const std::string regime_default =
        model.noise.kind == NoiseKind::LongMemory ? "lm" : "iid";
    const std::string regime = c.get_string("regime", regime_default);
    if (regime == "iid") {
        cfg.regime = Regime::IID;
    } else if (regime == "lm") {
        cfg.regime = Regime::LM;
    } else {
        throw ConfigError(c.where("regime") + ": regime must be 'iid' or 'lm'");
    }
    cfg.gamma = c.get_double("gamma", 1.0);
    if (!(cfg.gamma > 0.0)) throw ConfigError(c.where("gamma") + ": gamma must be > 0");
    cfg.sigma = model.sigma;
    cfg.alpha1 = model.noise.alpha1;
    cfg.alpha2 = model.noise.alpha2;
    cfg.m_cap = c.get_int("m_cap", 1024);
    if (cfg.m_cap < 1) throw ConfigError(c.where("m_cap") + ": m_cap must be >= 1");
    cfg.clamp_nonnegative = c.get_bool("clamp_nonnegative", false);
    cfg.quad_order = c.get_int("quad_order", 256);
    if (cfg.quad_order < 2)
        throw ConfigError(c.where("quad_order") + ": quad_order must be >= 2");
    return cfg;
}

// Study plan for risk-study / variance-study. n_grid and replications are
// required; everything else has documented defaults.
inline StudyPlan build_study_plan(const Config& c) {
    StudyPlan plan;
    plan.model = build_model_spec(c);
    plan.cfg = build_estimator_config(c, plan.model);
    plan.n_grid = c.require_size_list("n_grid");
    if (plan.n_grid.size() < 3)
        throw ConfigError(c.where("n_grid") +
                          ": n_grid needs at least 3 points for the slope fit");
    if (plan.n_grid.front() < 64)
        throw ConfigError(c.where("n_grid") + ": n_grid minimum is 64");
    for (std::size_t i = 1; i < plan.n_grid.size(); ++i)
        if (plan.n_grid[i] <= plan.n_grid[i - 1])
            throw ConfigError(c.where("n_grid") + ": n_grid must be strictly increasing");
    plan.replications = c.get_int("replications", 0);
    if (plan.replications < 30)
        throw ConfigError(c.where("replications") + ": replications must be >= 30");
    plan.master_seed = plan.model.noise.seed;
    plan.smoothness = c.get_double("s", 1.0);
    if (!(plan.smoothness >= 0.5))
        throw ConfigError(c.where("s") + ": s must be >= 1/2");
    plan.oracle_m = c.get_int("oracle_m", 1200);
    plan.oracle_quad_order = c.get_int("oracle_quad_order", 768);
    validate_plan(plan);
    return plan;
}

inline StudyPlan parse_study_plan(const std::string& path) {
    const Config c = Config::parse_file(path);
    StudyPlan plan = build_study_plan(c);
    c.reject_unknown_keys();
    return plan;
}

inline ModelSpec parse_model_spec(const std::string& path) {
    const Config c = Config::parse_file(path);
    ModelSpec m = build_model_spec(c);
    c.reject_unknown_keys();
    return m;
}

}

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lagreg/estimator.hpp"
#include "lagreg/experiments.hpp"
#include "lagreg/version.hpp"

namespace lagreg {

// Filesystem problem: unwritable path, refusal to overwrite.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 17 significant digits: enough to round-trip any double, few enough to be
// byte-stable, so emitted files can serve as golden files.
inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

// Streaming JSON writer with fixed key order and fixed float formatting;
// output bytes depend only on the call sequence.
class JsonWriter {
public:
    void begin_object() {
        item_prefix();
        os_ << "{";
        stack_.push_back(false);
    }

    void begin_object(const std::string& key) {
        key_prefix(key);
        os_ << "{";
        stack_.push_back(false);
    }

    void end_object() {
        const bool had = stack_.back();
        stack_.pop_back();
        if (had) {
            os_ << "\n";
            indent();
        }
        os_ << "}";
        mark_item();
    }

    void begin_array(const std::string& key) {
        key_prefix(key);
        os_ << "[";
        stack_.push_back(false);
    }

    void end_array() {
        const bool had = stack_.back();
        stack_.pop_back();
        if (had) {
            os_ << "\n";
            indent();
        }
        os_ << "]";
        mark_item();
    }

    void kv(const std::string& key, double v) {
        key_prefix(key);
        os_ << (std::isfinite(v) ? format_g17(v) : std::string("null"));
        mark_item();
    }

    void kv(const std::string& key, int v) {
        key_prefix(key);
        os_ << v;
        mark_item();
    }

    void kv(const std::string& key, std::uint64_t v) {
        key_prefix(key);
        os_ << v;
        mark_item();
    }

    void kv(const std::string& key, bool v) {
        key_prefix(key);
        os_ << (v ? "true" : "false");
        mark_item();
    }

    void kv(const std::string& key, const std::string& v) {
        key_prefix(key);
        os_ << '"' << escape(v) << '"';
        mark_item();
    }

    void kv(const std::string& key, const char* v) { kv(key, std::string(v)); }

    void array_value(double v) {
        item_prefix();
        os_ << (std::isfinite(v) ? format_g17(v) : std::string("null"));
        mark_item();
    }

    void array_value(std::uint64_t v) {
        item_prefix();
        os_ << v;
        mark_item();
    }

    std::string str() const { return os_.str() + "\n"; }

private:
    static std::string escape(const std::string& s) {
        std::string out;
        out.reserve(s.size());
        for (char ch : s) {
            switch (ch) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                case '\r': out += "\\r"; break;
                default: out += ch;
            }
        }
        return out;
    }

    void indent() {
        for (std::size_t i = 0; i < stack_.size(); ++i) os_ << "  ";
    }

    void item_prefix() {
        if (stack_.empty()) return;
        if (stack_.back()) os_ << ",";
        os_ << "\n";
        indent();
    }

    void key_prefix(const std::string& key) {
        item_prefix();
        os_ << '"' << escape(key) << "\": ";
    }

    void mark_item() {
        if (!stack_.empty()) stack_.back() = true;
    }

    std::ostringstream os_;
    std::vector<bool> stack_;
};

inline void ensure_writable(const std::string& path, bool overwrite) {
    if (!overwrite && std::filesystem::exists(path))
        throw IoError("refusing to overwrite existing file (pass --overwrite): " + path);
}

inline void write_text_file(const std::string& path, const std::string& content,
                            bool overwrite) {
    ensure_writable(path, overwrite);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

inline void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

inline std::string risk_csv_text(const RiskStudyResult& r) {
    std::ostringstream os;
    os << "n,mean_risk,risk_se,kept_mean\n";
    for (const auto& row : r.per_n)
        os << row.n << ',' << format_g17(row.mean_risk) << ',' << format_g17(row.risk_se)
           << ',' << format_g17(row.mean_kept) << '\n';
    return os.str();
}

inline std::string variance_csv_text(const VarianceStudyResult& r) {
    std::ostringstream os;
    os << "n,var_theta_hat\n";
    for (const auto& row : r.per_n)
        os << row.n << ',' << format_g17(row.var_theta) << '\n';
    return os.str();
}

inline std::string coeffs_csv_text(const ThresholdedEstimate& est) {
    std::ostringstream os;
    os << "l,theta_hat,kept,lambda\n";
    for (int l = 0; l < est.m; ++l)
        os << l << ',' << format_g17(est.raw.theta[l]) << ',' << (est.kept[l] ? 1 : 0)
           << ',' << format_g17(est.lambda[l]) << '\n';
    return os.str();
}

inline std::string sample_csv_text(const RegressionSample& s) {
    std::ostringstream os;
    os << "i,t,y\n";
    for (std::size_t i = 0; i < s.t.size(); ++i)
        os << i << ',' << format_g17(s.t[i]) << ',' << format_g17(s.y[i]) << '\n';
    return os.str();
}

// Fully-resolved model + estimator configuration (defaults expanded), so any
// artifact can be reproduced from its summary alone. The worker-thread count
// is an execution detail, not configuration, and is deliberately absent.
inline void append_model_config(JsonWriter& w, const ModelSpec& m,
                                const EstimatorConfig& cfg) {
    w.kv("function", m.f_name);
    w.kv("b", m.b);
    w.kv("sigma", m.sigma);
    w.kv("design", m.g.kind == DesignKind::Uniform ? "uniform" : "trunc-exp");
    if (m.g.kind == DesignKind::TruncExp) w.kv("design_rate", m.g.rate);
    w.kv("noise", m.noise.kind == NoiseKind::IID ? "iid" : "lm");
    w.kv("alpha1", m.noise.alpha1);
    w.kv("alpha2", m.noise.alpha2);
    w.kv("seed", m.noise.seed);
    w.kv("regime", cfg.regime == Regime::IID ? "iid" : "lm");
    w.kv("gamma", cfg.gamma);
    w.kv("m_cap", cfg.m_cap);
    w.kv("clamp_nonnegative", cfg.clamp_nonnegative);
    w.kv("quad_order", cfg.quad_order);
}

inline void append_plan_config(JsonWriter& w, const StudyPlan& plan) {
    append_model_config(w, plan.model, plan.cfg);
    w.begin_array("n_grid");
    for (std::size_t n : plan.n_grid) w.array_value(static_cast<std::uint64_t>(n));
    w.end_array();
    w.kv("replications", plan.replications);
    w.kv("s", plan.smoothness);
    w.kv("oracle_m", plan.oracle_m);
    w.kv("oracle_quad_order", plan.oracle_quad_order);
}

inline std::string risk_summary_json_text(const RiskStudyResult& r, const StudyPlan& plan) {
    JsonWriter w;
    w.begin_object();
    w.kv("tool_version", version);
    w.kv("command", "risk-study");
    w.kv("slope", r.slope);
    w.kv("slope_se", r.slope_se);
    w.kv("theoretical_exponent", r.theoretical_exponent);
    w.begin_array("per_n");
    for (const auto& row : r.per_n) {
        w.begin_object();
        w.kv("n", row.n);
        w.kv("mean_risk", row.mean_risk);
        w.kv("risk_se", row.risk_se);
        w.kv("kept_mean", row.mean_kept);
        w.end_object();
    }
    w.end_array();
    w.begin_object("config");
    append_plan_config(w, plan);
    w.end_object();
    w.end_object();
    return w.str();
}

inline std::string variance_summary_json_text(const VarianceStudyResult& r,
                                              const StudyPlan& plan) {
    JsonWriter w;
    w.begin_object();
    w.kv("tool_version", version);
    w.kv("command", "variance-study");
    w.kv("coeff_index", r.l);
    w.kv("slope", r.slope);
    w.kv("slope_se", r.slope_se);
    w.kv("theoretical_exponent", r.theoretical_exponent);
    w.begin_array("per_n");
    for (const auto& row : r.per_n) {
        w.begin_object();
        w.kv("n", row.n);
        w.kv("var_theta_hat", row.var_theta);
        w.end_object();
    }
    w.end_array();
    w.begin_object("config");
    append_plan_config(w, plan);
    w.end_object();
    w.end_object();
    return w.str();
}

// Study artifacts: risk.csv (or variance.csv) plus the self-reproducing
// summary.json, under out_dir.
inline void emit_risk_study(const RiskStudyResult& r, const StudyPlan& plan,
                            const std::string& out_dir, bool overwrite) {
    ensure_out_dir(out_dir);
    const std::filesystem::path dir(out_dir);
    write_text_file((dir / "risk.csv").string(), risk_csv_text(r), overwrite);
    write_text_file((dir / "summary.json").string(), risk_summary_json_text(r, plan),
                    overwrite);
}

inline void emit_variance_study(const VarianceStudyResult& r, const StudyPlan& plan,
                                const std::string& out_dir, bool overwrite) {
    ensure_out_dir(out_dir);
    const std::filesystem::path dir(out_dir);
    write_text_file((dir / "variance.csv").string(), variance_csv_text(r), overwrite);
    write_text_file((dir / "summary.json").string(), variance_summary_json_text(r, plan),
                    overwrite);
}

}

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lagreg/basis.hpp"
#include "lagreg/noise.hpp"

namespace lagreg {

enum class DesignKind { Uniform, TruncExp };

// Design density g on [0, b]. Both catalog densities are bounded above and
// away from zero on the support, which is what keeps 1/g(t_i) usable in the
// coefficient estimators.
struct DesignDensity {
    DesignKind kind = DesignKind::Uniform;
    double rate = 1.0;  // TruncExp only

    double pdf(double t, double b) const {
        if (kind == DesignKind::Uniform) return 1.0 / b;
        const double z = 1.0 - std::exp(-rate * b);
        (void)t;
        return rate * std::exp(-rate * t) / z;
    }
};

// Lower/upper bounds of g on [0, b]; both densities are monotone, so the
// bounds sit at the endpoints.
inline std::pair<double, double> design_bounds(const DesignDensity& g, double b) {
    if (g.kind == DesignKind::Uniform) return {1.0 / b, 1.0 / b};
    return {g.pdf(b, b), g.pdf(0.0, b)};
}

// Minimum admissible density lower bound; below this 1/g amplifies single
// observations beyond anything the thresholding rules can absorb.
inline constexpr double design_min_lower_bound = 1e-8;

inline void validate_design(const DesignDensity& g, double b) {
    if (!(b > 0.0)) throw std::invalid_argument("design: b must be > 0");
    if (g.kind == DesignKind::TruncExp) {
        if (!(g.rate > 0.0))
            throw std::invalid_argument("design: trunc-exp rate must be > 0");
        const auto [m1, m2] = design_bounds(g, b);
        (void)m2;
        if (m1 < design_min_lower_bound) {
            std::ostringstream os;
            os << "design: trunc-exp rate " << g.rate << " on [0," << b
               << "] gives density lower bound " << m1
               << ", below the supported minimum " << design_min_lower_bound;
            throw std::invalid_argument(os.str());
        }
    }
}

struct ModelSpec {
    std::string f_name = "phi0-sqrt";
    double sigma = 0.0;  // additive noise scale
    double b = 1.0;
    std::size_t n = 0;
    DesignDensity g;
    NoiseSpec noise;
};

struct RegressionSample {
    std::vector<double> t;
    std::vector<double> y;
    ModelSpec spec;
};

struct TestFunction {
    std::function<double(double)> f;
    double m2 = 1.0;             // stated upper bound of |f| on [0, b]
    bool exact_h_coeffs = false; // h = f*f has a closed-form coefficient vector
};

// Catalog of test functions on [0, b]. "phi0-sqrt" makes h = f^2 equal to the
// first basis function; "cos-bump" vanishes smoothly at b (its zero extension
// keeps several derivatives, so the coefficient tail decays fast); "lm-floor"
// stays in [1/2, 1] (bounded away from zero); "zero" is the degenerate case
// used by tests.
inline TestFunction test_function(const std::string& name, double b) {
    if (!(b > 0.0)) throw std::invalid_argument("test_function: b must be > 0");
    const double pi = 3.14159265358979323846;
    if (name == "phi0-sqrt")
        return {[](double t) { return std::exp(-0.25 * t); }, 1.0, true};
    if (name == "cos-bump")
        return {[b, pi](double t) { return 0.5 * (1.0 + std::cos(pi * t / b)); }, 1.0, false};
    if (name == "lm-floor")
        return {[b, pi](double t) { return 0.25 * (3.0 + std::cos(pi * t / b)); }, 1.0, false};
    if (name == "zero")
        return {[](double) { return 0.0; }, 0.0, false};
    throw std::invalid_argument(
        "test_function: unknown name \"" + name +
        "\"; catalog: phi0-sqrt, cos-bump, lm-floor, zero");
}

// n i.i.d. draws from g by inverse CDF; deterministic in (seed, stream_id).
inline std::vector<double> sample_design(std::size_t n, const DesignDensity& g, double b,
                                         std::uint64_t seed, std::uint64_t stream_id) {
    validate_design(g, b);
    std::vector<double> t(n);
    if (n == 0) return t;
    auto eng = make_engine(seed, stream_id);
    if (g.kind == DesignKind::Uniform) {
        for (std::size_t i = 0; i < n; ++i) t[i] = b * uniform01(eng);
    } else {
        const double z = 1.0 - std::exp(-g.rate * b);
        for (std::size_t i = 0; i < n; ++i)
            t[i] = -std::log1p(-z * uniform01(eng)) / g.rate;
    }
    return t;
}

// Test hook: replaces a noise sequence by a constant (the generator for that
// role is then never invoked; streams are per-role, so other draws move not).
struct SimOverrides {
    std::optional<double> eps_const;
    std::optional<double> z_const;
};

namespace detail {

// Role offsets inside a replication's stream block.
inline constexpr std::uint64_t stream_design = 0;
inline constexpr std::uint64_t stream_eps = 1;
inline constexpr std::uint64_t stream_z = 2;

inline std::uint64_t stream_of(std::uint64_t replication, std::uint64_t role) {
    return 4 * replication + role;
}

}

// y_i = f(t_i) * eps_i + sigma * z_i with t, eps, z on disjoint streams;
// deterministic in (seed, replication).
inline RegressionSample simulate(const ModelSpec& spec, std::uint64_t seed,
                                 std::uint64_t replication,
                                 const SimOverrides& ov = {}) {
    if (spec.n < 1) throw std::invalid_argument("simulate: spec.n must be >= 1");
    if (!(spec.sigma >= 0.0)) throw std::invalid_argument("simulate: sigma must be >= 0");
    const TestFunction tf = test_function(spec.f_name, spec.b);

    RegressionSample s;
    s.spec = spec;
    s.spec.noise.seed = seed;
    s.t = sample_design(spec.n, spec.g, spec.b, seed,
                        detail::stream_of(replication, detail::stream_design));

    std::vector<double> eps;
    if (ov.eps_const) {
        eps.assign(spec.n, *ov.eps_const);
    } else if (spec.noise.kind == NoiseKind::IID) {
        eps = gen_iid(spec.n, seed, detail::stream_of(replication, detail::stream_eps),
                      NoiseWhich::Epsilon).values;
    } else {
        eps = gen_lm(spec.n, spec.noise.alpha1, seed,
                     detail::stream_of(replication, detail::stream_eps),
                     NoiseWhich::Epsilon).values;
    }

    std::vector<double> z;
    if (ov.z_const) {
        z.assign(spec.n, *ov.z_const);
    } else if (spec.sigma == 0.0) {
        z.assign(spec.n, 0.0);
    } else if (spec.noise.kind == NoiseKind::IID) {
        z = gen_iid(spec.n, seed, detail::stream_of(replication, detail::stream_z),
                    NoiseWhich::Z).values;
    } else {
        z = gen_lm(spec.n, spec.noise.alpha2, seed,
                   detail::stream_of(replication, detail::stream_z), NoiseWhich::Z).values;
    }

    s.y.resize(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i)
        s.y[i] = tf.f(s.t[i]) * eps[i] + spec.sigma * z[i];
    return s;
}

// True iff sum over l of max(l,1)^(2s) * theta_l^2 is at most A. The weight
// uses max(l, 1) so the l = 0 term carries weight 1 and higher indices are
// penalized by their smoothness order.
inline bool sobolev_tail_check(const LaguerreCoeffs& coeffs, double s, double A) {
    if (!(s >= 0.5)) throw std::invalid_argument("sobolev_tail_check: s must be >= 1/2");
    if (!(A > 0.0)) throw std::invalid_argument("sobolev_tail_check: A must be > 0");
    double sum = 0.0;
    for (std::size_t l = 0; l < coeffs.theta.size(); ++l) {
        const double w = std::pow(std::max<double>(static_cast<double>(l), 1.0), 2.0 * s);
        sum += w * coeffs.theta[l] * coeffs.theta[l];
    }
    return sum <= A;
}

}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lagreg/basis.hpp"
#include "lagreg/model.hpp"

namespace lagreg {

enum class Regime { IID, LM };

struct EstimatorConfig {
    Regime regime = Regime::IID;
    double gamma = 1.0;   // threshold constant, shared by both LM branches
    double sigma = 0.0;   // known additive noise scale
    double alpha1 = 1.0;  // LM regime only
    double alpha2 = 1.0;  // LM regime only
    int m_cap = 1024;     // practical cap on the truncation level
    bool clamp_nonnegative = false;
    std::optional<double> threshold_override;  // test hook: force lambda
    int quad_order = 256;  // quadrature order for the centering integrals
};

struct ThresholdedEstimate {
    LaguerreCoeffs raw;          // all theta_hat_l, l < m
    std::vector<bool> kept;      // |theta_hat_l| > lambda_l, strict
    std::vector<double> lambda;  // constant across l within a regime
    int m = 0;
    bool clamp_nonnegative = false;
};

namespace detail {

inline bool weak_memory(const EstimatorConfig& cfg) {
    return cfg.regime == Regime::IID || std::min(cfg.alpha1, cfg.alpha2) >= 0.5;
}

inline void check_lm_alphas(const EstimatorConfig& cfg) {
    if (cfg.regime == Regime::LM &&
        (!(cfg.alpha1 > 0.0) || cfg.alpha1 > 1.0 || !(cfg.alpha2 > 0.0) || cfg.alpha2 > 1.0))
        throw std::invalid_argument("estimator: LM regime requires alpha in (0,1]");
}

}

// Threshold lambda as a function of the sample size. Weak memory (i.i.d., or
// min(alpha) >= 1/2) uses gamma * sqrt(ln n / n); strong memory uses
// gamma * max(ln n / n^alpha1, ln n / n^alpha2).
inline double threshold(const EstimatorConfig& cfg, std::size_t n) {
    if (n < 2) throw std::invalid_argument("threshold: n must be >= 2");
    if (!(cfg.gamma > 0.0)) throw std::invalid_argument("threshold: gamma must be > 0");
    detail::check_lm_alphas(cfg);
    const double dn = static_cast<double>(n);
    const double ln = std::log(dn);
    if (detail::weak_memory(cfg)) return cfg.gamma * std::sqrt(ln / dn);
    return cfg.gamma * std::max(ln / std::pow(dn, cfg.alpha1), ln / std::pow(dn, cfg.alpha2));
}

// Truncation level M: min(n, m_cap) under weak memory, otherwise
// min(floor(n^(2 min(alpha))), m_cap); never below 1.
inline int truncation_level(const EstimatorConfig& cfg, std::size_t n) {
    if (n < 2) throw std::invalid_argument("truncation_level: n must be >= 2");
    if (cfg.m_cap < 1) throw std::invalid_argument("truncation_level: m_cap must be >= 1");
    detail::check_lm_alphas(cfg);
    long long m;
    if (detail::weak_memory(cfg)) {
        m = static_cast<long long>(n);
    } else {
        const double a = std::min(cfg.alpha1, cfg.alpha2);
        m = static_cast<long long>(std::floor(std::pow(static_cast<double>(n), 2.0 * a)));
    }
    m = std::min<long long>(m, cfg.m_cap);
    return static_cast<int>(std::max<long long>(m, 1));
}

namespace detail {

// Shared accumulation pass for both coefficient estimators: the per-sample
// summand is y_i^2 phi_l(t_i)/g(t_i) - sigma^2 * integral(phi_l), and the
// i.i.d. variant drops any summand whose magnitude exceeds sqrt(N / ln N).
inline std::vector<double> accumulate_coeffs(const RegressionSample& s,
                                             const EstimatorConfig& cfg, int m,
                                             bool with_indicator) {
    const std::size_t n = s.t.size();
    if (s.y.size() != n) throw std::invalid_argument("estimator: t/y length mismatch");
    const BasisGrid& grid = detail::shared_grid(s.spec.b, cfg.quad_order);
    const std::vector<double> ints = basis_integrals(m, grid);
    const double sig2 = cfg.sigma * cfg.sigma;
    const double cutoff =
        with_indicator ? std::sqrt(static_cast<double>(n) / std::log(static_cast<double>(n)))
                       : 0.0;
    std::vector<double> acc(m, 0.0);
    std::vector<double> row(m);
    for (std::size_t i = 0; i < n; ++i) {
        const double g = s.spec.g.pdf(s.t[i], s.spec.b);
        const double base = s.y[i] * s.y[i] / g;
        if (!std::isfinite(base)) {
            std::ostringstream os;
            os << "estimator: non-finite summand at observation " << i;
            throw std::runtime_error(os.str());
        }
        laguerre_fn_row(m - 1, s.t[i], row.data());
        if (with_indicator) {
            for (int l = 0; l < m; ++l) {
                const double sm = base * row[l] - sig2 * ints[l];
                if (std::abs(sm) <= cutoff) acc[l] += sm;
            }
        } else {
            for (int l = 0; l < m; ++l) acc[l] += base * row[l] - sig2 * ints[l];
        }
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (int l = 0; l < m; ++l) acc[l] *= inv;
    return acc;
}

}

// Coefficient estimator for independent errors: each summand enters only while
// its magnitude stays within sqrt(N / ln N); the cutoff tames heavy summands
// at the cost of a vanishing truncation bias.
inline double estimate_coeff_iid(const RegressionSample& s, int l,
                                 const EstimatorConfig& cfg) {
    if (l < 0) throw std::domain_error("estimate_coeff_iid: l must be >= 0");
    if (s.t.size() < 2)
        throw std::invalid_argument("estimate_coeff_iid: need at least 2 observations");
    return detail::accumulate_coeffs(s, cfg, l + 1, true).back();
}

// Unbiased coefficient estimator used under long memory: the plain average of
// the same summands, no cutoff.
inline double estimate_coeff_lm(const RegressionSample& s, int l,
                                const EstimatorConfig& cfg) {
    if (l < 0) throw std::domain_error("estimate_coeff_lm: l must be >= 0");
    if (s.t.size() < 1)
        throw std::invalid_argument("estimate_coeff_lm: need at least 1 observation");
    return detail::accumulate_coeffs(s, cfg, l + 1, false).back();
}

// Full pipeline: estimate theta_0..theta_{M-1} in one batched pass, then keep
// exactly the coefficients with |theta_hat| strictly above lambda.
inline ThresholdedEstimate fit(const RegressionSample& s, const EstimatorConfig& cfg) {
    const std::size_t n = s.t.size();
    if (n < 2) throw std::invalid_argument("fit: need at least 2 observations");
    const int m = truncation_level(cfg, n);
    const double lam = cfg.threshold_override ? *cfg.threshold_override : threshold(cfg, n);

    ThresholdedEstimate est;
    est.raw.theta = detail::accumulate_coeffs(s, cfg, m, cfg.regime == Regime::IID);
    est.raw.m = m;
    est.raw.b = s.spec.b;
    est.m = m;
    est.clamp_nonnegative = cfg.clamp_nonnegative;
    est.lambda.assign(m, lam);
    est.kept.resize(m);
    for (int l = 0; l < m; ++l) est.kept[l] = std::abs(est.raw.theta[l]) > lam;
    return est;
}

// Value of the thresholded series at t; the optional clamp floors the signed
// series at zero (the target h = f^2 is nonnegative).
inline double evaluate(const ThresholdedEstimate& est, double t) {
    LaguerreCoeffs masked;
    masked.theta.resize(est.m);
    masked.m = est.m;
    masked.b = est.raw.b;
    for (int l = 0; l < est.m; ++l)
        masked.theta[l] = est.kept[l] ? est.raw.theta[l] : 0.0;
    const double v = reconstruct(masked, t);
    return est.clamp_nonnegative ? std::max(v, 0.0) : v;
}

// Integrated squared error in the coefficient domain: sum of squared gaps
// between the masked estimate and the oracle coefficients, plus the stated
// energy of the oracle tail beyond its truncation. Exact by orthonormality;
// no grid integration involved.
inline double ise(const ThresholdedEstimate& est, const LaguerreCoeffs& oracle,
                  double tail) {
    if (!(tail >= 0.0)) throw std::invalid_argument("ise: tail must be >= 0");
    if (est.raw.b != oracle.b)
        throw std::invalid_argument("ise: estimate and oracle use different supports");
    const int k = std::max(est.m, oracle.m);
    double sum = 0.0;
    for (int l = 0; l < k; ++l) {
        const double a = (l < est.m && est.kept[l]) ? est.raw.theta[l] : 0.0;
        const double o = l < oracle.m ? oracle.theta[l] : 0.0;
        const double d = a - o;
        sum += d * d;
    }
    return sum + tail;
}

}

#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lagreg/estimator.hpp"
#include "lagreg/model.hpp"

namespace lagreg {

struct StudyPlan {
    ModelSpec model;  // n is overridden per grid point
    EstimatorConfig cfg;
    std::vector<std::size_t> n_grid;
    int replications = 100;
    std::uint64_t master_seed = 0;
    std::string out_dir;       // output location for the CLI layer; may be empty
    double smoothness = 1.0;   // declared s of the target, sets the rate exponent
    int oracle_m = 1200;       // projection depth of the oracle coefficients
    int oracle_quad_order = 768;
    unsigned threads = 0;      // 0 = available parallelism; never affects results
};

struct RiskStudyResult {
    struct PerN {
        std::size_t n;
        double mean_risk;
        double risk_se;
        double mean_kept;
    };
    std::vector<PerN> per_n;
    double slope = 0.0;
    double slope_se = 0.0;
    double theoretical_exponent = 0.0;
};

struct VarianceStudyResult {
    struct PerN {
        std::size_t n;
        double var_theta;
    };
    std::vector<PerN> per_n;
    double slope = 0.0;
    double slope_se = 0.0;
    double theoretical_exponent = 0.0;
    int l = 0;
};

inline void validate_plan(const StudyPlan& plan) {
    if (plan.n_grid.empty()) throw std::invalid_argument("plan: n_grid must not be empty");
    if (plan.n_grid.size() < 3)
        throw std::invalid_argument("plan: n_grid needs at least 3 points for the slope fit");
    if (plan.n_grid.front() < 64)
        throw std::invalid_argument("plan: n_grid minimum is 64");
    for (std::size_t i = 1; i < plan.n_grid.size(); ++i)
        if (plan.n_grid[i] <= plan.n_grid[i - 1])
            throw std::invalid_argument("plan: n_grid must be strictly increasing");
    if (plan.replications < 30)
        throw std::invalid_argument("plan: replications must be >= 30");
    if (!(plan.smoothness >= 0.5))
        throw std::invalid_argument("plan: smoothness must be >= 1/2");
    if (plan.oracle_m < 1 || plan.oracle_quad_order < 2)
        throw std::invalid_argument("plan: oracle resolution parameters out of range");
}

// OLS of log y on log x; returns (slope, standard error of the slope).
inline std::pair<double, double> fit_loglog_slope(
    const std::vector<std::pair<double, double>>& pts) {
    const std::size_t n = pts.size();
    if (n < 3) throw std::invalid_argument("fit_loglog_slope: need at least 3 points");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(pts[i].first > 0.0) || !(pts[i].second > 0.0))
            throw std::invalid_argument("fit_loglog_slope: coordinates must be positive");
        if (i > 0 && pts[i].first <= pts[i - 1].first)
            throw std::invalid_argument("fit_loglog_slope: x must be strictly increasing");
    }
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pts) {
        mx += std::log(x);
        my += std::log(y);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        const double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y) - my);
    }
    const double slope = sxy / sxx;
    double ssr = 0.0;
    for (const auto& [x, y] : pts) {
        const double r = (std::log(y) - my) - slope * (std::log(x) - mx);
        ssr += r * r;
    }
    const double sigma2 = ssr / static_cast<double>(n - 2);
    return {slope, std::sqrt(sigma2 / sxx)};
}

// Risk decay exponent the study is compared against: -2s/(2s+1) under weak
// memory, -4*min(alpha)*s/(2s+1) under strong memory.
inline double theoretical_risk_exponent(const EstimatorConfig& cfg, double s) {
    if (detail::weak_memory(cfg)) return -2.0 * s / (2.0 * s + 1.0);
    const double a = std::min(cfg.alpha1, cfg.alpha2);
    return -4.0 * a * s / (2.0 * s + 1.0);
}

// Coefficient-variance decay exponent: -1 under weak memory, -2*min(alpha)
// under strong memory.
inline double theoretical_variance_exponent(const EstimatorConfig& cfg) {
    if (detail::weak_memory(cfg)) return -1.0;
    return -2.0 * std::min(cfg.alpha1, cfg.alpha2);
}

namespace detail {

// Runs body(0..total-1) on `threads` workers pulling indices from a shared
// counter. Each index writes only its own result slot, so the output is
// independent of the schedule; the first failure is reported after joining.
inline void parallel_for_indexed(std::size_t total, unsigned threads,
                                 const std::function<void(std::size_t)>& body) {
    unsigned tc = threads == 0 ? std::thread::hardware_concurrency() : threads;
    if (tc == 0) tc = 1;
    tc = static_cast<unsigned>(std::min<std::size_t>(tc, total == 0 ? 1 : total));
    if (tc <= 1) {
        for (std::size_t i = 0; i < total; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::string err;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total) return;
            try {
                body(i);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (err.empty()) err = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(tc);
    for (unsigned w = 0; w < tc; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (!err.empty()) throw std::runtime_error(err);
}

}

// Oracle side of a study: coefficients of h = f^2 to depth m, the exact energy
// of h, and the tail energy beyond the projection depth.
struct Oracle {
    LaguerreCoeffs coeffs;
    double tail = 0.0;
    double h_norm2 = 0.0;
};

inline Oracle make_oracle(const ModelSpec& model, int m, int quad_order) {
    const TestFunction tf = test_function(model.f_name, model.b);
    const BasisGrid& grid = detail::shared_grid(model.b, quad_order);
    auto h = [&tf](double t) {
        const double v = tf.f(t);
        return v * v;
    };
    Oracle o;
    o.coeffs = project(h, m, grid);
    o.h_norm2 = quad([&h](double t) { const double v = h(t); return v * v; }, grid);
    double coeff_energy = 0.0;
    for (double th : o.coeffs.theta) coeff_energy += th * th;
    o.tail = std::max(0.0, o.h_norm2 - coeff_energy);
    return o;
}

namespace detail {

// Largest truncation level any grid point will request; used to pre-warm the
// shared caches before the parallel phase.
inline int max_truncation(const StudyPlan& plan) {
    int m = 1;
    for (std::size_t n : plan.n_grid) m = std::max(m, truncation_level(plan.cfg, n));
    return m;
}

inline std::runtime_error annotate_failure(std::size_t n, int rep, const char* what) {
    std::ostringstream os;
    os << "study replication failed at n=" << n << " replication=" << rep << ": " << what;
    return std::runtime_error(os.str());
}

}

// Monte Carlo risk-vs-n study: for each n, `replications` independent
// simulate -> fit -> ise pipelines on per-replication streams, then an OLS
// log-log slope over the per-n mean risks.
inline RiskStudyResult run_risk_study(const StudyPlan& plan) {
    validate_plan(plan);
    const Oracle oracle = make_oracle(plan.model, plan.oracle_m, plan.oracle_quad_order);
    detail::shared_grid(plan.model.b, plan.cfg.quad_order);
    basis_integrals(detail::max_truncation(plan),
                    detail::shared_grid(plan.model.b, plan.cfg.quad_order));

    const std::size_t gcount = plan.n_grid.size();
    const std::size_t reps = static_cast<std::size_t>(plan.replications);
    std::vector<double> risk(gcount * reps, 0.0);
    std::vector<double> kept(gcount * reps, 0.0);

    detail::parallel_for_indexed(gcount * reps, plan.threads, [&](std::size_t idx) {
        const std::size_t gi = idx / reps;
        const int rep = static_cast<int>(idx % reps);
        ModelSpec spec = plan.model;
        spec.n = plan.n_grid[gi];
        try {
            const RegressionSample sample = simulate(spec, plan.master_seed, idx);
            const ThresholdedEstimate est = fit(sample, plan.cfg);
            risk[idx] = ise(est, oracle.coeffs, oracle.tail);
            double kc = 0.0;
            for (int l = 0; l < est.m; ++l) kc += est.kept[l] ? 1.0 : 0.0;
            kept[idx] = kc;
        } catch (const std::exception& e) {
            throw detail::annotate_failure(spec.n, rep, e.what());
        }
    });

    RiskStudyResult res;
    res.per_n.reserve(gcount);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t gi = 0; gi < gcount; ++gi) {
        double mean = 0.0, mean_kept = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            mean += risk[gi * reps + r];
            mean_kept += kept[gi * reps + r];
        }
        mean /= static_cast<double>(reps);
        mean_kept /= static_cast<double>(reps);
        double var = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            const double d = risk[gi * reps + r] - mean;
            var += d * d;
        }
        var /= static_cast<double>(reps - 1);
        const double se = std::sqrt(var / static_cast<double>(reps));
        res.per_n.push_back({plan.n_grid[gi], mean, se, mean_kept});
        pts.emplace_back(static_cast<double>(plan.n_grid[gi]), mean);
    }
    const auto [slope, se] = fit_loglog_slope(pts);
    res.slope = slope;
    res.slope_se = se;
    res.theoretical_exponent = theoretical_risk_exponent(plan.cfg, plan.smoothness);
    return res;
}

// Same driver, but the per-n statistic is the Monte Carlo variance of the
// coefficient estimate theta_hat_l across replications.
inline VarianceStudyResult run_variance_study(const StudyPlan& plan, int l) {
    validate_plan(plan);
    if (l < 0) throw std::invalid_argument("run_variance_study: l must be >= 0");
    detail::shared_grid(plan.model.b, plan.cfg.quad_order);
    basis_integrals(l + 1, detail::shared_grid(plan.model.b, plan.cfg.quad_order));

    const std::size_t gcount = plan.n_grid.size();
    const std::size_t reps = static_cast<std::size_t>(plan.replications);
    std::vector<double> theta(gcount * reps, 0.0);

    detail::parallel_for_indexed(gcount * reps, plan.threads, [&](std::size_t idx) {
        const std::size_t gi = idx / reps;
        const int rep = static_cast<int>(idx % reps);
        ModelSpec spec = plan.model;
        spec.n = plan.n_grid[gi];
        try {
            const RegressionSample sample = simulate(spec, plan.master_seed, idx);
            theta[idx] = plan.cfg.regime == Regime::IID
                             ? estimate_coeff_iid(sample, l, plan.cfg)
                             : estimate_coeff_lm(sample, l, plan.cfg);
        } catch (const std::exception& e) {
            throw detail::annotate_failure(spec.n, rep, e.what());
        }
    });

    VarianceStudyResult res;
    res.l = l;
    res.per_n.reserve(gcount);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t gi = 0; gi < gcount; ++gi) {
        double mean = 0.0;
        for (std::size_t r = 0; r < reps; ++r) mean += theta[gi * reps + r];
        mean /= static_cast<double>(reps);
        double var = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            const double d = theta[gi * reps + r] - mean;
            var += d * d;
        }
        var /= static_cast<double>(reps - 1);
        res.per_n.push_back({plan.n_grid[gi], var});
        pts.emplace_back(static_cast<double>(plan.n_grid[gi]), var);
    }
    const auto [slope, se] = fit_loglog_slope(pts);
    res.slope = slope;
    res.slope_se = se;
    res.theoretical_exponent = theoretical_variance_exponent(plan.cfg);
    return res;
}

}

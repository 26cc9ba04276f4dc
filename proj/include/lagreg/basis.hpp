#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lagreg {

// Gauss-Legendre rule mapped affinely onto [0, b].
struct BasisGrid {
    double b = 1.0;
    std::vector<double> nodes;    // strictly increasing, inside (0, b)
    std::vector<double> weights;  // positive, summing to b
    int order = 0;
};

// Finite expansion in the Laguerre-function basis phi_k(t) = exp(-t/2) L_k(t).
struct LaguerreCoeffs {
    std::vector<double> theta;  // indexed 0..m-1
    int m = 0;                  // == theta.size()
    double b = 1.0;             // support endpoint the coefficients refer to
};

// phi_k(t) by the three-term recurrence run directly on phi-values:
// phi_{k+1} = ((2k+1-t) phi_k - k phi_{k-1}) / (k+1).
// The exp(-t/2) factor is folded into the seeds, so every intermediate stays
// in [-1, 1] and the loop cannot overflow at any k.
inline double laguerre_fn(int k, double t) {
    if (k < 0) throw std::domain_error("laguerre_fn: k must be >= 0");
    if (!(t >= 0.0)) throw std::domain_error("laguerre_fn: t must be >= 0");
    double p0 = std::exp(-0.5 * t);
    if (k == 0) return p0;
    double p1 = (1.0 - t) * p0;
    for (int j = 1; j < k; ++j) {
        const double p2 = ((2.0 * j + 1.0 - t) * p1 - j * p0) / (j + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

// Same recurrence, one shared pass; out must hold k_max+1 entries.
inline void laguerre_fn_row(int k_max, double t, double* out) {
    if (k_max < 0) throw std::domain_error("laguerre_fn_row: k_max must be >= 0");
    if (!(t >= 0.0)) throw std::domain_error("laguerre_fn_row: t must be >= 0");
    out[0] = std::exp(-0.5 * t);
    if (k_max == 0) return;
    out[1] = (1.0 - t) * out[0];
    for (int j = 1; j < k_max; ++j)
        out[j + 1] = ((2.0 * j + 1.0 - t) * out[j] - j * out[j - 1]) / (j + 1.0);
}

inline std::vector<double> laguerre_fn_row(int k_max, double t) {
    std::vector<double> out(static_cast<std::size_t>(k_max) + 1);
    laguerre_fn_row(k_max, t, out.data());
    return out;
}

namespace detail {

// Legendre P_n and P_n' at x, by the standard recurrence.
inline std::pair<double, double> legendre_pd(int n, double x) {
    double p0 = 1.0, p1 = x;
    for (int j = 1; j < n; ++j) {
        const double p2 = ((2.0 * j + 1.0) * x * p1 - j * p0) / (j + 1.0);
        p0 = p1;
        p1 = p2;
    }
    const double d = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, d};
}

}

// Gauss-Legendre nodes by Newton iteration from the Chebyshev initial guess,
// then mapped to [0, b]. Exact for polynomials up to degree 2*order-1.
inline BasisGrid make_grid(double b, int order) {
    if (!(b > 0.0)) throw std::invalid_argument("make_grid: b must be > 0");
    if (order < 2) throw std::invalid_argument("make_grid: order must be >= 2");
    BasisGrid g;
    g.b = b;
    g.order = order;
    g.nodes.resize(order);
    g.weights.resize(order);
    const double pi = 3.14159265358979323846;
    for (int i = 1; i <= order; ++i) {
        double x = std::cos(pi * (i - 0.25) / (order + 0.5));
        double pv = 0.0, pd = 1.0;
        for (int it = 0; it < 100; ++it) {
            const auto [v, d] = detail::legendre_pd(order, x);
            pv = v;
            pd = d;
            const double dx = v / d;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                const auto [v2, d2] = detail::legendre_pd(order, x);
                pv = v2;
                pd = d2;
                break;
            }
        }
        (void)pv;
        // i = 1 gives the largest root; store ascending.
        g.nodes[order - i] = 0.5 * b * (x + 1.0);
        g.weights[order - i] = b / ((1.0 - x * x) * pd * pd);
    }
    return g;
}

namespace detail {

struct GridKey {
    double b;
    int order;
    bool operator<(const GridKey& o) const {
        if (b != o.b) return b < o.b;
        return order < o.order;
    }
};

// Shared, lazily built grids. std::map nodes are stable, so returned
// references stay valid for the process lifetime.
inline const BasisGrid& shared_grid(double b, int order) {
    static std::map<GridKey, std::unique_ptr<BasisGrid>> cache;
    static std::mutex mu;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find({b, order});
        if (it != cache.end()) return *it->second;
    }
    auto grid = std::make_unique<BasisGrid>(make_grid(b, order));
    std::lock_guard<std::mutex> lock(mu);
    auto [it, inserted] = cache.try_emplace({b, order}, std::move(grid));
    (void)inserted;
    return *it->second;
}

}

// Integrals of phi_0..phi_{m-1} over [0, b] in one quadrature pass, memoized
// per (b, order). One pass costs the same as a single phi_{m-1} evaluation
// per node, so the cache always stores full prefixes.
inline std::vector<double> basis_integrals(int m, const BasisGrid& grid) {
    if (m < 1) throw std::invalid_argument("basis_integrals: m must be >= 1");
    static std::map<detail::GridKey, std::vector<double>> cache;
    static std::mutex mu;
    const detail::GridKey key{grid.b, grid.order};
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end() && static_cast<int>(it->second.size()) >= m)
            return {it->second.begin(), it->second.begin() + m};
    }
    std::vector<double> ints(m, 0.0);
    std::vector<double> row(m);
    for (int i = 0; i < grid.order; ++i) {
        laguerre_fn_row(m - 1, grid.nodes[i], row.data());
        const double w = grid.weights[i];
        for (int l = 0; l < m; ++l) ints[l] += w * row[l];
    }
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[key];
    if (static_cast<int>(slot.size()) < m) slot = ints;
    return ints;
}

inline double basis_integral(int l, const BasisGrid& grid) {
    if (l < 0) throw std::domain_error("basis_integral: l must be >= 0");
    return basis_integrals(l + 1, grid).back();
}

// Quadrature of an arbitrary integrand over [0, b] on the grid.
inline double quad(const std::function<double(double)>& f, const BasisGrid& grid) {
    double s = 0.0;
    for (int i = 0; i < grid.order; ++i) s += grid.weights[i] * f(grid.nodes[i]);
    return s;
}

// theta_k = integral of h * phi_k over [0, b], for k = 0..m-1.
inline LaguerreCoeffs project(const std::function<double(double)>& h, int m,
                              const BasisGrid& grid) {
    if (m < 1) throw std::invalid_argument("project: m must be >= 1");
    LaguerreCoeffs c;
    c.theta.assign(m, 0.0);
    c.m = m;
    c.b = grid.b;
    std::vector<double> row(m);
    for (int i = 0; i < grid.order; ++i) {
        const double t = grid.nodes[i];
        const double hv = h(t);
        if (!std::isfinite(hv)) {
            std::ostringstream os;
            os << "project: integrand is not finite at t=" << t;
            throw std::runtime_error(os.str());
        }
        const double wh = grid.weights[i] * hv;
        laguerre_fn_row(m - 1, t, row.data());
        for (int k = 0; k < m; ++k) c.theta[k] += wh * row[k];
    }
    return c;
}

inline double reconstruct(const LaguerreCoeffs& coeffs, double t) {
    if (!(t >= 0.0)) throw std::domain_error("reconstruct: t must be >= 0");
    if (coeffs.theta.empty()) return 0.0;
    const int m = static_cast<int>(coeffs.theta.size());
    std::vector<double> row(m);
    laguerre_fn_row(m - 1, t, row.data());
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += coeffs.theta[k] * row[k];
    return s;
}

}

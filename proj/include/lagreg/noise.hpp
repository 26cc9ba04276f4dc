#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lagreg/rng.hpp"

namespace lagreg {

enum class NoiseKind { IID, LongMemory };
enum class NoiseWhich { Epsilon, Z };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::IID;
    double alpha1 = 1.0;  // memory parameter of the multiplicative sequence
    double alpha2 = 1.0;  // memory parameter of the additive sequence
    std::uint64_t seed = 0;
};

struct NoisePath {
    std::vector<double> values;
    NoiseSpec spec;
    NoiseWhich which = NoiseWhich::Epsilon;
};

// Autocovariance of fractional Gaussian noise with Hurst index H = 1 - alpha/2,
// so that gamma(h) decays like h^(-alpha). gamma(0) = 1 (unit variance);
// alpha = 1 is the white-noise boundary, returned exactly.
inline double fgn_autocov(int h, double alpha) {
    if (h < 0) throw std::domain_error("fgn_autocov: h must be >= 0");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::domain_error("fgn_autocov: alpha must lie in (0,1]");
    if (h == 0) return 1.0;
    if (alpha == 1.0) return 0.0;
    const double e = 2.0 - alpha;  // = 2H
    return 0.5 * (std::pow(h + 1.0, e) - 2.0 * std::pow(static_cast<double>(h), e) +
                  std::pow(h - 1.0, e));
}

inline NoisePath gen_iid(std::size_t n, std::uint64_t seed, std::uint64_t stream_id,
                         NoiseWhich which = NoiseWhich::Epsilon) {
    if (n < 1) throw std::invalid_argument("gen_iid: n must be >= 1");
    NoisePath p;
    p.values.resize(n);
    p.spec = NoiseSpec{NoiseKind::IID, 1.0, 1.0, seed};
    p.which = which;
    GaussianStream gs(seed, stream_id);
    gs.fill(p.values.data(), n);
    return p;
}

namespace detail {

// In-place radix-2 FFT, forward sign exp(-2*pi*i*jk/n). n must be a power of two.
inline void fft_pow2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double pi = 3.14159265358979323846;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::complex<double> wlen = std::polar(1.0, -2.0 * pi / static_cast<double>(len));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Dense Toeplitz covariance built from the fGn autocovariance.
inline Eigen::MatrixXd fgn_toeplitz(int n, double alpha) {
    std::vector<double> g(n);
    for (int h = 0; h < n; ++h) g[h] = fgn_autocov(h, alpha);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = g[std::abs(i - j)];
    return m;
}

// Exact Gaussian sample with Toeplitz covariance via Cholesky; used only when
// the circulant embedding is not nonnegative definite.
inline std::vector<double> toeplitz_cholesky_sample(std::size_t n, double alpha,
                                                    GaussianStream& gs) {
    constexpr std::size_t dense_budget = 4096;
    if (n > dense_budget)
        throw std::runtime_error(
            "gen_lm: circulant embedding not nonnegative definite and the dense "
            "Cholesky fallback budget (n <= 4096) is exceeded; this indicates a bug");
    Eigen::MatrixXd sigma = fgn_toeplitz(static_cast<int>(n), alpha);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error(
            "gen_lm: both the circulant embedding and the Toeplitz Cholesky "
            "factorization failed; covariance is not positive definite (bug)");
    Eigen::VectorXd g(n);
    for (std::size_t i = 0; i < n; ++i) g(static_cast<int>(i)) = gs.next();
    Eigen::VectorXd x = llt.matrixL() * g;
    return {x.data(), x.data() + n};
}

}

// Exact stationary Gaussian sample with autocovariance fgn_autocov(., alpha),
// by circulant embedding of the Toeplitz covariance. The embedding size is the
// smallest power of two >= 2(n-1). alpha = 1 delegates to gen_iid bit-for-bit.
inline NoisePath gen_lm(std::size_t n, double alpha, std::uint64_t seed,
                        std::uint64_t stream_id, NoiseWhich which = NoiseWhich::Epsilon) {
    if (n < 1) throw std::invalid_argument("gen_lm: n must be >= 1");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::domain_error("gen_lm: alpha must lie in (0,1]");
    if (alpha == 1.0) {
        NoisePath p = gen_iid(n, seed, stream_id, which);
        p.spec = NoiseSpec{NoiseKind::LongMemory, 1.0, 1.0, seed};
        return p;
    }
    NoisePath p;
    p.spec = NoiseSpec{NoiseKind::LongMemory, alpha, alpha, seed};
    p.which = which;
    GaussianStream gs(seed, stream_id);
    if (n == 1) {
        p.values.assign(1, gs.next());
        return p;
    }

    std::size_t half = 1;
    while (half < n - 1) half <<= 1;
    const std::size_t L = 2 * half;  // smallest power of two >= 2(n-1)

    std::vector<std::complex<double>> c(L);
    for (std::size_t j = 0; j <= half; ++j) c[j] = fgn_autocov(static_cast<int>(j), alpha);
    for (std::size_t j = half + 1; j < L; ++j) c[j] = c[L - j];
    detail::fft_pow2(c);

    double lam_max = 0.0, lam_min = 0.0;
    std::vector<double> lam(L);
    for (std::size_t j = 0; j < L; ++j) {
        lam[j] = c[j].real();
        lam_max = std::max(lam_max, lam[j]);
        lam_min = std::min(lam_min, lam[j]);
    }
    if (lam_min < -1e-9 * lam_max) {
        p.values = detail::toeplitz_cholesky_sample(n, alpha, gs);
        return p;
    }
    for (auto& l : lam) l = std::max(l, 0.0);

    const double dL = static_cast<double>(L);
    std::vector<std::complex<double>> w(L);
    w[0] = std::sqrt(lam[0] / dL) * gs.next();
    for (std::size_t j = 1; j < half; ++j) {
        const double a = std::sqrt(lam[j] / (2.0 * dL));
        const double u = gs.next();
        const double v = gs.next();
        w[j] = std::complex<double>(a * u, a * v);
        w[L - j] = std::conj(w[j]);
    }
    w[half] = std::sqrt(lam[half] / dL) * gs.next();
    detail::fft_pow2(w);

    p.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.values[i] = w[i].real();
    return p;
}

// Extreme eigenvalues of the n x n fGn Toeplitz covariance; diagnostic for the
// lambda ~ n^(1-alpha) growth of the covariance spectrum under long memory.
inline std::pair<double, double> covariance_eigen_range(int n, double alpha) {
    if (n < 1) throw std::invalid_argument("covariance_eigen_range: n must be >= 1");
    if (n > 4096)
        throw std::invalid_argument(
            "covariance_eigen_range: n exceeds the dense eigensolve budget (4096)");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::domain_error("covariance_eigen_range: alpha must lie in (0,1]");
    if (n == 1 || alpha == 1.0) return {1.0, 1.0};
    Eigen::MatrixXd sigma = detail::fgn_toeplitz(n, alpha);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("covariance_eigen_range: eigensolver failed");
    const auto& ev = es.eigenvalues();
    return {ev(0), ev(n - 1)};
}

}

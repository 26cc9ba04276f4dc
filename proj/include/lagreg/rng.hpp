#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

namespace lagreg {

// Finalizer from the splitmix64 generator; bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// One engine per (seed, stream_id) pair. Two mixing rounds keep engines for
// adjacent stream ids statistically unrelated; stream assignment policy lives
// with the callers (model/experiments).
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t k = splitmix64(seed);
    k = splitmix64(k ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1)));
    return std::mt19937_64(k);
}

// Uniform on (0,1]: top 53 bits of one engine word, shifted off zero so that
// log(u) below is always finite.
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;
}

// N(0,1) stream via the Box-Muller transform, written out here so draws are
// bit-stable for a given (seed, stream_id) across standard libraries.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream_id)
        : eng_(make_engine(seed, stream_id)) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    void fill(double* out, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) out[i] = next();
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}

#include <catch2/catch_amalgamated.hpp>

#include <lagreg/model.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// One-sample Kolmogorov statistic against a CDF; 1.36/sqrt(n) is the 95%
// critical value, 1.63 the 99%.
double ks_stat(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F = cdf(x[i]);
        d = std::max(d, std::abs(F - static_cast<double>(i) / n));
        d = std::max(d, std::abs(F - static_cast<double>(i + 1) / n));
    }
    return d;
}

}

TEST_CASE("uniform design covers [0,b] with the right law") {
    const std::size_t n = 100000;
    lagreg::DesignDensity g;
    const double b = 2.0;
    const auto t = lagreg::sample_design(n, g, b, 3, 0);
    REQUIRE(t.size() == n);
    double lo = b, hi = 0.0, m = 0.0;
    for (double v : t) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        m += v;
    }
    m /= static_cast<double>(n);
    CHECK(lo >= 0.0);
    CHECK(hi <= b);
    const double se = (b / std::sqrt(12.0)) / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(m - 1.0) <= 3.0 * se);
    const double d = ks_stat(t, [b](double v) { return v / b; });
    INFO("KS statistic " << d);
    CHECK(d <= 1.36 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("truncated exponential design follows its CDF") {
    const std::size_t n = 100000;
    lagreg::DesignDensity g;
    g.kind = lagreg::DesignKind::TruncExp;
    g.rate = 1.5;
    const double b = 1.0;
    const auto t = lagreg::sample_design(n, g, b, 4, 0);
    for (double v : t) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= b);
    }
    const double z = 1.0 - std::exp(-g.rate * b);
    const double d = ks_stat(
        t, [&](double v) { return (1.0 - std::exp(-g.rate * v)) / z; });
    INFO("KS statistic " << d);
    CHECK(d <= 1.36 / std::sqrt(static_cast<double>(n)));

    // The density integrates to one over the support.
    const auto grid = lagreg::make_grid(b, 64);
    CHECK_THAT(lagreg::quad([&](double v) { return g.pdf(v, b); }, grid),
               WithinRel(1.0, 1e-12));
}

TEST_CASE("sample_design is deterministic and n=0 yields an empty draw") {
    lagreg::DesignDensity g;
    CHECK(lagreg::sample_design(0, g, 1.0, 1, 0).empty());
    const auto a = lagreg::sample_design(64, g, 1.0, 1, 0);
    const auto b = lagreg::sample_design(64, g, 1.0, 1, 0);
    CHECK(a == b);
    CHECK(a != lagreg::sample_design(64, g, 1.0, 2, 0));
}

TEST_CASE("design bounds and validation") {
    lagreg::DesignDensity u;
    CHECK(lagreg::design_bounds(u, 4.0) == std::make_pair(0.25, 0.25));
    lagreg::validate_design(u, 4.0);

    lagreg::DesignDensity e;
    e.kind = lagreg::DesignKind::TruncExp;
    e.rate = 1.0;
    const auto be = lagreg::design_bounds(e, 1.0);
    CHECK_THAT(be.second, WithinRel(1.0 / (1.0 - std::exp(-1.0)), 1e-12));
    CHECK_THAT(be.first, WithinRel(std::exp(-1.0) / (1.0 - std::exp(-1.0)), 1e-12));
    lagreg::validate_design(e, 1.0);

    e.rate = -1.0;
    CHECK_THROWS_AS(lagreg::validate_design(e, 1.0), std::invalid_argument);
    // rate*b = 50 pushes the density at b below the supported floor.
    e.rate = 50.0;
    CHECK_THROWS_WITH(lagreg::validate_design(e, 1.0),
                      ContainsSubstring("lower bound"));
    CHECK_THROWS_AS(lagreg::validate_design(u, 0.0), std::invalid_argument);
}

TEST_CASE("test_function catalog obeys its declared bounds") {
    const double b = 1.0;
    for (const char* name : {"phi0-sqrt", "cos-bump", "lm-floor", "zero"}) {
        const auto tf = lagreg::test_function(name, b);
        double hi = 0.0, lo = 1e300;
        for (int i = 0; i <= 2000; ++i) {
            const double t = b * i / 2000.0;
            const double v = tf.f(t);
            REQUIRE(std::isfinite(v));
            hi = std::max(hi, std::abs(v));
            lo = std::min(lo, v);
        }
        CHECK(hi <= tf.m2 + 1e-12);
        if (std::string(name) == "lm-floor") CHECK(lo >= 0.5 - 1e-12);
        if (std::string(name) == "zero") CHECK(hi == 0.0);
    }
    CHECK_THROWS_WITH(lagreg::test_function("nope", 1.0),
                      ContainsSubstring("phi0-sqrt"));
    CHECK_THROWS_AS(lagreg::test_function("phi0-sqrt", 0.0), std::invalid_argument);
}

TEST_CASE("phi0-sqrt squares to the first basis function") {
    // h = f^2 = e^{-t/2}, so on a wide interval the projection is (1,0,0,...)
    // and on [0,1] the leading coefficients have elementary closed forms:
    // theta_0 = 1 - e^{-1}, theta_1 = e^{-1}.
    const auto tf = lagreg::test_function("phi0-sqrt", 200.0);
    auto h = [&](double t) { return tf.f(t) * tf.f(t); };
    const auto gw = lagreg::make_grid(200.0, 512);
    const auto cw = lagreg::project(h, 3, gw);
    CHECK_THAT(cw.theta[0], WithinAbs(1.0, 1e-9));
    CHECK_THAT(cw.theta[1], WithinAbs(0.0, 1e-9));
    CHECK_THAT(cw.theta[2], WithinAbs(0.0, 1e-9));

    const auto g1 = lagreg::make_grid(1.0, 128);
    const auto c1 = lagreg::project(h, 2, g1);
    CHECK_THAT(c1.theta[0], WithinRel(1.0 - std::exp(-1.0), 1e-12));
    CHECK_THAT(c1.theta[1], WithinRel(std::exp(-1.0), 1e-12));
}

TEST_CASE("simulate composes signal and noise as declared") {
    lagreg::ModelSpec spec;
    spec.f_name = "phi0-sqrt";
    spec.sigma = 0.0;
    spec.b = 1.0;
    spec.n = 32;

    // eps pinned to 1 and no additive noise: y must equal f(t) exactly.
    lagreg::SimOverrides ov;
    ov.eps_const = 1.0;
    const auto s = lagreg::simulate(spec, 5, 0, ov);
    const auto tf = lagreg::test_function(spec.f_name, spec.b);
    for (std::size_t i = 0; i < s.t.size(); ++i) CHECK(s.y[i] == tf.f(s.t[i]));
    CHECK(s.spec.noise.seed == 5);

    // Zero signal: y is exactly sigma * z, and z comes from the z-role stream.
    lagreg::ModelSpec zs = spec;
    zs.f_name = "zero";
    zs.sigma = 0.7;
    const auto sz = lagreg::simulate(zs, 5, 3);
    const auto zpath = lagreg::gen_iid(zs.n, 5, 4 * 3 + 2, lagreg::NoiseWhich::Z);
    for (std::size_t i = 0; i < sz.y.size(); ++i)
        CHECK(sz.y[i] == 0.7 * zpath.values[i]);

    // Same (seed, replication) reproduces; different replication does not.
    const auto r1 = lagreg::simulate(spec, 9, 2);
    const auto r2 = lagreg::simulate(spec, 9, 2);
    CHECK(r1.t == r2.t);
    CHECK(r1.y == r2.y);
    const auto r3 = lagreg::simulate(spec, 9, 4);
    CHECK(r1.y != r3.y);

    CHECK_THROWS_AS(lagreg::simulate(lagreg::ModelSpec{}, 1, 0), std::invalid_argument);
}

TEST_CASE("simulate uses the long-memory generator when asked") {
    lagreg::ModelSpec spec;
    spec.f_name = "zero";
    spec.sigma = 1.0;
    spec.n = 64;
    spec.noise.kind = lagreg::NoiseKind::LongMemory;
    spec.noise.alpha1 = 0.4;
    spec.noise.alpha2 = 0.6;
    const auto s = lagreg::simulate(spec, 8, 1);
    const auto z = lagreg::gen_lm(spec.n, 0.6, 8, 4 * 1 + 2, lagreg::NoiseWhich::Z);
    for (std::size_t i = 0; i < s.y.size(); ++i) CHECK(s.y[i] == z.values[i]);
}

TEST_CASE("second moment of y decomposes into signal and noise parts") {
    // E[y^2 | t] = f(t)^2 + sigma^2 under unit-variance eps independent of z.
    lagreg::ModelSpec spec;
    spec.f_name = "cos-bump";
    spec.sigma = 0.5;
    spec.b = 1.0;
    spec.n = 4096;
    const auto tf = lagreg::test_function(spec.f_name, spec.b);

    const int reps = 40;
    std::vector<double> resid;
    resid.reserve(spec.n * reps);
    for (int r = 0; r < reps; ++r) {
        const auto s = lagreg::simulate(spec, 21, static_cast<std::uint64_t>(r));
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            const double f = tf.f(s.t[i]);
            resid.push_back(s.y[i] * s.y[i] - f * f - spec.sigma * spec.sigma);
        }
    }
    double m = 0.0;
    for (double v : resid) m += v;
    m /= static_cast<double>(resid.size());
    double s2 = 0.0;
    for (double v : resid) s2 += (v - m) * (v - m);
    s2 /= static_cast<double>(resid.size() - 1);
    const double se = std::sqrt(s2 / static_cast<double>(resid.size()));
    INFO("residual mean " << m << " se " << se);
    CHECK(std::abs(m) <= 3.0 * se);
}

TEST_CASE("noise is independent of the design") {
    // With f = phi0-sqrt and sigma = 0, eps_i = y_i / f(t_i); its correlation
    // with t_i must vanish at the MC scale.
    lagreg::ModelSpec spec;
    spec.f_name = "phi0-sqrt";
    spec.sigma = 0.0;
    spec.b = 1.0;
    spec.n = 100000;
    const auto s = lagreg::simulate(spec, 13, 0);
    const auto tf = lagreg::test_function(spec.f_name, spec.b);
    double mt = 0.0, me = 0.0;
    std::vector<double> eps(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        eps[i] = s.y[i] / tf.f(s.t[i]);
        mt += s.t[i];
        me += eps[i];
    }
    mt /= static_cast<double>(spec.n);
    me /= static_cast<double>(spec.n);
    double ct = 0.0, ce = 0.0, cx = 0.0;
    for (std::size_t i = 0; i < spec.n; ++i) {
        ct += (s.t[i] - mt) * (s.t[i] - mt);
        ce += (eps[i] - me) * (eps[i] - me);
        cx += (s.t[i] - mt) * (eps[i] - me);
    }
    const double corr = cx / std::sqrt(ct * ce);
    INFO("corr(t, eps) " << corr);
    CHECK(std::abs(corr) <= 3.0 / std::sqrt(static_cast<double>(spec.n)));
}

TEST_CASE("sobolev_tail_check separates smooth from rough coefficient decay") {
    lagreg::LaguerreCoeffs c;
    c.b = 1.0;

    c.theta = {1.0, 0.0, 0.0};
    c.m = 3;
    CHECK(lagreg::sobolev_tail_check(c, 1.0, 1.0));
    CHECK(lagreg::sobolev_tail_check(c, 3.0, 1.0));

    c.theta.assign(40, 0.0);
    c.m = 40;
    CHECK(lagreg::sobolev_tail_check(c, 0.5, 1e-12));

    // theta_l = 1/(l+1) has weighted energy ~ l per term at s = 1: sum over
    // 51 terms is about 47, far beyond A = 10.
    c.theta.resize(51);
    c.m = 51;
    for (std::size_t l = 0; l < c.theta.size(); ++l)
        c.theta[l] = 1.0 / (static_cast<double>(l) + 1.0);
    CHECK_FALSE(lagreg::sobolev_tail_check(c, 1.0, 10.0));

    CHECK_THROWS_AS(lagreg::sobolev_tail_check(c, 0.4, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(lagreg::sobolev_tail_check(c, 1.0, 0.0), std::invalid_argument);
}

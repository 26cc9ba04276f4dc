#pragma once

// Fixed, hand-specified study results used by the serialization golden tests
// and by the one-off generator that wrote tests/golden/. Keep the values
// frozen: the golden files encode these bytes.

#include <lagreg/experiments.hpp>

namespace golden {

inline lagreg::StudyPlan plan() {
    lagreg::StudyPlan p;
    p.model.f_name = "cos-bump";
    p.model.b = 1.0;
    p.model.sigma = 0.25;
    p.model.g.kind = lagreg::DesignKind::TruncExp;
    p.model.g.rate = 2.0;
    p.model.noise.kind = lagreg::NoiseKind::LongMemory;
    p.model.noise.alpha1 = 0.4;
    p.model.noise.alpha2 = 0.8;
    p.model.noise.seed = 42;
    p.cfg.regime = lagreg::Regime::LM;
    p.cfg.gamma = 0.75;
    p.cfg.sigma = 0.25;
    p.cfg.alpha1 = 0.4;
    p.cfg.alpha2 = 0.8;
    p.cfg.m_cap = 64;
    p.cfg.clamp_nonnegative = true;
    p.cfg.quad_order = 128;
    p.n_grid = {64, 128, 256};
    p.replications = 30;
    p.master_seed = 42;
    p.smoothness = 1.25;
    p.oracle_m = 32;
    p.oracle_quad_order = 64;
    return p;
}

inline lagreg::RiskStudyResult risk_result() {
    lagreg::RiskStudyResult r;
    r.per_n = {{64, 0.25, 0.015625, 3.5},
               {128, 0.125, 0.0078125, 5.25},
               {256, 1.0 / 30.0, 0.001953125, 7.0}};
    r.slope = -0.97;
    r.slope_se = 0.04;
    r.theoretical_exponent = -4.0 * 0.4 * 1.25 / 3.5;
    return r;
}

inline lagreg::VarianceStudyResult variance_result() {
    lagreg::VarianceStudyResult v;
    v.per_n = {{64, 0.5}, {128, 0.25}, {256, 1.0 / 3.0}};
    v.slope = -1.0;
    v.slope_se = 0.001;
    v.theoretical_exponent = -0.8;
    v.l = 2;
    return v;
}

}

// Command-line front end: parses flat key=value experiment configs, runs
// simulations and Monte Carlo studies, and writes CSV/JSON artifacts.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lagreg/config.hpp"
#include "lagreg/estimator.hpp"
#include "lagreg/experiments.hpp"
#include "lagreg/io.hpp"
#include "lagreg/model.hpp"
#include "lagreg/noise.hpp"
#include "lagreg/version.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
    unsigned threads = 0;
    bool overwrite = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "path to a key = value config file")
        ->required();
    cmd->add_option("--out", o.out_dir, "output directory (created if absent)")->required();
    o.seed_opt = cmd->add_option("--seed", o.seed, "override the config seed");
    cmd->add_option("--threads", o.threads,
                    "worker threads (0 = available parallelism; never changes results)");
    cmd->add_flag("--overwrite", o.overwrite, "allow replacing existing output files");
}

void apply_seed_override(const CommonOpts& o, lagreg::ModelSpec& model) {
    if (o.seed_opt != nullptr && o.seed_opt->count() > 0) model.noise.seed = o.seed;
}

std::string json_error(const char* category, const std::string& message) {
    lagreg::JsonWriter w;
    w.begin_object();
    w.begin_object("error");
    w.kv("category", category);
    w.kv("message", message);
    w.end_object();
    w.end_object();
    return w.str();
}

void run_simulate(const CommonOpts& o) {
    const lagreg::Config c = lagreg::Config::parse_file(o.config_path);
    lagreg::ModelSpec model = lagreg::build_model_spec(c);
    const std::uint64_t replication = c.get_u64("replication", 0);
    c.reject_unknown_keys();
    apply_seed_override(o, model);
    if (model.n < 1)
        throw lagreg::ConfigError(c.where("n") + ": simulate requires n >= 1");

    const lagreg::RegressionSample s =
        lagreg::simulate(model, model.noise.seed, replication);

    lagreg::ensure_out_dir(o.out_dir);
    const std::filesystem::path dir(o.out_dir);
    lagreg::write_text_file((dir / "sample.csv").string(), lagreg::sample_csv_text(s),
                            o.overwrite);
    lagreg::JsonWriter w;
    w.begin_object();
    w.kv("tool_version", lagreg::version);
    w.kv("command", "simulate");
    w.kv("n", model.n);
    w.kv("replication", replication);
    w.begin_object("config");
    lagreg::append_model_config(w, model, lagreg::build_estimator_config(c, model));
    w.kv("n", model.n);
    w.end_object();
    w.end_object();
    lagreg::write_text_file((dir / "summary.json").string(), w.str(), o.overwrite);
    std::cout << "simulate: n=" << model.n << " -> " << (dir / "sample.csv").string()
              << "\n";
}

void run_estimate(const CommonOpts& o) {
    const lagreg::Config c = lagreg::Config::parse_file(o.config_path);
    lagreg::ModelSpec model = lagreg::build_model_spec(c);
    const lagreg::EstimatorConfig cfg = lagreg::build_estimator_config(c, model);
    const std::uint64_t replication = c.get_u64("replication", 0);
    c.reject_unknown_keys();
    apply_seed_override(o, model);
    if (model.n < 2)
        throw lagreg::ConfigError(c.where("n") + ": estimate requires n >= 2");

    const lagreg::RegressionSample s =
        lagreg::simulate(model, model.noise.seed, replication);
    const lagreg::ThresholdedEstimate est = lagreg::fit(s, cfg);
    int kept_count = 0;
    for (int l = 0; l < est.m; ++l) kept_count += est.kept[l] ? 1 : 0;

    lagreg::ensure_out_dir(o.out_dir);
    const std::filesystem::path dir(o.out_dir);
    lagreg::write_text_file((dir / "coeffs.csv").string(), lagreg::coeffs_csv_text(est),
                            o.overwrite);
    lagreg::JsonWriter w;
    w.begin_object();
    w.kv("tool_version", lagreg::version);
    w.kv("command", "estimate");
    w.kv("n", model.n);
    w.kv("replication", replication);
    w.kv("m", est.m);
    w.kv("lambda", est.lambda.empty() ? 0.0 : est.lambda.front());
    w.kv("kept_count", kept_count);
    w.begin_object("config");
    lagreg::append_model_config(w, model, cfg);
    w.kv("n", model.n);
    w.end_object();
    w.end_object();
    lagreg::write_text_file((dir / "summary.json").string(), w.str(), o.overwrite);
    std::cout << "estimate: n=" << model.n << " m=" << est.m << " kept=" << kept_count
              << " lambda=" << lagreg::format_g17(est.lambda.empty() ? 0.0 : est.lambda[0])
              << "\n";
}

void run_risk_study(const CommonOpts& o) {
    const lagreg::Config c = lagreg::Config::parse_file(o.config_path);
    lagreg::StudyPlan plan = lagreg::build_study_plan(c);
    (void)c.get_int("coeff_index", 0);  // shared study configs may carry it
    c.reject_unknown_keys();
    if (o.seed_opt != nullptr && o.seed_opt->count() > 0) {
        plan.master_seed = o.seed;
        plan.model.noise.seed = o.seed;
    }
    plan.threads = o.threads;
    plan.out_dir = o.out_dir;

    const lagreg::RiskStudyResult res = lagreg::run_risk_study(plan);
    lagreg::emit_risk_study(res, plan, o.out_dir, o.overwrite);
    for (const auto& row : res.per_n)
        std::cout << "n=" << row.n << " mean_risk=" << lagreg::format_g17(row.mean_risk)
                  << " se=" << lagreg::format_g17(row.risk_se)
                  << " kept_mean=" << lagreg::format_g17(row.mean_kept) << "\n";
    std::cout << "slope=" << lagreg::format_g17(res.slope)
              << " slope_se=" << lagreg::format_g17(res.slope_se)
              << " theoretical_exponent=" << lagreg::format_g17(res.theoretical_exponent)
              << "\n";
}

void run_variance_study(const CommonOpts& o) {
    const lagreg::Config c = lagreg::Config::parse_file(o.config_path);
    lagreg::StudyPlan plan = lagreg::build_study_plan(c);
    const int l = c.get_int("coeff_index", 0);
    c.reject_unknown_keys();
    if (o.seed_opt != nullptr && o.seed_opt->count() > 0) {
        plan.master_seed = o.seed;
        plan.model.noise.seed = o.seed;
    }
    plan.threads = o.threads;
    plan.out_dir = o.out_dir;

    const lagreg::VarianceStudyResult res = lagreg::run_variance_study(plan, l);
    lagreg::emit_variance_study(res, plan, o.out_dir, o.overwrite);
    for (const auto& row : res.per_n)
        std::cout << "n=" << row.n << " var_theta_hat=" << lagreg::format_g17(row.var_theta)
                  << "\n";
    std::cout << "slope=" << lagreg::format_g17(res.slope)
              << " slope_se=" << lagreg::format_g17(res.slope_se)
              << " theoretical_exponent=" << lagreg::format_g17(res.theoretical_exponent)
              << "\n";
}

// Pooled sample autocovariance (about the known zero mean, unbiased divisor
// n - h) for each requested alpha, compared to the closed form.
void run_noise_check(const CommonOpts& o) {
    const lagreg::Config c = lagreg::Config::parse_file(o.config_path);
    const std::vector<double> alphas = c.get_double_list("alpha", {0.3, 0.4, 0.7});
    const std::size_t n = static_cast<std::size_t>(c.get_u64("n", 4096));
    const int paths = c.get_int("paths", 200);
    const int lag_max = c.get_int("lag_max", 100);
    const int fit_lo = c.get_int("fit_lo", 10);
    const int fit_hi = c.get_int("fit_hi", std::min(lag_max, 100));
    const std::uint64_t seed = o.seed_opt != nullptr && o.seed_opt->count() > 0
                                   ? o.seed
                                   : c.get_u64("seed", 0);
    c.reject_unknown_keys();
    if (n < static_cast<std::size_t>(lag_max) + 2)
        throw lagreg::ConfigError("noise-check: n must exceed lag_max + 1");
    if (paths < 2) throw lagreg::ConfigError("noise-check: paths must be >= 2");

    lagreg::ensure_out_dir(o.out_dir);
    const std::filesystem::path dir(o.out_dir);
    lagreg::JsonWriter w;
    w.begin_object();
    w.kv("tool_version", lagreg::version);
    w.kv("command", "noise-check");
    w.begin_array("results");

    for (double alpha : alphas) {
        const int nl = lag_max + 1;
        std::vector<double> mean(nl, 0.0), m2(nl, 0.0);
        for (int p = 0; p < paths; ++p) {
            const lagreg::NoisePath path = lagreg::gen_lm(n, alpha, seed, p);
            for (int h = 0; h < nl; ++h) {
                double acc = 0.0;
                for (std::size_t i = 0; i + h < n; ++i)
                    acc += path.values[i] * path.values[i + h];
                const double est = acc / static_cast<double>(n - h);
                const double delta = est - mean[h];
                mean[h] += delta / (p + 1);
                m2[h] += delta * (est - mean[h]);
            }
        }
        std::ostringstream csv;
        csv << "lag,sample_autocov,exact_autocov,se\n";
        double max_z = 0.0;
        std::vector<std::pair<double, double>> pts;
        for (int h = 0; h < nl; ++h) {
            const double se = std::sqrt(m2[h] / (paths - 1) / paths);
            const double exact = lagreg::fgn_autocov(h, alpha);
            max_z = std::max(max_z, std::abs(mean[h] - exact) / se);
            csv << h << ',' << lagreg::format_g17(mean[h]) << ','
                << lagreg::format_g17(exact) << ',' << lagreg::format_g17(se) << '\n';
            if (h >= fit_lo && h <= fit_hi && mean[h] > 0.0)
                pts.emplace_back(static_cast<double>(h), mean[h]);
        }
        double slope = 0.0, slope_se = 0.0;
        if (pts.size() >= 3) {
            const auto fitted = lagreg::fit_loglog_slope(pts);
            slope = fitted.first;
            slope_se = fitted.second;
        }
        char fname[64];
        std::snprintf(fname, sizeof fname, "autocov_alpha%g.csv", alpha);
        lagreg::write_text_file((dir / fname).string(), csv.str(), o.overwrite);

        w.begin_object();
        w.kv("alpha", alpha);
        w.kv("paths", paths);
        w.kv("n", n);
        w.kv("max_abs_z", max_z);
        w.kv("within_3se", max_z <= 3.0);
        w.kv("slope", slope);
        w.kv("slope_se", slope_se);
        w.kv("expected_slope", -alpha);
        w.kv("slope_within_tol", std::abs(slope + alpha) <= 0.1);
        w.end_object();
        std::cout << "alpha=" << alpha << " max_abs_z=" << max_z << " slope=" << slope
                  << " (expected " << -alpha << ")\n";
    }
    w.end_array();
    w.begin_object("config");
    w.begin_array("alpha");
    for (double a : alphas) w.array_value(a);
    w.end_array();
    w.kv("n", n);
    w.kv("paths", paths);
    w.kv("lag_max", lag_max);
    w.kv("fit_lo", fit_lo);
    w.kv("fit_hi", fit_hi);
    w.kv("seed", seed);
    w.end_object();
    w.end_object();
    lagreg::write_text_file((dir / "summary.json").string(), w.str(), o.overwrite);
}

// Gram-matrix deviation from identity and the |phi_k| <= 1 bound scan.
void run_basis_check(const CommonOpts& o) {
    const lagreg::Config c = lagreg::Config::parse_file(o.config_path);
    const int k_max = c.get_int("k_max", 30);
    const double b = c.get_double("b", 200.0);
    const int quad_order = c.get_int("quad_order", 256);
    const int bound_k_max = c.get_int("bound_k_max", 16384);
    const int grid_points = c.get_int("grid_points", 1000);
    const double t_max = c.get_double("t_max", 50.0);
    c.reject_unknown_keys();

    const lagreg::BasisGrid grid = lagreg::make_grid(b, quad_order);
    const int m = k_max + 1;
    std::vector<std::vector<double>> gram(m, std::vector<double>(m, 0.0));
    std::vector<double> row(m);
    for (int i = 0; i < grid.order; ++i) {
        lagreg::laguerre_fn_row(k_max, grid.nodes[i], row.data());
        for (int j = 0; j < m; ++j)
            for (int k = j; k < m; ++k) gram[j][k] += grid.weights[i] * row[j] * row[k];
    }
    double gram_dev = 0.0;
    for (int j = 0; j < m; ++j)
        for (int k = j; k < m; ++k)
            gram_dev = std::max(gram_dev, std::abs(gram[j][k] - (j == k ? 1.0 : 0.0)));

    double bound_excess = 0.0;
    std::vector<double> long_row(static_cast<std::size_t>(bound_k_max) + 1);
    for (int i = 0; i < grid_points; ++i) {
        const double t = t_max * i / (grid_points - 1);
        lagreg::laguerre_fn_row(bound_k_max, t, long_row.data());
        for (int k = 0; k <= bound_k_max; ++k)
            bound_excess = std::max(bound_excess, std::abs(long_row[k]) - 1.0);
    }

    lagreg::ensure_out_dir(o.out_dir);
    const std::filesystem::path dir(o.out_dir);
    lagreg::JsonWriter w;
    w.begin_object();
    w.kv("tool_version", lagreg::version);
    w.kv("command", "basis-check");
    w.kv("gram_max_abs_deviation", gram_dev);
    w.kv("gram_within_1e-6", gram_dev <= 1e-6);
    w.kv("bound_max_excess", bound_excess);
    w.kv("bound_within_1e-9", bound_excess <= 1e-9);
    w.begin_object("config");
    w.kv("k_max", k_max);
    w.kv("b", b);
    w.kv("quad_order", quad_order);
    w.kv("bound_k_max", bound_k_max);
    w.kv("grid_points", grid_points);
    w.kv("t_max", t_max);
    w.end_object();
    w.end_object();
    lagreg::write_text_file((dir / "summary.json").string(), w.str(), o.overwrite);
    std::cout << "gram_max_abs_deviation=" << lagreg::format_g17(gram_dev)
              << " bound_max_excess=" << lagreg::format_g17(bound_excess) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laguerre hard-thresholding regression experiments"};
    app.set_version_flag("--version", lagreg::version);
    app.require_subcommand(1);

    CommonOpts sim_o, est_o, risk_o, var_o, noise_o, basis_o;
    add_common(app.add_subcommand("simulate", "draw one regression sample"), sim_o);
    add_common(app.add_subcommand("estimate", "fit the thresholded series on one sample"),
               est_o);
    add_common(app.add_subcommand("risk-study", "Monte Carlo risk-vs-n study"), risk_o);
    add_common(app.add_subcommand("variance-study",
                                  "Monte Carlo variance-vs-n study for one coefficient"),
               var_o);
    add_common(app.add_subcommand("noise-check",
                                  "pooled autocovariance of the long-memory generator"),
               noise_o);
    add_common(app.add_subcommand("basis-check", "orthonormality and bound checks"),
               basis_o);

    try {
        app.parse(argc, argv);
        if (app.got_subcommand("simulate")) run_simulate(sim_o);
        if (app.got_subcommand("estimate")) run_estimate(est_o);
        if (app.got_subcommand("risk-study")) run_risk_study(risk_o);
        if (app.got_subcommand("variance-study")) run_variance_study(var_o);
        if (app.got_subcommand("noise-check")) run_noise_check(noise_o);
        if (app.got_subcommand("basis-check")) run_basis_check(basis_o);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const lagreg::ConfigError& e) {
        std::cerr << json_error("config", e.what());
        return 2;
    } catch (const lagreg::IoError& e) {
        std::cerr << json_error("io", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::cerr << json_error("internal", e.what());
        return 4;
    }
}

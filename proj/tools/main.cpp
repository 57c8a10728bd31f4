// msrl: multivariate square-root lasso solver and simulation harness.
//
// Subcommands: fit, path, tune, simulate, verify. All matrix files are
// headerless CSV; structured outputs are JSON. Exit codes: 0 success,
// 2 usage, 3 data, 4 numerical.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "msrl/baselines.hpp"
#include "msrl/datagen.hpp"
#include "msrl/errors.hpp"
#include "msrl/harness.hpp"
#include "msrl/kernels.hpp"
#include "msrl/linalg.hpp"
#include "msrl/tuning.hpp"
#include "msrl/verification.hpp"

using json = nlohmann::json;
using namespace msrl;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void ensure_out_dir(const std::string& out) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw data_error("cannot create output directory '" + out + "'");
}

Dataset load_dataset(const std::string& x_path, const std::string& y_path, bool normalize) {
    const Mat x = read_csv(x_path);
    const Mat y = read_csv(y_path);
    if (x.rows() != y.rows())
        throw data_error("row count mismatch: '" + x_path + "' has " +
                         std::to_string(x.rows()) + " rows, '" + y_path + "' has " +
                         std::to_string(y.rows()));
    return center_and_normalize(y, x, normalize);
}

std::size_t residual_rank(const Dataset& data, const Mat& b) {
    const ThinSvd s = thin_svd(sub(data.y, matmul(data.x, b)));
    if (s.d.front() <= 0.0) return 0;
    std::size_t r = 0;
    while (r < s.d.size() && s.d[r] > 1e-8 * s.d.front()) ++r;
    return r;
}

std::size_t nonzero_count(const Mat& b) {
    std::size_t nnz = 0;
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j)
            if (b(i, j) != 0.0) ++nnz;
    return nnz;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

struct CommonOpts {
    std::string x_path, y_path, out_dir = ".";
    std::string penalty = "lasso";
    bool no_normalize = false;
    int threads = 0;
    std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opt, bool needs_data = true) {
    if (needs_data) {
        cmd->add_option("--x", opt.x_path, "predictor matrix CSV")->required();
        cmd->add_option("--y", opt.y_path, "response matrix CSV")->required();
        cmd->add_option("--penalty", opt.penalty, "penalty kind")
            ->check(CLI::IsMember({"lasso", "group", "nuclear"}));
        cmd->add_flag("--no-normalize", opt.no_normalize,
                      "skip rescaling predictor columns to norm sqrt(n)");
    }
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--threads", opt.threads,
                    "worker threads (default: machine, or MSRL_THREADS)");
    cmd->add_option("--seed", opt.seed, "random seed");
}

struct FitOpts {
    CommonOpts common;
    double lambda = -1.0;
    std::string solver = "auto";
    bool refit_flag = false;
    std::size_t cv_folds = 0;
    std::size_t n_lambda = 100;
    double min_ratio = 1e-4;
    std::string diagnostics;
};

int run_fit(const FitOpts& opt) {
    if (opt.lambda < 0.0 && opt.cv_folds == 0) {
        std::cerr << "fit: provide --lambda or select one via --cv K\n";
        return kExitUsage;
    }
    ensure_out_dir(opt.common.out_dir);
    const Dataset data =
        load_dataset(opt.common.x_path, opt.common.y_path, !opt.common.no_normalize);
    const PenaltyKind kind = penalty_from_name(opt.common.penalty);

    SolverConfigs cfgs;
    double lambda = opt.lambda;
    if (lambda < 0.0) {
        const double lmax = lambda_max(data, kind);
        const std::vector<double> grid =
            default_lambda_grid(lmax, opt.n_lambda, opt.min_ratio);
        const PathResult cv =
            cross_validate(data, kind, grid, opt.cv_folds, opt.common.seed, cfgs);
        lambda = cv.lambdas[cv.best_index];
    }
    const PenaltySpec pen{kind, lambda};

    std::ofstream diag_stream;
    IterationObserver observer;
    if (!opt.diagnostics.empty()) {
        diag_stream.open(opt.diagnostics);
        if (!diag_stream) throw data_error("cannot open '" + opt.diagnostics + "'");
        diag_stream << "iter,r,s,e_primal,e_dual,rho,objective\n";
        observer = [&](const SolverState& st, const IterationRecord& rec) {
            diag_stream << rec.iter << ',' << fmt(rec.r) << ',' << fmt(rec.s) << ','
                        << fmt(rec.e_primal) << ',' << fmt(rec.e_dual) << ','
                        << fmt(rec.rho) << ',' << fmt(objective_value(data, pen, st.b))
                        << "\n";
        };
    }

    FitResult fit;
    if (opt.solver == "admm" || observer) {
        fit = admm_fit(data, pen, cfgs.admm, nullptr, observer);
    } else if (opt.solver == "apgd") {
        if (data.n() <= data.q())
            throw data_error("apgd requires n > q; use --solver admm");
        ApgdResult res = apgd_fit(data, pen, cfgs.apgd);
        if (res.status == ApgdStatus::RankDeficient)
            throw numerical_error(
                "apgd hit a rank-deficient residual; rerun with --solver admm");
        fit = std::move(res.fit);
    } else {
        fit = hybrid_single_fit(data, pen, cfgs.admm, cfgs.apgd);
    }

    Mat beta = fit.b_hat;
    if (opt.refit_flag) beta = refit(data, beta);

    const Mat beta_raw = to_raw_scale(data, beta);
    write_csv(beta_raw, opt.common.out_dir + "/beta.csv");
    const std::vector<double> b0 = intercept_from(data, beta_raw);
    Mat intercept(1, b0.size());
    for (std::size_t k = 0; k < b0.size(); ++k) intercept(0, k) = b0[k];
    write_csv(intercept, opt.common.out_dir + "/intercept.csv");

    json report;
    report["lambda"] = lambda;
    report["penalty"] = opt.common.penalty;
    report["objective"] = objective_value(data, pen, beta);
    report["iterations"] = fit.iterations;
    report["solver"] = fit.solver;
    report["converged"] = fit.converged;
    report["refit"] = opt.refit_flag;
    try {
        report["kkt"] = kkt_residual(data, pen, beta);
    } catch (const rank_deficient_error&) {
        report["kkt"] = nullptr;
    }
    write_json(report, opt.common.out_dir + "/fit.json");
    return 0;
}

struct PathOpts {
    CommonOpts common;
    std::size_t n_lambda = 100;
    double min_ratio = 1e-4;
    std::size_t cv_folds = 0;
};

int run_path(const PathOpts& opt) {
    ensure_out_dir(opt.common.out_dir);
    const Dataset data =
        load_dataset(opt.common.x_path, opt.common.y_path, !opt.common.no_normalize);
    const PenaltyKind kind = penalty_from_name(opt.common.penalty);
    const double lmax = lambda_max(data, kind);
    const std::vector<double> grid = default_lambda_grid(lmax, opt.n_lambda, opt.min_ratio);
    SolverConfigs cfgs;

    std::vector<FitResult> fits;
    PathResult cv;
    if (opt.cv_folds > 0) {
        cv = cross_validate(data, kind, grid, opt.cv_folds, opt.common.seed, cfgs);
        fits = std::move(cv.fits);
    } else {
        fits = hybrid_path_fit(data, kind, grid, cfgs.admm, cfgs.apgd);
    }

    {
        std::ofstream out(opt.common.out_dir + "/path.csv");
        if (!out) throw data_error("cannot write path.csv");
        out << "lambda,objective,nonzeros,solver,residual_rank\n";
        for (std::size_t l = 0; l < grid.size(); ++l)
            out << fmt(grid[l]) << ',' << fmt(fits[l].objective) << ','
                << nonzero_count(fits[l].b_hat) << ',' << fits[l].solver << ','
                << residual_rank(data, fits[l].b_hat) << "\n";
    }

    if (opt.cv_folds > 0) {
        std::ofstream out(opt.common.out_dir + "/cv.csv");
        if (!out) throw data_error("cannot write cv.csv");
        out << "lambda,mean_error,std_error\n";
        for (std::size_t l = 0; l < grid.size(); ++l)
            out << fmt(grid[l]) << ',' << fmt(cv.cv[l].mean) << ','
                << fmt(cv.cv[l].std_error) << "\n";
        json best;
        best["argmin"] = grid[cv.best_index];
        best["one_se"] = grid[cv.one_se_index];
        write_json(best, opt.common.out_dir + "/best-lambda.json");
    }
    return 0;
}

struct TuneOpts {
    CommonOpts common;
    std::string mode = "mc";
    double c = 1.01;
    std::size_t draws = 5000;
    std::string levels = "0.5,0.75,0.85,0.95";
    double c1 = 1.01, c2 = 1.01, c3 = 1.01;
    bool write_samples = false;
};

int run_tune(const TuneOpts& opt) {
    ensure_out_dir(opt.common.out_dir);
    const Dataset data =
        load_dataset(opt.common.x_path, opt.common.y_path, !opt.common.no_normalize);
    const PenaltyKind kind = penalty_from_name(opt.common.penalty);

    json report;
    report["penalty"] = opt.common.penalty;
    report["mode"] = opt.mode;
    if (opt.mode == "mc") {
        if (data.n() < data.q())
            throw data_error("mc tuning draws O(n,q) matrices and needs n >= q; got n=" +
                             std::to_string(data.n()) + ", q=" + std::to_string(data.q()));
        const TuneDistribution dist = mc_tune(data, kind, opt.c, opt.draws, opt.common.seed);
        json by_level;
        std::stringstream levels(opt.levels);
        std::string token;
        while (std::getline(levels, token, ',')) {
            const double level = std::stod(token);
            by_level[token] = quantile(dist, level);
        }
        report["c"] = opt.c;
        report["draws"] = opt.draws;
        report["seed"] = opt.common.seed;
        report["lambda"] = by_level;
        if (opt.write_samples) {
            Mat samples(dist.samples.size(), 1);
            for (std::size_t i = 0; i < dist.samples.size(); ++i)
                samples(i, 0) = dist.samples[i];
            write_csv(samples, opt.common.out_dir + "/samples.csv");
        }
    } else {
        CorollaryConstants consts;
        consts.c = opt.c;
        consts.c1 = opt.c1;
        consts.c2 = opt.c2;
        consts.c3 = opt.c3;
        const double x_spec = spectral_norm(data.x);
        report["constants"] = {{"c", consts.c}, {"c1", consts.c1}, {"c2", consts.c2},
                               {"c3", consts.c3}};
        report["lambda"] =
            corollary_lambda(kind, data.n(), data.p(), data.q(), consts, x_spec);
    }
    write_json(report, opt.common.out_dir + "/tune.json");
    return 0;
}

struct SimulateOpts {
    CommonOpts common;
    std::string config_path;
    int reps = 1;
    std::string methods = "msr-cv,pls";
    std::size_t n_lambda = 100;
    std::size_t mc_draws = 5000;
};

SimDesign parse_design(const json& j) {
    SimDesign d;
    d.n = j.at("n").get<std::size_t>();
    d.p = j.at("p").get<std::size_t>();
    d.q = j.at("q").get<std::size_t>();
    const json& model = j.at("model");
    const std::string name = model.at("name").get<std::string>();
    if (name == "compound") {
        d.model = CovModel::CompoundSymmetry;
        d.xi = model.at("xi").get<double>();
    } else if (name == "condition") {
        d.model = CovModel::ConditionNumber;
        d.cond = model.at("cond").get<double>();
    } else if (name == "factor") {
        d.model = CovModel::Factor;
        d.factors = model.at("r").get<std::size_t>();
    } else {
        throw data_error("design model must be compound|condition|factor, got '" + name +
                         "'");
    }
    const std::string errors = j.value("errors", std::string("normal"));
    if (errors == "normal") d.errors = ErrorDist::Normal;
    else if (errors == "t5") d.errors = ErrorDist::StudentT5;
    else throw data_error("design errors must be normal|t5, got '" + errors + "'");
    const std::string beta = j.value("beta", std::string("elementwise"));
    if (beta == "elementwise") d.beta_scheme = BetaScheme::ElementwiseSparse;
    else if (beta == "row") d.beta_scheme = BetaScheme::RowSparse;
    else throw data_error("design beta must be elementwise|row, got '" + beta + "'");
    d.seed = j.value("seed", std::uint64_t{0});
    d.t_covariance_scaled = j.value("t_covariance_scaled", false);
    d.validate();
    return d;
}

int run_simulate(const SimulateOpts& opt) {
    ensure_out_dir(opt.common.out_dir);
    std::ifstream in(opt.config_path);
    if (!in) throw data_error("cannot open design config '" + opt.config_path + "'");
    json config;
    try {
        in >> config;
    } catch (const json::exception& e) {
        throw data_error("design config is not valid JSON: " + std::string(e.what()));
    }
    SimDesign design = parse_design(config);
    if (opt.common.seed != 0) design.seed = opt.common.seed;

    std::vector<std::string> methods;
    std::stringstream ss(opt.methods);
    std::string token;
    while (std::getline(ss, token, ',')) methods.push_back(token);
    try {
        validate_method_names(methods);
    } catch (const data_error& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    HarnessConfig hc;
    hc.n_lambda = opt.n_lambda;
    hc.mc_draws = opt.mc_draws;
    hc.refit_direct = config.value("refit", false);

    const std::vector<RepMetrics> rows = run_replications(design, methods, opt.reps, hc);

    {
        std::ofstream out(opt.common.out_dir + "/metrics.csv");
        if (!out) throw data_error("cannot write metrics.csv");
        out << "rep,method,lambda,frob_sq_error,tpr,fpr,weighted_pred_error,"
               "nuclear_pred_error,seconds\n";
        for (const RepMetrics& r : rows)
            out << r.rep << ',' << r.method << ',' << fmt(r.lambda) << ','
                << fmt(r.metrics.frob_sq_error) << ',' << fmt(r.metrics.tpr) << ','
                << fmt(r.metrics.fpr) << ',' << fmt(r.metrics.weighted_pred_error) << ','
                << fmt(r.metrics.nuclear_pred_error) << ',' << fmt(r.seconds) << "\n";
    }

    json summary;
    for (const std::string& method : methods) {
        std::vector<const RepMetrics*> mine;
        for (const RepMetrics& r : rows)
            if (r.method == method) mine.push_back(&r);
        auto mean_se = [&](auto pick) {
            double mean = 0.0;
            for (const RepMetrics* r : mine) mean += pick(*r);
            mean /= static_cast<double>(mine.size());
            double var = 0.0;
            for (const RepMetrics* r : mine) {
                const double d = pick(*r) - mean;
                var += d * d;
            }
            var = mine.size() > 1 ? var / static_cast<double>(mine.size() - 1) : 0.0;
            return std::pair<double, double>(
                mean, std::sqrt(var / static_cast<double>(mine.size())));
        };
        json m;
        const auto frob = mean_se([](const RepMetrics& r) { return r.metrics.frob_sq_error; });
        m["frob_sq_error"] = {{"mean", frob.first}, {"se", frob.second}};
        const auto tpr = mean_se([](const RepMetrics& r) { return r.metrics.tpr; });
        m["tpr"] = {{"mean", tpr.first}, {"se", tpr.second}};
        const auto fpr = mean_se([](const RepMetrics& r) { return r.metrics.fpr; });
        m["fpr"] = {{"mean", fpr.first}, {"se", fpr.second}};
        const auto wpe =
            mean_se([](const RepMetrics& r) { return r.metrics.weighted_pred_error; });
        m["weighted_pred_error"] = {{"mean", wpe.first}, {"se", wpe.second}};
        const auto npe =
            mean_se([](const RepMetrics& r) { return r.metrics.nuclear_pred_error; });
        m["nuclear_pred_error"] = {{"mean", npe.first}, {"se", npe.second}};
        const auto secs = mean_se([](const RepMetrics& r) { return r.seconds; });
        m["seconds"] = {{"mean", secs.first}, {"se", secs.second}};
        summary[method] = m;
    }
    write_json(summary, opt.common.out_dir + "/summary.json");
    return 0;
}

struct VerifyOpts {
    CommonOpts common;
    std::string beta_path;
    double lambda = 0.0;
    int trials = 200;
    double scale = 1e-2;
};

int run_verify(const VerifyOpts& opt) {
    const Dataset data =
        load_dataset(opt.common.x_path, opt.common.y_path, !opt.common.no_normalize);
    const PenaltyKind kind = penalty_from_name(opt.common.penalty);
    const Mat beta_raw = read_csv(opt.beta_path);
    if (beta_raw.rows() != data.p() || beta_raw.cols() != data.q())
        throw data_error("beta shape " + std::to_string(beta_raw.rows()) + "x" +
                         std::to_string(beta_raw.cols()) + " does not match p=" +
                         std::to_string(data.p()) + ", q=" + std::to_string(data.q()));
    // coefficients on disk are raw-scale; undo the column scaling
    Mat beta = beta_raw;
    for (std::size_t j = 0; j < beta.rows(); ++j)
        for (std::size_t k = 0; k < beta.cols(); ++k)
            beta(j, k) /= data.column_scales[j];

    const PenaltySpec pen{kind, opt.lambda};
    json report;
    try {
        report["kkt"] = kkt_residual(data, pen, beta);
    } catch (const rank_deficient_error& e) {
        report["kkt"] = nullptr;
        report["kkt_note"] = e.what();
    }
    const auto [lhs, rhs] = weighted_rss_identity(data, beta);
    report["identityGap"] = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
    try {
        Rng rng(opt.common.seed);
        const Lemma1Report lem = lemma1_check(data, pen, beta, opt.trials, opt.scale, rng);
        report["lemma1Violations"] = lem.violations;
    } catch (const rank_deficient_error& e) {
        report["lemma1Violations"] = nullptr;
        report["lemma1_note"] = e.what();
    }
    std::cout << report.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multivariate square-root lasso: solvers, tuning, simulation"};
    app.require_subcommand(1);

    FitOpts fit_opts;
    CLI::App* fit = app.add_subcommand("fit", "fit at a single tuning parameter");
    add_common(fit, fit_opts.common);
    fit->add_option("--lambda", fit_opts.lambda, "tuning parameter (>= 0)");
    fit->add_option("--solver", fit_opts.solver, "solver choice")
        ->check(CLI::IsMember({"auto", "admm", "apgd"}));
    fit->add_flag("--refit", fit_opts.refit_flag, "re-estimate on the selected support");
    fit->add_option("--cv", fit_opts.cv_folds, "choose lambda by K-fold cross-validation");
    fit->add_option("--nlambda", fit_opts.n_lambda, "grid size when tuning by --cv");
    fit->add_option("--min-ratio", fit_opts.min_ratio,
                    "grid floor as a fraction of lambda_max");
    fit->add_option("--diagnostics", fit_opts.diagnostics, "per-iteration CSV (forces admm)");

    PathOpts path_opts;
    CLI::App* path = app.add_subcommand("path", "solution path over a lambda grid");
    add_common(path, path_opts.common);
    path->add_option("--nlambda", path_opts.n_lambda, "grid size");
    path->add_option("--min-ratio", path_opts.min_ratio,
                     "grid floor as a fraction of lambda_max");
    path->add_option("--cv", path_opts.cv_folds, "also run K-fold cross-validation");

    TuneOpts tune_opts;
    CLI::App* tune = app.add_subcommand("tune", "tuning parameter selection");
    add_common(tune, tune_opts.common);
    tune->add_option("--mode", tune_opts.mode, "mc | corollary")
        ->check(CLI::IsMember({"mc", "corollary"}));
    tune->add_option("--c", tune_opts.c, "pivotal constant c > 1");
    tune->add_option("--draws", tune_opts.draws, "Monte-Carlo draws");
    tune->add_option("--levels", tune_opts.levels, "comma-separated quantile levels");
    tune->add_option("--c1", tune_opts.c1, "closed-form constant c1");
    tune->add_option("--c2", tune_opts.c2, "closed-form constant c2");
    tune->add_option("--c3", tune_opts.c3, "closed-form constant c3");
    tune->add_flag("--samples", tune_opts.write_samples, "also write samples.csv");

    SimulateOpts sim_opts;
    CLI::App* simulate = app.add_subcommand("simulate", "replication study from a JSON design");
    add_common(simulate, sim_opts.common, /*needs_data=*/false);
    simulate->add_option("--config", sim_opts.config_path, "design JSON")->required();
    simulate->add_option("--reps", sim_opts.reps, "replication count");
    simulate->add_option("--methods", sim_opts.methods, "comma-separated method names");
    simulate->add_option("--nlambda", sim_opts.n_lambda, "path grid size per method");
    simulate->add_option("--draws", sim_opts.mc_draws, "Monte-Carlo draws for msr-q*");

    VerifyOpts verify_opts;
    CLI::App* verify = app.add_subcommand("verify", "optimality and identity diagnostics");
    add_common(verify, verify_opts.common);
    verify->add_option("--beta", verify_opts.beta_path, "coefficient CSV (raw scale)")
        ->required();
    verify->add_option("--lambda", verify_opts.lambda, "tuning parameter")->required();
    verify->add_option("--trials", verify_opts.trials, "perturbation trials");
    verify->add_option("--scale", verify_opts.scale, "perturbation scale");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        CommonOpts* common = nullptr;
        if (fit->parsed()) common = &fit_opts.common;
        else if (path->parsed()) common = &path_opts.common;
        else if (tune->parsed()) common = &tune_opts.common;
        else if (simulate->parsed()) common = &sim_opts.common;
        else common = &verify_opts.common;
        if (common->threads > 0) set_threads(common->threads);
        effective_threads();

        if (fit->parsed()) return run_fit(fit_opts);
        if (path->parsed()) return run_path(path_opts);
        if (tune->parsed()) return run_tune(tune_opts);
        if (simulate->parsed()) return run_simulate(sim_opts);
        return run_verify(verify_opts);
    } catch (const rank_deficient_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const numerical_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

#include <sparselogit_cli/app.hpp>
#include <sparselogit_cli/csv.hpp>

#include <sparselogit/baselines.hpp>
#include <sparselogit/calibration.hpp>
#include <sparselogit/diagnostics.hpp>
#include <sparselogit/errors.hpp>
#include <sparselogit/simulation.hpp>
#include <sparselogit/solver.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <thread>

namespace sparselogit::cli {

namespace {

using json = nlohmann::ordered_json;

struct GridFlags {
    double lambda_max = 0.0;
    bool lambda_max_given = false;
    double min_ratio = 1e-4;
    std::size_t n_lambda = 500;
};

struct Flags {
    std::string input;
    std::string truth;
    std::string output;
    std::string trace_csv;
    GridFlags grid;
    double tol = 1e-7;
    int max_iter = 10'000;
    double constant_c = kDefaultConstantC;
    std::string method = "testing";
    std::string methods;
    std::string cv_loss = "deviance";
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool standardize = false;
    bool intercept = false;
    bool full_path = false;
    bool timing_mode = false;
    std::string preset;
    double lambda = 0.0;
    // simulate
    std::size_t n = 200, p = 200, s = 5, reps = 200;
    double kappa = 0.0;
    // Options given explicitly on the command line of the active subcommand.
    const CLI::App* active = nullptr;
    bool given(const char* name) const {
        const CLI::Option* opt = active->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    }
};

// Working design after optional standardization and intercept column.
struct Prepared {
    Dataset data;
    std::vector<std::string> names;
    std::size_t predictors = 0;
    bool intercept = false;
    bool standardized = false;
    Vector means;
    Vector scales;
    SolverOptions solver;
    IndexSet tested;  // predictor columns; empty means all
};

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

unsigned resolve_threads(unsigned threads) {
    return threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
}

json number_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

template <class T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

json one_based(const IndexSet& s) {
    json out = json::array();
    for (std::size_t j : s) out.push_back(j + 1);
    return out;
}

json mean_sd_json(const MeanSd& m) {
    return json{{"mean", m.mean}, {"sd", m.sd}};
}

std::vector<Method> parse_methods(const std::string& list) {
    std::vector<Method> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const std::size_t comma = list.find(',', start);
        const std::string name = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const auto method = parse_method(name);
        if (!method) throw ParameterError("unknown method '" + name + "' (expected testing, bic, cv or aic)");
        out.push_back(*method);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

CvLoss parse_loss(const std::string& name) {
    if (name == "deviance") return CvLoss::Deviance;
    if (name == "misclassification") return CvLoss::Misclassification;
    throw ParameterError("unknown CV loss '" + name + "'");
}

Prepared prepare(const Flags& flags, bool allow_intercept) {
    CsvTable table = read_data_csv(flags.input);
    const Eigen::Index n = table.X.rows();
    const Eigen::Index p = table.X.cols();
    const bool intercept = allow_intercept && flags.intercept;
    Matrix X = std::move(table.X);
    Vector means;
    Vector scales;
    if (flags.standardize) {
        if (n < 2) throw DataError("--standardize needs at least two rows");
        means = X.colwise().mean().transpose();
        scales.resize(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            const double sd = std::sqrt((X.col(j).array() - means[j]).square().sum() / static_cast<double>(n - 1));
            if (!(sd > 0.0)) {
                throw DataError("predictor column " + std::to_string(j + 1) + " is constant and cannot be standardized");
            }
            scales[j] = sd;
            X.col(j) = (X.col(j).array() - means[j]) / sd;
        }
    }
    SolverOptions solver;
    solver.tol = flags.tol;
    solver.max_iter = flags.max_iter;
    IndexSet tested;
    if (intercept) {
        Matrix W(n, p + 1);
        W << Vector::Ones(n), X;
        X = std::move(W);
        solver.penalty_factor.assign(static_cast<std::size_t>(p + 1), 1.0);
        solver.penalty_factor[0] = 0.0;
        for (std::size_t j = 1; j <= static_cast<std::size_t>(p); ++j) tested.push_back(j);
    }
    return Prepared{Dataset(std::move(X), std::move(table.y)), std::move(table.names), static_cast<std::size_t>(p),
                    intercept, flags.standardize, std::move(means), std::move(scales), std::move(solver),
                    std::move(tested)};
}

LambdaGrid resolve_grid(const GridFlags& flags, std::size_t n, std::size_t p) {
    if (flags.lambda_max_given) {
        return linear_grid(flags.lambda_max, flags.min_ratio, flags.n_lambda);
    }
    if (p < 2) throw ParameterError("--lambda-max is required when there is a single predictor");
    return linear_grid(10.0 * std::log(static_cast<double>(p)) / static_cast<double>(n), flags.min_ratio,
                       flags.n_lambda);
}

// Predictor index (0-based, original columns) of a working column, or -1 for the intercept.
long predictor_of(const Prepared& prep, std::size_t column) {
    return prep.intercept ? static_cast<long>(column) - 1 : static_cast<long>(column);
}

IndexSet predictor_support(const Prepared& prep, const IndexSet& working) {
    IndexSet out;
    for (std::size_t j : working) {
        const long k = predictor_of(prep, j);
        if (k >= 0) out.push_back(static_cast<std::size_t>(k));
    }
    return out;
}

// Coefficients on the original predictor scale plus the intercept they imply.
json coefficient_block(const Prepared& prep, const Coefficients& beta) {
    json coefficients = json::array();
    double intercept = prep.intercept ? beta[0] : 0.0;
    for (std::size_t j = 0; j < prep.predictors; ++j) {
        double value = beta[static_cast<Eigen::Index>(j + (prep.intercept ? 1 : 0))];
        if (value == 0.0) continue;
        if (prep.standardized) {
            value /= prep.scales[static_cast<Eigen::Index>(j)];
            intercept -= prep.means[static_cast<Eigen::Index>(j)] * value;
        }
        json entry{{"index", j + 1}};
        if (!prep.names.empty()) entry["name"] = prep.names[j];
        entry["value"] = value;
        coefficients.push_back(std::move(entry));
    }
    json out;
    out["intercept"] = prep.intercept || prep.standardized ? json(intercept) : json(nullptr);
    out["coefficients"] = std::move(coefficients);
    return out;
}

json grid_parameters(const LambdaGrid& grid, const GridFlags& flags) {
    return json{{"lambda_max", grid.back()},
                {"lambda_min_ratio", flags.min_ratio},
                {"n_lambda", grid.size()},
                {"lambda_max_source", flags.lambda_max_given ? "flag" : "10 log(p) / n"}};
}

json solver_parameters(const Flags& flags) {
    return json{{"tol", flags.tol}, {"max_iter", flags.max_iter}};
}

json manifest(const std::string& command, const Flags& flags, json parameters) {
    json m;
    m["tool"] = "sparselogit";
    m["version"] = std::string(kToolVersion);
    m["command"] = command;
    m["input"] = flags.input.empty() ? json(nullptr) : json(flags.input);
    if (command == "diagnose") m["truth"] = flags.truth;
    m["output"] = flags.output.empty() ? json(nullptr) : json(flags.output);
    m["seed"] = flags.seed;
    m["parameters"] = std::move(parameters);
    return m;
}

json envelope(const std::string& command, json manifest_json, json result, const Flags& flags) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = command;
    doc["manifest"] = std::move(manifest_json);
    doc["result"] = std::move(result);
    // Not part of the reproducible record.
    doc["runtime"] = json{{"threads", resolve_threads(flags.threads)}, {"timestamp", utc_timestamp()}};
    return doc;
}

json data_parameters(const Prepared& prep) {
    return json{{"n", prep.data.n()},
                {"p", prep.predictors},
                {"standardize", prep.standardized},
                {"intercept", prep.intercept}};
}

json cmd_fit_path(const Flags& flags) {
    const Prepared prep = prepare(flags, true);
    const LambdaGrid grid = resolve_grid(flags.grid, static_cast<std::size_t>(prep.data.n()), prep.predictors);
    const RegularizationPath path = fit_path(prep.data, grid, prep.solver);

    json points = json::array();
    for (std::size_t k = 0; k < path.points.size(); ++k) {
        const PathPoint& pt = path.points[k];
        json entry{{"index", k + 1},
                   {"lambda", pt.lambda},
                   {"converged", pt.converged},
                   {"iterations", pt.iterations},
                   {"kkt_residual", pt.kkt_residual},
                   {"df", predictor_support(prep, support_of(pt.beta)).size()}};
        entry.update(coefficient_block(prep, pt.beta));
        points.push_back(std::move(entry));
    }
    json result;
    result["lambda_zero_threshold"] = prep.intercept ? json(nullptr) : json(lambda_zero_threshold(prep.data));
    result["path"] = std::move(points);

    json params = data_parameters(prep);
    params["grid"] = grid_parameters(grid, flags.grid);
    params["solver"] = solver_parameters(flags);
    return envelope("fit-path", manifest("fit-path", flags, std::move(params)), std::move(result), flags);
}

json trace_json(const std::vector<TestRecord>& trace) {
    json out = json::array();
    for (const TestRecord& rec : trace) {
        out.push_back(json{{"index", rec.index + 1},
                           {"lambda", rec.lambda},
                           {"statistic", rec.statistic},
                           {"passed", rec.passed}});
    }
    return out;
}

json cmd_calibrate(const Flags& flags) {
    const Prepared prep = prepare(flags, true);
    const LambdaGrid grid = resolve_grid(flags.grid, static_cast<std::size_t>(prep.data.n()), prep.predictors);
    const Method method = parse_methods(flags.method).at(0);
    if (parse_methods(flags.method).size() != 1) throw ParameterError("--method takes a single method");

    json result;
    result["method"] = std::string(method_name(method));
    if (method == Method::Testing) {
        CalibrationResult cal;
        if (flags.full_path) {
            const RegularizationPath path = fit_path(prep.data, grid, prep.solver);
            const TestingSelection sel = select_lambda_testing(path, flags.constant_c, prep.tested);
            cal.lambda_hat = sel.lambda_hat;
            cal.lambda_index = sel.lambda_index;
            cal.beta_hat = path.points[sel.lambda_index].beta;
            cal.support_hat = thresholded_support(cal.beta_hat, flags.constant_c, sel.lambda_hat, prep.tested);
            cal.test_trace = sel.trace;
            cal.fitted_points = grid.size();
        } else {
            cal = calibrate(prep.data, grid, flags.constant_c, prep.solver, prep.tested);
        }
        result["lambda_hat"] = cal.lambda_hat;
        result["lambda_index"] = cal.lambda_index + 1;
        result["constant_c"] = flags.constant_c;
        result["threshold"] = 3.0 * flags.constant_c * cal.lambda_hat;
        result["support"] = one_based(predictor_support(prep, cal.support_hat));
        result.update(coefficient_block(prep, cal.beta_hat));
        result["fitted_points"] = cal.fitted_points;
        result["test_trace"] = trace_json(cal.test_trace);
        result["warnings"] = json::array();
    } else {
        SelectionOutcome outcome;
        if (method == Method::CV) {
            CvOptions cv;
            cv.folds = flags.folds;
            cv.seed = flags.seed;
            cv.loss = parse_loss(flags.cv_loss);
            cv.threads = resolve_threads(flags.threads);
            outcome = select_cross_validation(prep.data, grid, cv, prep.solver);
        } else {
            outcome = selection_from_path(prep.data, fit_path(prep.data, grid, prep.solver), method);
        }
        result["lambda_hat"] = outcome.lambda;
        result["lambda_index"] = outcome.lambda_index + 1;
        result["support"] = one_based(predictor_support(prep, support_of(outcome.beta)));
        result.update(coefficient_block(prep, outcome.beta));
        result["fitted_points"] = method == Method::CV ? grid.size() * (flags.folds + 1) : grid.size();
        json scores = json::array();
        for (double v : outcome.score_trace) scores.push_back(number_or_null(v));
        result["score_trace"] = std::move(scores);
        result["warnings"] = outcome.warnings;
    }

    json params = data_parameters(prep);
    params["method"] = std::string(method_name(method));
    params["grid"] = grid_parameters(grid, flags.grid);
    params["solver"] = solver_parameters(flags);
    if (method == Method::Testing) {
        params["constant_c"] = flags.constant_c;
        params["full_path"] = flags.full_path;
    }
    if (method == Method::CV) {
        params["folds"] = flags.folds;
        params["cv_loss"] = flags.cv_loss;
    }
    return envelope("calibrate", manifest("calibrate", flags, std::move(params)), std::move(result), flags);
}

SimulationConfig simulation_config(const Flags& flags) {
    SimulationConfig config;
    if (!flags.preset.empty()) {
        if (flags.preset != "fig1-desk") throw ParameterError("unknown preset '" + flags.preset + "'");
        config = fig1_desk_config();
    }
    if (flags.preset.empty() || flags.given("--n")) config.n = flags.n;
    if (flags.preset.empty() || flags.given("--p")) config.p = flags.p;
    if (flags.preset.empty() || flags.given("--s")) config.s = flags.s;
    if (flags.preset.empty() || flags.given("--kappa")) config.kappa = flags.kappa;
    if (flags.preset.empty() || flags.given("--reps")) config.n_reps = flags.reps;
    if (flags.preset.empty() || flags.given("--n-lambda")) config.n_lambda = flags.grid.n_lambda;
    if (flags.given("--methods")) config.methods = parse_methods(flags.methods);
    config.constant_c = flags.constant_c;
    config.folds = flags.folds;
    config.seed = flags.seed;
    config.solver.tol = flags.tol;
    config.solver.max_iter = flags.max_iter;
    return config;
}

json cmd_simulate(const Flags& flags) {
    const SimulationConfig config = simulation_config(flags);
    validate(config);
    const ExperimentSummary summary =
        run_experiment(config, ExperimentRun{resolve_threads(flags.threads), flags.timing_mode});

    json methods = json::array();
    for (const MethodSummary& m : summary.methods) {
        methods.push_back(json{{"method", std::string(method_name(m.method))},
                               {"replications", m.replications},
                               {"failures", m.failures},
                               {"hamming", mean_sd_json(m.hamming)},
                               {"model_size", mean_sd_json(m.model_size)},
                               {"seconds", m.seconds ? mean_sd_json(*m.seconds) : json(nullptr)},
                               {"median_seconds", optional_json(m.median_seconds)}});
    }
    json records = json::array();
    for (const ReplicationRecord& rec : summary.records) {
        records.push_back(json{{"rep", rec.rep + 1},
                               {"method", std::string(method_name(rec.method))},
                               {"ok", rec.ok},
                               {"lambda", rec.ok ? json(rec.lambda) : json(nullptr)},
                               {"hamming", rec.ok ? json(rec.hamming) : json(nullptr)},
                               {"model_size", rec.ok ? json(rec.model_size) : json(nullptr)},
                               {"seconds", optional_json(rec.seconds)},
                               {"failure", rec.ok ? json(nullptr) : json(rec.failure)}});
    }

    if (!flags.trace_csv.empty()) {
        std::ofstream trace(flags.trace_csv);
        if (!trace) throw DataError("cannot write " + flags.trace_csv);
        trace << "rep,method,lambda,hamming,seconds\n";
        trace.precision(17);
        for (const ReplicationRecord& rec : summary.records) {
            trace << rec.rep + 1 << ',' << method_name(rec.method) << ',';
            if (rec.ok) trace << rec.lambda << ',' << rec.hamming;
            else trace << ',';
            trace << ',';
            if (rec.seconds) trace << *rec.seconds;
            trace << '\n';
        }
    }

    json method_names = json::array();
    for (Method m : config.methods) method_names.push_back(std::string(method_name(m)));
    json params{{"preset", flags.preset.empty() ? json(nullptr) : json(flags.preset)},
                {"n", config.n},
                {"p", config.p},
                {"kappa", config.kappa},
                {"s", config.s},
                {"n_lambda", config.n_lambda},
                {"reps", config.n_reps},
                {"methods", method_names},
                {"constant_c", config.constant_c},
                {"folds", config.folds},
                {"timing_mode", flags.timing_mode},
                {"trace_csv", flags.trace_csv.empty() ? json(nullptr) : json(flags.trace_csv)},
                {"solver", solver_parameters(flags)}};
    json result{{"methods", std::move(methods)}, {"records", std::move(records)}};
    return envelope("simulate", manifest("simulate", flags, std::move(params)), std::move(result), flags);
}

json cmd_evaluate(const Flags& flags) {
    const Prepared prep = prepare(flags, false);
    if (prep.data.n() < 2) throw DataError("evaluation needs at least two samples");
    const LambdaGrid grid = resolve_grid(flags.grid, static_cast<std::size_t>(prep.data.n()), prep.predictors);
    const std::vector<Method> methods = parse_methods(flags.methods.empty() ? flags.method : flags.methods);

    json reports = json::array();
    for (Method method : methods) {
        SelectorConfig config;
        config.method = method;
        config.constant_c = flags.constant_c;
        config.solver = prep.solver;
        config.cv.folds = flags.folds;
        config.cv.seed = flags.seed;
        config.cv.loss = parse_loss(flags.cv_loss);
        const EvaluationReport report = loocv_evaluate(prep.data, grid, config, resolve_threads(flags.threads));
        reports.push_back(json{{"method", std::string(method_name(method))},
                               {"runs", report.runs},
                               {"failed", report.failed},
                               {"model_size", mean_sd_json(report.model_size)},
                               {"loocv_error", mean_sd_json(report.loocv_error)},
                               {"loocv_refit_error", mean_sd_json(report.loocv_refit_error)},
                               {"failures", report.failures}});
    }

    json method_names = json::array();
    for (Method m : methods) method_names.push_back(std::string(method_name(m)));
    json params = data_parameters(prep);
    params["methods"] = std::move(method_names);
    params["grid"] = grid_parameters(grid, flags.grid);
    params["solver"] = solver_parameters(flags);
    params["constant_c"] = flags.constant_c;
    params["folds"] = flags.folds;
    params["cv_loss"] = flags.cv_loss;
    return envelope("evaluate", manifest("evaluate", flags, std::move(params)), json{{"reports", std::move(reports)}},
                    flags);
}

json cmd_diagnose(const Flags& flags) {
    if (flags.truth.empty()) {
        throw ParameterError("diagnose requires --truth: the design diagnostics are defined at a known beta*");
    }
    const CsvTable table = read_data_csv(flags.input);
    const Dataset data(table.X, table.y);
    const Vector beta_star = read_vector_csv(flags.truth);
    if (beta_star.size() != data.p()) {
        throw DataError(flags.truth + ": expected " + std::to_string(data.p()) + " coefficients, found " +
                        std::to_string(beta_star.size()));
    }
    const IndexSet support = support_of(beta_star);
    const AssumptionDiagnostics d = assumption_quantities(data.X(), beta_star, support);

    json result{{"support", one_based(support)},
                {"support_size", d.support_size},
                {"c_min", optional_json(d.c_min)},
                {"c_max", d.c_max},
                {"gamma", optional_json(d.gamma)},
                {"a", optional_json(d.a)},
                {"c_b", d.c_b},
                {"lambda_cap", optional_json(d.lambda_cap)},
                {"assumptions_hold", d.assumptions_hold}};

    const Vector eps = residuals(data, beta_star);
    std::optional<double> lambda;
    std::string lambda_source;
    if (flags.given("--lambda")) {
        if (!(flags.lambda > 0.0)) throw ParameterError("--lambda must be positive");
        lambda = flags.lambda;
        lambda_source = "flag";
    } else if (d.lambda_cap) {
        lambda = *d.lambda_cap;
        lambda_source = "lambda_cap";
    }
    const bool gamma_ok = d.gamma && *d.gamma > 0.0 && *d.gamma <= 1.0;
    json event;
    event["lambda"] = optional_json(lambda);
    event["lambda_source"] = lambda ? json(lambda_source) : json(nullptr);
    event["threshold"] = gamma_ok ? json(event_threshold(data.X(), eps, *d.gamma)) : json(nullptr);
    event["holds"] = gamma_ok && lambda ? json(event_holds(data.X(), eps, *d.gamma, *lambda)) : json(nullptr);
    event["lambda_within_cap"] = lambda && d.lambda_cap ? json(*lambda <= *d.lambda_cap) : json(nullptr);
    event["sup_norm_bound"] =
        d.assumptions_hold && lambda ? json(theorem1_bound(d, *lambda)) : json(nullptr);
    result["event"] = std::move(event);

    json params{{"n", data.n()}, {"p", data.p()}, {"lambda", flags.given("--lambda") ? json(flags.lambda) : json(nullptr)}};
    return envelope("diagnose", manifest("diagnose", flags, std::move(params)), std::move(result), flags);
}

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("-o,--output", f.output, "Write the JSON report here instead of stdout");
    sub->add_option("--seed", f.seed, "Random seed")->capture_default_str();
    sub->add_option("--threads", f.threads, "Worker threads (0 = all cores)")->capture_default_str();
    sub->add_option("--tol", f.tol, "KKT sup-norm tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", f.max_iter, "Coordinate sweeps per lambda")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_grid(CLI::App* sub, Flags& f) {
    sub->add_option("--lambda-max", f.grid.lambda_max,
                                            "Largest lambda (default 10 log(p) / n)")->check(CLI::PositiveNumber);
    sub->add_option("--lambda-min-ratio", f.grid.min_ratio, "Smallest lambda as a fraction of the largest")
        ->capture_default_str();
    sub->add_option("--n-lambda", f.grid.n_lambda, "Number of equally spaced lambdas")
                         ->capture_default_str();
}

void add_data(CLI::App* sub, Flags& f, bool intercept) {
    sub->add_option("input", f.input, "CSV file: first column y in {0,1}, then predictors")->required();
    sub->add_flag("--standardize", f.standardize, "Center and scale predictors; report original-scale coefficients");
    if (intercept) sub->add_flag("--intercept", f.intercept, "Add an unpenalized intercept");
}

}  // namespace

SimulationConfig fig1_desk_config() {
    SimulationConfig config;
    config.n = 200;
    config.p = 200;
    config.kappa = 0.5;
    config.s = 5;
    config.n_lambda = 500;
    config.n_reps = 50;
    config.methods = {Method::Testing, Method::BIC, Method::CV, Method::AIC};
    config.folds = 10;
    return config;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse logistic regression with testing-based tuning parameter calibration", "sparselogit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));
    Flags f;

    CLI::App* fit = app.add_subcommand("fit-path", "Fit the l1-penalized path over a lambda grid");
    add_data(fit, f, true);
    add_grid(fit, f);
    add_common(fit, f);

    CLI::App* cal = app.add_subcommand("calibrate", "Select lambda and the support");
    add_data(cal, f, true);
    add_grid(cal, f);
    add_common(cal, f);
    cal->add_option("--constant-c", f.constant_c, "Test constant C")->capture_default_str()->check(CLI::NonNegativeNumber);
    cal->add_option("--method", f.method, "testing, bic, cv or aic")->capture_default_str();
    cal->add_option("--folds", f.folds, "Cross-validation folds")->capture_default_str();
    cal->add_option("--cv-loss", f.cv_loss, "deviance or misclassification")->capture_default_str();
    cal->add_flag("--full-path", f.full_path, "Fit the whole path before testing instead of stopping early");

    CLI::App* sim = app.add_subcommand("simulate", "Run the simulation study");
    add_common(sim, f);
    sim->add_option("--preset", f.preset, "fig1-desk");
    sim->add_option("--n", f.n, "Samples")->capture_default_str();
    sim->add_option("--p", f.p, "Predictors")->capture_default_str();
    sim->add_option("--kappa", f.kappa, "Equicorrelation")->capture_default_str();
    sim->add_option("--s", f.s, "Sparsity")->capture_default_str();
    sim->add_option("--reps", f.reps, "Replications")->capture_default_str();
    sim->add_option("--n-lambda", f.grid.n_lambda, "Grid size")->capture_default_str();
    sim->add_option("--methods", f.methods, "Comma-separated methods (default all four)");
    sim->add_option("--constant-c", f.constant_c, "Test constant C")->capture_default_str()->check(CLI::NonNegativeNumber);
    sim->add_option("--folds", f.folds, "Cross-validation folds")->capture_default_str();
    sim->add_flag("--timing-mode", f.timing_mode, "Sequential run with per-method wall-clock times");
    sim->add_option("--trace-csv", f.trace_csv, "Per-replication CSV trace");

    CLI::App* eval = app.add_subcommand("evaluate", "Leave-one-out evaluation of calibration methods");
    add_data(eval, f, false);
    add_grid(eval, f);
    add_common(eval, f);
    eval->add_option("--method", f.method, "Single method")->capture_default_str();
    eval->add_option("--methods", f.methods, "Comma-separated methods (overrides --method)");
    eval->add_option("--constant-c", f.constant_c, "Test constant C")->capture_default_str()->check(CLI::NonNegativeNumber);
    eval->add_option("--folds", f.folds, "Cross-validation folds")->capture_default_str();
    eval->add_option("--cv-loss", f.cv_loss, "deviance or misclassification")->capture_default_str();

    CLI::App* diag = app.add_subcommand("diagnose", "Design diagnostics at a known true coefficient vector");
    diag->add_option("input", f.input, "CSV data file")->required();
    diag->add_option("--truth", f.truth, "CSV with the p true coefficients");
    diag->add_option("--lambda", f.lambda, "Evaluate the noise event at this lambda");
    add_common(diag, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    for (CLI::App* sub : {fit, cal, sim, eval, diag}) {
        if (sub->parsed()) f.active = sub;
    }
    f.grid.lambda_max_given = f.given("--lambda-max");

    try {
        json doc;
        if (fit->parsed()) doc = cmd_fit_path(f);
        else if (cal->parsed()) doc = cmd_calibrate(f);
        else if (sim->parsed()) doc = cmd_simulate(f);
        else if (eval->parsed()) doc = cmd_evaluate(f);
        else doc = cmd_diagnose(f);

        const std::string text = doc.dump(2) + "\n";
        if (f.output.empty()) {
            out << text;
        } else {
            std::ofstream file(f.output);
            if (!file) throw DataError("cannot write " + f.output);
            file << text;
        }
        return kOk;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kData;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const CalibrationError& e) {
        err << "calibration failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumeric;
    }
}

}  // namespace sparselogit::cli

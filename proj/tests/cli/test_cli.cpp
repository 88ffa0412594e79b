#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sparselogit/errors.hpp>
#include <sparselogit_cli/app.hpp>
#include <sparselogit_cli/csv.hpp>

#include "cli_harness.hpp"

using namespace sparselogit;
using sparselogit::testing::Invocation;
using sparselogit::testing::invoke;
using sparselogit::testing::json;
using sparselogit::testing::kCalibrateArgs;
using sparselogit::testing::kDiagnoseArgs;
using sparselogit::testing::kEvaluateArgs;
using sparselogit::testing::kSimulateArgs;
using sparselogit::testing::reproducible;
namespace fs = std::filesystem;

namespace {

json run_json(const std::vector<std::string>& args) {
    const Invocation inv = invoke(args);
    INFO(inv.err);
    REQUIRE(inv.code == 0);
    json doc = json::parse(inv.out);
    REQUIRE(doc.contains("runtime"));
    CHECK(doc["runtime"].contains("timestamp"));
    doc.erase("runtime");
    return doc;
}

void check_golden(const std::string& name, const json& doc) {
    const std::string mismatch = sparselogit::testing::golden_mismatch(name, doc);
    INFO(mismatch);
    CHECK(mismatch.empty());
}

std::vector<std::string> with(std::vector<std::string> args, std::initializer_list<std::string> extra) {
    args.insert(args.end(), extra);
    return args;
}

}  // namespace

TEST_CASE("csv reader") {
    fs::current_path(SPARSELOGIT_TESTS_DIR);
    const cli::CsvTable table = cli::read_data_csv("data/small.csv");
    CHECK(table.X.rows() == 50);
    CHECK(table.X.cols() == 10);
    CHECK(table.names.front() == "x1");

    const cli::CsvTable bare = cli::read_data_csv("data/tiny.csv");
    CHECK(bare.names.empty());
    CHECK(bare.X.rows() == 3);
    CHECK(bare.y[1] == 0.0);
    CHECK(bare.X(1, 1) == 2.0);

    const fs::path tmp = fs::temp_directory_path() / "sparselogit_bad.csv";
    auto expect_error = [&](const std::string& body, const std::string& fragment) {
        std::ofstream(tmp) << body;
        try {
            cli::read_data_csv(tmp.string());
            FAIL("expected a data error");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find(fragment) != std::string::npos);
        }
    };
    expect_error("y,a\n1,2\n0,x\n", ":3:");
    expect_error("1,2\n0,1,3\n", ":2: expected 2 fields");
    expect_error("1,2\n\n2,1\n", ":3: response must be 0 or 1");
    expect_error("y,a\n", "no data rows");
    fs::remove(tmp);
}

TEST_CASE("exit codes") {
    CHECK(invoke({}).code == cli::kUsage);
    CHECK(invoke({"calibrate"}).code == cli::kUsage);
    CHECK(invoke({"calibrate", "data/small.csv", "--method", "lasso"}).code == cli::kUsage);
    CHECK(invoke({"simulate", "--kappa", "1.0", "--reps", "1"}).code == cli::kUsage);
    CHECK(invoke({"calibrate", "data/missing.csv"}).code == cli::kData);
    const Invocation no_truth = invoke({"diagnose", "data/small.csv"});
    CHECK(no_truth.code == cli::kUsage);
    CHECK(no_truth.err.find("--truth") != std::string::npos);
    CHECK(invoke({"diagnose", "data/small.csv", "--truth", "data/tiny.csv"}).code == cli::kData);
    CHECK(invoke({"calibrate", "data/small.csv", "--max-iter", "1", "--tol", "1e-12"}).code == cli::kNumeric);
    CHECK(invoke({"calibrate", "--help"}).code == cli::kOk);
}

TEST_CASE("calibrate") {
    SUBCASE("huge single-lambda grid on a hand-written file gives the empty model") {
        const json doc = run_json({"calibrate", "data/tiny.csv", "--lambda-max", "100", "--n-lambda", "1"});
        CHECK(doc["result"]["support"].empty());
        CHECK(doc["result"]["coefficients"].empty());
        CHECK(doc["result"]["lambda_index"] == 1);
    }
    SUBCASE("repeated runs are byte-identical apart from the runtime block") {
        const Invocation a = invoke(kCalibrateArgs);
        const Invocation b = invoke(kCalibrateArgs);
        CHECK(reproducible(a.out) == reproducible(b.out));
        CHECK(reproducible(invoke(with(kCalibrateArgs, {"--method", "cv", "--threads", "1"})).out) ==
              reproducible(invoke(with(kCalibrateArgs, {"--method", "cv", "--threads", "4"})).out));
    }
    SUBCASE("golden file, and early stopping agrees with the full-path run") {
        const json early = run_json(kCalibrateArgs);
        check_golden("calibrate", early);
        const json full = run_json(with(kCalibrateArgs, {"--full-path"}));
        check_golden("calibrate_full_path", full);
        for (const char* key : {"lambda_hat", "lambda_index", "support", "coefficients"})
            CHECK(early["result"][key] == full["result"][key]);
        CHECK(early["result"]["fitted_points"] <= full["result"]["fitted_points"]);
    }
    SUBCASE("manifest records the resolved parameters") {
        const json doc = run_json(kCalibrateArgs);
        const json& m = doc["manifest"];
        CHECK(doc["schema_version"] == cli::kSchemaVersion);
        CHECK(m["command"] == "calibrate");
        CHECK(m["input"] == "data/small.csv");
        CHECK(m["parameters"]["grid"]["n_lambda"] == 100);
        CHECK(m["parameters"]["constant_c"] == 1.5);
    }
    SUBCASE("standardized fit reports original-scale coefficients") {
        const json doc = run_json({"calibrate", "data/small.csv", "--n-lambda", "100", "--standardize",
                                   "--method", "bic"});
        CHECK(doc["result"]["intercept"].is_number());
        CHECK_FALSE(doc["result"]["coefficients"].empty());
    }
}

TEST_CASE("fit-path golden file") {
    check_golden("fit_path", run_json({"fit-path", "data/small.csv", "--n-lambda", "20"}));
}

TEST_CASE("simulate") {
    SUBCASE("byte-stable across repeats and thread counts") {
        const std::string one = reproducible(invoke(with(kSimulateArgs, {"--threads", "1"})).out);
        CHECK(one == reproducible(invoke(with(kSimulateArgs, {"--threads", "1"})).out));
        CHECK(one == reproducible(invoke(with(kSimulateArgs, {"--threads", "3"})).out));
    }
    SUBCASE("golden file") {
        check_golden("simulate", run_json(kSimulateArgs));
    }
    SUBCASE("single replication summary") {
        const json doc = run_json({"simulate", "--reps", "1", "--methods", "testing", "--p", "50", "--n", "200",
                                   "--kappa", "0", "--s", "3", "--seed", "7"});
        REQUIRE(doc["result"]["methods"].size() == 1);
        CHECK(doc["result"]["methods"][0]["hamming"]["sd"] == 0.0);
        CHECK(doc["result"]["methods"][0]["seconds"].is_null());
    }
    SUBCASE("two-point grid") {
        const json doc = run_json({"simulate", "--reps", "1", "--methods", "testing,bic", "--p", "30",
                                   "--n", "60", "--n-lambda", "2"});
        CHECK(doc["manifest"]["parameters"]["n_lambda"] == 2);
    }
    SUBCASE("preset") {
        // Only the resolved configuration is checked; the full preset is the acceptance workload.
        const json doc = run_json({"simulate", "--preset", "fig1-desk", "--reps", "1", "--methods", "testing"});
        const json& p = doc["manifest"]["parameters"];
        CHECK(p["n"] == 200);
        CHECK(p["p"] == 200);
        CHECK(p["kappa"] == 0.5);
        CHECK(p["s"] == 5);
        CHECK(p["n_lambda"] == 500);
    }
    SUBCASE("trace csv") {
        const fs::path trace = fs::temp_directory_path() / "sparselogit_trace.csv";
        run_json(with(kSimulateArgs, {"--trace-csv", trace.string()}));
        std::ifstream in(trace);
        std::string header;
        std::getline(in, header);
        CHECK(header == "rep,method,lambda,hamming,seconds");
        std::size_t rows = 0;
        for (std::string line; std::getline(in, line);) ++rows;
        CHECK(rows == 16);
        fs::remove(trace);
    }
}

TEST_CASE("evaluate") {
    SUBCASE("empty model") {
        const json doc = run_json({"evaluate", "data/small.csv", "--lambda-max", "100", "--n-lambda", "1"});
        const json& r = doc["result"]["reports"][0];
        CHECK(r["model_size"]["mean"] == 0.0);
        // Probability exactly 1/2 is classified as 1: the error is the share of zeros.
        CHECK(r["loocv_error"]["mean"].get<double>() == doctest::Approx(29.0 / 50.0));
    }
    SUBCASE("deterministic across thread counts") {
        CHECK(reproducible(invoke(with(kEvaluateArgs, {"--threads", "1"})).out) ==
              reproducible(invoke(with(kEvaluateArgs, {"--threads", "3"})).out));
    }
    SUBCASE("golden file") {
        check_golden("evaluate", run_json(kEvaluateArgs));
    }
}

TEST_CASE("diagnose") {
    SUBCASE("null truth leaves the support quantities undefined") {
        const fs::path zero = fs::temp_directory_path() / "sparselogit_zero_truth.csv";
        std::ofstream(zero) << "0\n0\n0\n0\n0\n0\n0\n0\n0\n0\n";
        const json doc = run_json({"diagnose", "data/small.csv", "--truth", zero.string()});
        CHECK(doc["result"]["support"].empty());
        CHECK(doc["result"]["c_min"].is_null());
        CHECK(doc["result"]["assumptions_hold"] == false);
        fs::remove(zero);
    }
    SUBCASE("deterministic") {
        CHECK(reproducible(invoke(kDiagnoseArgs).out) == reproducible(invoke(kDiagnoseArgs).out));
    }
    SUBCASE("golden file") {
        check_golden("diagnose", run_json(with(kDiagnoseArgs, {"--lambda", "0.5"})));
    }
}

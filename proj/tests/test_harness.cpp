#include "stpr/harness.hpp"

#include "stpr/model_io.hpp"
#include "stpr/svg.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

namespace {

struct TempPath {
    std::string path;
    explicit TempPath(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {}
    ~TempPath() { std::remove(path.c_str()); }
};

std::string read_all(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

stpr::ExperimentPlan small_plan() {
    stpr::ExperimentPlan plan;
    plan.name = "small";
    plan.scenario.family = stpr::ScenarioFamily::contaminated_normal;
    plan.scenario.n_typical = 60;
    plan.scenario.n_contam = 4;
    plan.methods = {"glm", "suliu", "stpr"};
    plan.t = 0.2;
    plan.replications = 10;
    plan.test_size = 400;
    plan.base_seed = 11;
    return plan;
}

}  // namespace

TEST_CASE("plan files round-trip through write and parse") {
    stpr::ExperimentPlan plan;
    plan.name = "mixture-check";
    plan.scenario.family = stpr::ScenarioFamily::normal_mixture;
    plan.scenario.n = 777;
    plan.scenario.link = stpr::MixtureLink::f2;
    plan.scenario.beta0 = -1.75;
    plan.scenario.outliers = true;
    plan.methods = {"glm", "stpr"};
    plan.t = 0.1;
    plan.replications = 42;
    plan.test_size = 12345;
    plan.base_seed = 987654321;
    plan.bandwidth_exponent = -0.25;
    plan.output_dir = "results";

    TempPath file("plan_roundtrip.txt");
    stpr::write_plan_file(plan, file.path);
    const auto back = stpr::parse_plan_file(file.path);

    CHECK(back.name == plan.name);
    CHECK(back.scenario.family == plan.scenario.family);
    CHECK(back.scenario.n == plan.scenario.n);
    CHECK((back.scenario.link == plan.scenario.link));
    CHECK(back.scenario.beta0 == plan.scenario.beta0);
    CHECK(back.scenario.outliers == plan.scenario.outliers);
    CHECK(back.methods == plan.methods);
    CHECK(back.t == plan.t);
    CHECK(back.replications == plan.replications);
    CHECK(back.test_size == plan.test_size);
    CHECK(back.base_seed == plan.base_seed);
    CHECK(back.bandwidth_exponent == plan.bandwidth_exponent);
    CHECK(back.output_dir == plan.output_dir);
}

TEST_CASE("plan parsing rejects malformed input") {
    TempPath file("plan_bad.txt");
    {
        std::ofstream out(file.path);
        out << "t=0.2\n";
    }
    CHECK_THROWS_WITH_AS(stpr::parse_plan_file(file.path),
                         doctest::Contains("family"), std::runtime_error);
    {
        std::ofstream out(file.path);
        out << "family=lognormal3\nmethods=glm,warp\n";
    }
    CHECK_THROWS_WITH_AS(stpr::parse_plan_file(file.path),
                         doctest::Contains("warp"), std::runtime_error);
    {
        std::ofstream out(file.path);
        out << "family=lognormal3\nt=1.5\n";
    }
    CHECK_THROWS_AS(stpr::parse_plan_file(file.path), std::runtime_error);
    CHECK_THROWS_AS(stpr::parse_plan_file("/nonexistent/plan.txt"), std::runtime_error);
}

TEST_CASE("experiments are byte-identical across schedules and thread counts") {
    const auto plan = small_plan();
    const auto forward =
        stpr::render_table_csv(stpr::run_experiment(plan, 1, stpr::Schedule::forward));
    const auto reverse =
        stpr::render_table_csv(stpr::run_experiment(plan, 1, stpr::Schedule::reverse));
    const auto strided =
        stpr::render_table_csv(stpr::run_experiment(plan, 2, stpr::Schedule::strided));
    const auto threaded =
        stpr::render_table_csv(stpr::run_experiment(plan, 4, stpr::Schedule::forward));
    CHECK(forward == reverse);
    CHECK(forward == strided);
    CHECK(forward == threaded);
}

TEST_CASE("a single-replication single-method run is deterministic and one row") {
    auto plan = small_plan();
    plan.methods = {"glm"};
    plan.replications = 1;
    const auto a = stpr::run_experiment(plan);
    const auto b = stpr::run_experiment(plan);
    REQUIRE(a.rows.size() == 1);
    CHECK(a.rows[0].method == "glm");
    CHECK(a.rows[0].sd_tpr == 0.0);
    CHECK(stpr::render_table_csv(a) == stpr::render_table_csv(b));
    CHECK(a.rows[0].mean_tpr >= 0.0);
    CHECK(a.rows[0].mean_tpr <= 100.0);
}

TEST_CASE("per-replication outcomes line up with the aggregate") {
    const auto plan = small_plan();
    std::vector<stpr::RepOutcome> outcomes;
    const auto table = stpr::run_experiment(plan, 1, stpr::Schedule::forward, &outcomes);
    REQUIRE(outcomes.size() == plan.replications);

    double sum = 0.0;
    std::size_t used = 0;
    for (const auto& rep : outcomes) {
        if (rep.aborted) continue;
        sum += rep.tpr[0];
        ++used;
    }
    REQUIRE(used == table.rows[0].replications);
    CHECK(table.rows[0].mean_tpr ==
          doctest::Approx(sum / static_cast<double>(used)).epsilon(1e-12));

    // The in-sample quantile rule keeps every train FPR at or under t.
    for (const auto& rep : outcomes) {
        if (rep.aborted) continue;
        for (double f : rep.train_fpr) CHECK(f <= plan.t + 1e-15);
    }
    for (const auto& row : table.rows) CHECK(row.max_train_fpr <= plan.t + 1e-15);
}

TEST_CASE("an experiment with mostly-degenerate draws fails loudly") {
    stpr::ExperimentPlan plan;
    plan.name = "degenerate";
    plan.scenario.family = stpr::ScenarioFamily::contaminated_normal;
    plan.scenario.n_typical = 1;
    plan.scenario.n_contam = 1;
    plan.methods = {"glm"};
    plan.t = 0.2;
    plan.replications = 30;
    plan.test_size = 50;
    plan.base_seed = 17;

    std::ostringstream log;
    CHECK_THROWS_WITH_AS(
        stpr::run_experiment(plan, 1, stpr::Schedule::forward, nullptr, &log),
        doctest::Contains("aborted"), std::runtime_error);
    CHECK(log.str().find("aborted") != std::string::npos);
}

TEST_CASE("markdown tables use paper-style mean (sd) cells") {
    stpr::ResultTable table;
    table.name = "demo";
    table.t = 0.2;
    table.replications = 200;
    stpr::MethodSummary glm;
    glm.method = "glm";
    glm.mean_tpr = 52.7;
    glm.sd_tpr = 15.9;
    glm.mean_fpr = 20.4;
    glm.sd_fpr = 1.3;
    glm.convergence_rate = 1.0;
    glm.replications = 200;
    stpr::MethodSummary fixed;
    fixed.method = "suliu";
    fixed.mean_tpr = 53.6;
    fixed.sd_tpr = 0.0;
    fixed.mean_fpr = 20.0;
    fixed.sd_fpr = 0.0;
    fixed.convergence_rate = 1.0;
    fixed.replications = 1;
    table.rows = {glm, fixed};

    const std::string md = stpr::render_table_markdown(table);
    CHECK(md.find("| Method | TPR mean (sd) | FPR mean (sd) | Convergence | Replications |") !=
          std::string::npos);
    CHECK(md.find("| GLM | 52.7 (15.9) | 20.4 (1.3) | 1.000 | 200 |") != std::string::npos);
    CHECK(md.find("| Su-Liu | 53.6 (0.0) | 20.0 (0.0) | 1.000 | 1 |") != std::string::npos);
}

TEST_CASE("csv tables round-trip exactly") {
    const auto plan = small_plan();
    const auto table = stpr::run_experiment(plan);
    const auto parsed = stpr::parse_table_csv(stpr::render_table_csv(table));

    CHECK(parsed.name == table.name);
    CHECK(parsed.t == table.t);
    CHECK(parsed.replications == table.replications);
    CHECK(parsed.aborted == table.aborted);
    REQUIRE(parsed.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        CHECK(parsed.rows[i].method == table.rows[i].method);
        CHECK(parsed.rows[i].mean_tpr == table.rows[i].mean_tpr);
        CHECK(parsed.rows[i].sd_tpr == table.rows[i].sd_tpr);
        CHECK(parsed.rows[i].mean_fpr == table.rows[i].mean_fpr);
        CHECK(parsed.rows[i].sd_fpr == table.rows[i].sd_fpr);
        CHECK(parsed.rows[i].convergence_rate == table.rows[i].convergence_rate);
        CHECK(parsed.rows[i].replications == table.rows[i].replications);
        CHECK(parsed.rows[i].max_train_fpr == table.rows[i].max_train_fpr);
    }
}

TEST_CASE("emit_table writes both formats and rejects bad targets") {
    stpr::ResultTable table;
    table.name = "emit";
    table.t = 0.3;
    table.replications = 1;
    stpr::MethodSummary row;
    row.method = "glm";
    row.replications = 1;
    table.rows = {row};

    TempPath md("emit_check.md");
    TempPath csv("emit_check.csv");
    stpr::emit_table(table, "markdown", md.path);
    stpr::emit_table(table, "csv", csv.path);
    CHECK(read_all(md.path).find("| GLM |") != std::string::npos);
    CHECK(read_all(csv.path).find("name,emit") != std::string::npos);
    CHECK_THROWS_AS(stpr::emit_table(table, "yaml", md.path), std::invalid_argument);
    CHECK_THROWS_AS(stpr::emit_table(table, "csv", "/nonexistent/dir/x.csv"),
                    std::runtime_error);
}

TEST_CASE("model files round-trip exactly including diagnostics") {
    stpr::ModelRecord record;
    record.model.theta = (Eigen::VectorXd(3) << 0.123456789012345678, -0.5, 1e-17).finished();
    record.model.delta = -2.7182818284590451;
    record.model.method_tag = "stpr";
    record.model.converged = true;
    record.model.iterations = 37;
    record.train_threshold = 0.99999999999999989;
    stpr::FitDiagnostics diag;
    diag.converged = true;
    diag.iterations = 41;
    diag.smooth_tpr = 0.721234;
    diag.smooth_fpr = 0.200625;
    diag.initializer = "robust-logistic";
    diag.fallback = false;
    diag.h = 0.09712;
    diag.alpha = 0.000625;
    diag.kkt_residual = 3.2e-12;
    record.diagnostics = diag;

    TempPath file("model_roundtrip.txt");
    stpr::write_model_file(record, file.path);
    const auto back = stpr::read_model_file(file.path);

    CHECK(back.model.theta == record.model.theta);
    CHECK(back.model.delta == record.model.delta);
    CHECK(back.model.method_tag == record.model.method_tag);
    CHECK(back.model.converged == record.model.converged);
    CHECK(back.model.iterations == record.model.iterations);
    REQUIRE(back.train_threshold.has_value());
    CHECK(*back.train_threshold == *record.train_threshold);
    REQUIRE(back.diagnostics.has_value());
    CHECK(back.diagnostics->smooth_tpr == diag.smooth_tpr);
    CHECK(back.diagnostics->initializer == diag.initializer);
    CHECK(back.diagnostics->kkt_residual == diag.kkt_residual);

    stpr::ModelRecord bare;
    bare.model.theta = (Eigen::VectorXd(1) << 1.0).finished();
    bare.model.method_tag = "glm";
    stpr::write_model_file(bare, file.path);
    const auto bare_back = stpr::read_model_file(file.path);
    CHECK_FALSE(bare_back.train_threshold.has_value());
    CHECK_FALSE(bare_back.diagnostics.has_value());

    CHECK_THROWS_AS(stpr::read_model_file("/nonexistent/model.txt"), std::runtime_error);
}

TEST_CASE("real-data workflow is deterministic and reports unit-norm fits") {
    TempPath csv("pima_like.csv");
    TempPath split("pima_like_split.txt");
    {
        std::ofstream out(csv.path);
        out << "a,b,c,type\n";
        std::mt19937_64 rng(211);
        std::normal_distribution<double> normal;
        for (int i = 0; i < 30; ++i)
            out << 1.0 + normal(rng) << ',' << 0.5 * normal(rng) << ','
                << normal(rng) << ",Yes\n";
        for (int i = 0; i < 30; ++i)
            out << normal(rng) << ',' << 0.5 * normal(rng) << ',' << normal(rng)
                << ",No\n";
    }
    {
        std::ofstream out(split.path);
        for (int i = 0; i < 20; ++i) out << i << '\n';        // cases
        for (int i = 30; i < 50; ++i) out << i << '\n';       // controls
    }

    const auto report = stpr::run_pima(csv.path, split.path, 0.2);
    CHECK(report.n_train == 40);
    CHECK(report.n_test == 20);
    CHECK(report.train_cases == 20);
    CHECK(report.test_cases == 10);
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].method == "glm");
    CHECK(report.rows[1].method == "rglm");
    CHECK(report.rows[2].method == "stpr");
    for (const auto& row : report.rows) {
        CHECK(row.coefficients.norm() == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(row.tpr >= 0.0);
        CHECK(row.tpr <= 100.0);
        CHECK(row.fpr >= 0.0);
        CHECK(row.fpr <= 100.0);
    }

    const auto again = stpr::run_pima(csv.path, split.path, 0.2);
    CHECK(stpr::render_pima_report(report) == stpr::render_pima_report(again));

    const std::string rendered = stpr::render_pima_report(report);
    CHECK(rendered.find("| Predictor | GLM | rGLM | sTPR |") != std::string::npos);
    CHECK(rendered.find("| a |") != std::string::npos);
    CHECK(rendered.find("| TPR (%) |") != std::string::npos);

    // A tiny t pins the threshold at the top control order statistic.
    const auto strict = stpr::run_pima(csv.path, split.path, 0.005);
    for (const auto& row : strict.rows) CHECK(row.fpr <= 35.0);
}

TEST_CASE("roc plots render curves with callouts and reject empty input") {
    const auto data = test_util::gaussian_dataset(223, 200, 200, 2, 1.5);
    Eigen::VectorXd theta(2);
    theta << M_SQRT1_2, M_SQRT1_2;
    stpr::LabeledCurve labeled;
    labeled.curve = stpr::roc_curve(data.cases * theta, data.controls * theta);
    labeled.label = "combined";

    TempPath svg("roc_plot.svg");
    stpr::plot_roc({labeled}, 0.2, svg.path);
    const std::string content = read_all(svg.path);
    CHECK(content.find("<svg") != std::string::npos);
    CHECK(content.find("polyline") != std::string::npos);
    CHECK(content.find("combined") != std::string::npos);
    CHECK(content.find("%") != std::string::npos);

    CHECK_THROWS_AS(stpr::plot_roc({}, 0.2, svg.path), std::invalid_argument);
    CHECK_THROWS_AS(stpr::plot_roc({labeled}, 1.2, svg.path), std::invalid_argument);
    CHECK_THROWS_AS(stpr::plot_roc({labeled}, 0.2, "/nonexistent/dir/x.svg"),
                    std::runtime_error);
}

TEST_CASE("curve interpolation recovers exact values on simple shapes") {
    stpr::RocCurve diagonal;
    diagonal.points = {{std::numeric_limits<double>::infinity(), 0.0, 0.0},
                       {0.5, 0.5, 0.5},
                       {-std::numeric_limits<double>::infinity(), 1.0, 1.0}};
    CHECK(stpr::curve_tpr_at_fpr(diagonal, 0.25) == doctest::Approx(0.25));
    CHECK(stpr::curve_tpr_at_fpr(diagonal, 0.5) == doctest::Approx(0.5));

    const auto perfect = stpr::roc_curve((Eigen::VectorXd(1) << 2.0).finished(),
                                         (Eigen::VectorXd(1) << 1.0).finished());
    CHECK(stpr::curve_tpr_at_fpr(perfect, 0.01) == doctest::Approx(1.0));
}

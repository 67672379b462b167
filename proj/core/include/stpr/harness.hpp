#pragma once

// Experiment orchestration: replicated fit/evaluate loops over the
// simulation scenarios, table emission, and the real-data workflow.

#include "stpr/dataset.hpp"
#include "stpr/roc.hpp"
#include "stpr/simgen.hpp"
#include "stpr/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace stpr {

struct ExperimentPlan {
    std::string name = "experiment";
    ScenarioSpec scenario;
    std::vector<std::string> methods = {"glm", "rglm", "grid", "suliu", "stpr"};
    double t = 0.2;
    std::size_t replications = 200;
    // Per-family test sizing: contaminated uses test_size typical rows plus
    // proportionally scaled contamination; lognormal3 uses test_size cases
    // and test_size controls; the mixture uses test_size rows total.
    std::size_t test_size = 100000;
    std::uint64_t base_seed = 1;
    double bandwidth_exponent = -0.5;
    std::string output_dir;
};

ExperimentPlan parse_plan_file(const std::string& path);
void write_plan_file(const ExperimentPlan& plan, const std::string& path);

struct MethodSummary {
    std::string method;
    double mean_tpr = 0.0;  // percent
    double sd_tpr = 0.0;
    double mean_fpr = 0.0;  // percent, train-threshold protocol
    double sd_fpr = 0.0;
    double convergence_rate = 1.0;
    std::size_t replications = 0;
    double max_train_fpr = 0.0;  // in-sample FPR at the re-estimated threshold
};

struct ResultTable {
    std::string name;
    double t = 0.0;
    std::size_t replications = 0;
    std::size_t aborted = 0;
    std::vector<MethodSummary> rows;
};

// Per-replication trace, used for convergence accounting and debugging.
struct RepOutcome {
    std::size_t rep = 0;
    bool aborted = false;
    std::string abort_reason;
    std::vector<double> tpr;        // percent, aligned with plan.methods
    std::vector<double> fpr;        // percent
    std::vector<double> train_fpr;  // in-sample, fraction
    std::vector<bool> converged;
    std::vector<bool> fallback;
};

enum class Schedule { forward, reverse, strided };

// Fits every requested method on a fresh training draw and evaluates on a
// fresh test draw, per replication; seeds are derived per replication so
// results are byte-identical under any schedule or thread count. Throws if
// more than 20% of replications abort. Fallback and abort events are
// written to `log` when provided.
ResultTable run_experiment(const ExperimentPlan& plan, unsigned threads = 0,
                           Schedule schedule = Schedule::forward,
                           std::vector<RepOutcome>* outcomes = nullptr,
                           std::ostream* log = nullptr);

std::string render_table_markdown(const ResultTable& table);
std::string render_table_csv(const ResultTable& table);
ResultTable parse_table_csv(const std::string& text);
void emit_table(const ResultTable& table, const std::string& format,
                const std::string& out_path);

// Real-data workflow: equal-variance scaling fitted on the training split,
// glm/rglm/stpr fits, normalized coefficient table plus test TPR at the
// test-quantile threshold and test FPR at the train-quantile threshold.
struct PimaMethodResult {
    std::string method;
    Eigen::VectorXd coefficients;  // unit norm, scaled-marker space
    double tpr = 0.0;              // percent
    double fpr = 0.0;              // percent
    bool converged = true;
};

struct PimaReport {
    std::vector<std::string> marker_names;
    std::vector<PimaMethodResult> rows;
    double t = 0.0;
    std::size_t n_train = 0, n_test = 0, train_cases = 0, test_cases = 0;
};

PimaReport run_pima(const std::string& data_csv, const std::string& split_file,
                    double t, const std::string& label_column = "type",
                    const std::string& positive_label = "Yes");

std::string render_pima_report(const PimaReport& report);

}  // namespace stpr

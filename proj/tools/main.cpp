// Command-line front end: fit, eval, simulate, pima, and roc-plot
// subcommands over the library.

#include "stpr/baselines.hpp"
#include "stpr/harness.hpp"
#include "stpr/model_io.hpp"
#include "stpr/roc.hpp"
#include "stpr/solver.hpp"
#include "stpr/svg.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

stpr::CombinationModel fit_by_name(const std::string& method, const stpr::Dataset& train,
                                   double t, double bandwidth_exponent,
                                   std::optional<stpr::FitDiagnostics>* diag_out) {
    if (method == "glm") return stpr::fit_logistic(train);
    if (method == "rglm") return stpr::fit_robust_logistic(train);
    if (method == "suliu") return stpr::fit_su_liu(train);
    if (method == "grid") return stpr::grid_search(train, t);
    if (method == "stpr") {
        stpr::SolverConfig config;
        config.t = t;
        config.bandwidth_exponent = bandwidth_exponent;
        auto [model, diag] = stpr::fit_stpr(train, config);
        if (diag_out) *diag_out = diag;
        return model;
    }
    throw CLI::ValidationError("--method", "unknown method: " + method);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear biomarker combinations maximizing the TPR at a fixed FPR"};
    app.require_subcommand(1);

    std::string data_path, label_column = "label", positive_label = "1";
    std::string method = "stpr", out_path, model_path, plan_path, split_path;
    double t = 0.2;
    double bandwidth_exponent = -0.5;
    std::uint64_t seed = 1;
    std::size_t reps = 0, test_size = 0;
    std::string methods_csv;
    unsigned threads = 0;

    auto add_data_flags = [&](CLI::App* cmd) {
        cmd->add_option("--data", data_path, "input CSV file")->required();
        cmd->add_option("--label", label_column, "label column name");
        cmd->add_option("--positive", positive_label, "token marking cases");
    };

    CLI::App* fit = app.add_subcommand("fit", "fit a combination on a dataset");
    add_data_flags(fit);
    fit->add_option("--method", method, "glm|rglm|suliu|grid|stpr");
    fit->add_option("--t", t, "target FPR in (0,1)");
    fit->add_option("--bandwidth-exponent", bandwidth_exponent,
                    "exponent in h = sigma * n^e");
    fit->add_option("--out", out_path, "model file to write")->required();

    CLI::App* eval = app.add_subcommand("eval", "evaluate a model file on test data");
    add_data_flags(eval);
    eval->add_option("--model", model_path, "model file from fit")->required();
    eval->add_option("--t", t, "target FPR in (0,1)");

    CLI::App* simulate = app.add_subcommand("simulate", "run a replicated experiment plan");
    simulate->add_option("--plan", plan_path, "plan file (key=value lines)")->required();
    simulate->add_option("--t", t, "override plan t");
    simulate->add_option("--seed", seed, "override plan base seed");
    simulate->add_option("--reps", reps, "override plan replications");
    simulate->add_option("--methods", methods_csv, "override plan methods (comma list)");
    simulate->add_option("--test-size", test_size, "override plan test size");
    simulate->add_option("--bandwidth-exponent", bandwidth_exponent,
                         "override plan bandwidth exponent");
    simulate->add_option("--out", out_path, "output directory");
    simulate->add_option("--threads", threads, "worker threads (0 = auto)");

    CLI::App* pima = app.add_subcommand("pima", "real-data workflow on a labeled CSV");
    pima->add_option("--data", data_path, "input CSV file")->required();
    pima->add_option("--split", split_path, "training row index file")->required();
    pima->add_option("--label", label_column, "label column name")->default_val("type");
    pima->add_option("--positive", positive_label, "token marking cases")->default_val("Yes");
    pima->add_option("--t", t, "target FPR in (0,1)")->default_val(0.1);
    pima->add_option("--out", out_path, "report file (default stdout)");

    CLI::App* rocplot = app.add_subcommand("roc-plot", "plot ROC curves for fitted models");
    add_data_flags(rocplot);
    std::vector<std::string> model_paths;
    rocplot->add_option("--model", model_paths, "model file(s) to score")->required();
    rocplot->add_option("--t", t, "FPR marker position");
    rocplot->add_option("--out", out_path, "SVG file to write")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit) {
            const stpr::Dataset train = stpr::load_csv(data_path, label_column, positive_label);
            std::optional<stpr::FitDiagnostics> diag;
            stpr::ModelRecord record;
            record.model = fit_by_name(method, train, t, bandwidth_exponent, &diag);
            record.diagnostics = diag;
            record.train_threshold =
                stpr::threshold_for_fpr(record.model.theta, train.controls, t);
            stpr::write_model_file(record, out_path);
            std::cout << "wrote " << out_path << " (method=" << record.model.method_tag
                      << ", converged=" << (record.model.converged ? "yes" : "no") << ")\n";
        } else if (*eval) {
            const stpr::ModelRecord record = stpr::read_model_file(model_path);
            const stpr::Dataset test = stpr::load_csv(data_path, label_column, positive_label);
            const double tpr = stpr::tpr_at_test_fpr(record.model.theta, test, t);
            const double threshold = record.train_threshold.value_or(record.model.delta);
            const double fpr = stpr::empirical_fpr(record.model.theta, threshold, test.controls);
            std::cout << "method=" << record.model.method_tag << '\n';
            std::cout << "tpr_at_test_fpr=" << stpr::format_double(tpr) << '\n';
            std::cout << "fpr_at_train_threshold=" << stpr::format_double(fpr) << '\n';
        } else if (*simulate) {
            stpr::ExperimentPlan plan = stpr::parse_plan_file(plan_path);
            if (simulate->count("--t")) plan.t = t;
            if (simulate->count("--seed")) plan.base_seed = seed;
            if (simulate->count("--reps")) plan.replications = reps;
            if (simulate->count("--test-size")) plan.test_size = test_size;
            if (simulate->count("--bandwidth-exponent"))
                plan.bandwidth_exponent = bandwidth_exponent;
            if (simulate->count("--methods")) {
                plan.methods.clear();
                std::stringstream ss(methods_csv);
                std::string item;
                while (std::getline(ss, item, ','))
                    if (!item.empty()) plan.methods.push_back(item);
            }
            if (simulate->count("--out")) plan.output_dir = out_path;

            const stpr::ResultTable table =
                stpr::run_experiment(plan, threads, stpr::Schedule::forward, nullptr, &std::cerr);
            std::cout << stpr::render_table_markdown(table);
            if (!plan.output_dir.empty()) {
                std::filesystem::create_directories(plan.output_dir);
                stpr::emit_table(table, "markdown", plan.output_dir + "/" + plan.name + ".md");
                stpr::emit_table(table, "csv", plan.output_dir + "/" + plan.name + ".csv");
                std::cout << "wrote " << plan.output_dir << "/" << plan.name << ".{md,csv}\n";
            }
        } else if (*pima) {
            const stpr::PimaReport report =
                stpr::run_pima(data_path, split_path, t, label_column, positive_label);
            const std::string text = stpr::render_pima_report(report);
            if (out_path.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(out_path);
                if (!out) throw std::runtime_error("cannot write file: " + out_path);
                out << text;
                std::cout << "wrote " << out_path << '\n';
            }
        } else if (*rocplot) {
            const stpr::Dataset data = stpr::load_csv(data_path, label_column, positive_label);
            std::vector<stpr::LabeledCurve> curves;
            for (const auto& path : model_paths) {
                const stpr::ModelRecord record = stpr::read_model_file(path);
                const Eigen::VectorXd case_scores =
                    stpr::combination_scores(data.cases, record.model.theta);
                const Eigen::VectorXd control_scores =
                    stpr::combination_scores(data.controls, record.model.theta);
                curves.push_back(
                    {stpr::roc_curve(case_scores, control_scores), record.model.method_tag});
            }
            stpr::plot_roc(curves, t, out_path);
            std::cout << "wrote " << out_path << '\n';
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}

#include "stpr/harness.hpp"

#include "stpr/baselines.hpp"
#include "stpr/model_io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace stpr {

namespace {

const std::vector<std::string> kKnownMethods = {"glm", "rglm", "grid", "suliu", "stpr"};

std::string method_label(const std::string& method) {
    if (method == "glm") return "GLM";
    if (method == "rglm") return "rGLM";
    if (method == "grid") return "Grid";
    if (method == "suliu") return "Su-Liu";
    if (method == "stpr") return "sTPR";
    return method;
}

double parse_double_value(const std::string& token, const std::string& key) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw std::runtime_error("bad numeric value for '" + key + "': " + token);
    return value;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> items;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

ScenarioSpec test_scenario(const ExperimentPlan& plan) {
    ScenarioSpec spec = plan.scenario;
    switch (spec.family) {
        case ScenarioFamily::contaminated_normal: {
            const double ratio = plan.scenario.n_typical == 0
                                     ? 0.0
                                     : static_cast<double>(plan.scenario.n_contam) /
                                           static_cast<double>(plan.scenario.n_typical);
            spec.n_typical = plan.test_size;
            spec.n_contam = static_cast<std::size_t>(
                std::llround(ratio * static_cast<double>(plan.test_size)));
            break;
        }
        case ScenarioFamily::lognormal3:
            spec.n_cases = plan.test_size;
            spec.n_controls = plan.test_size;
            break;
        case ScenarioFamily::normal_mixture:
            spec.n = plan.test_size;
            break;
    }
    return spec;
}

struct FitOutcome {
    CombinationModel model;
    bool converged = true;
    bool fallback = false;
};

FitOutcome fit_method(const std::string& method, const Dataset& train,
                      const ExperimentPlan& plan) {
    FitOutcome out;
    if (method == "glm") {
        out.model = fit_logistic(train);
        out.converged = out.model.converged;
    } else if (method == "rglm") {
        out.model = fit_robust_logistic(train);
        out.converged = out.model.converged;
    } else if (method == "grid") {
        out.model = grid_search(train, plan.t);
    } else if (method == "suliu") {
        out.model = fit_su_liu(train);
    } else if (method == "stpr") {
        SolverConfig config;
        config.t = plan.t;
        config.bandwidth_exponent = plan.bandwidth_exponent;
        auto [model, diag] = fit_stpr(train, config);
        out.model = model;
        out.converged = diag.converged;
        out.fallback = diag.fallback;
    } else {
        throw std::invalid_argument("unknown method: " + method);
    }
    return out;
}

std::string percent_cell(double mean, double sd) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.1f (%.1f)", mean, sd);
    return buf;
}

}  // namespace

ExperimentPlan parse_plan_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open plan file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("bad plan line (expected key=value): " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }

    ExperimentPlan plan;
    auto take = [&](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) return "";
        return it->second;
    };

    if (!take("name").empty()) plan.name = take("name");
    const std::string family = take("family");
    if (family.empty()) throw std::runtime_error("plan file missing 'family'");
    plan.scenario.family = parse_family(family);
    switch (plan.scenario.family) {
        case ScenarioFamily::contaminated_normal:
            if (!take("train_typical").empty())
                plan.scenario.n_typical = static_cast<std::size_t>(
                    parse_double_value(take("train_typical"), "train_typical"));
            if (!take("train_contam").empty())
                plan.scenario.n_contam = static_cast<std::size_t>(
                    parse_double_value(take("train_contam"), "train_contam"));
            break;
        case ScenarioFamily::lognormal3:
            if (!take("train_cases").empty())
                plan.scenario.n_cases = static_cast<std::size_t>(
                    parse_double_value(take("train_cases"), "train_cases"));
            if (!take("train_controls").empty())
                plan.scenario.n_controls = static_cast<std::size_t>(
                    parse_double_value(take("train_controls"), "train_controls"));
            break;
        case ScenarioFamily::normal_mixture:
            if (!take("train_n").empty())
                plan.scenario.n = static_cast<std::size_t>(
                    parse_double_value(take("train_n"), "train_n"));
            if (!take("link").empty())
                plan.scenario.link = take("link") == "f2" ? MixtureLink::f2 : MixtureLink::f1;
            if (!take("beta0").empty())
                plan.scenario.beta0 = parse_double_value(take("beta0"), "beta0");
            if (!take("outliers").empty()) plan.scenario.outliers = take("outliers") == "1";
            break;
    }
    if (!take("t").empty()) plan.t = parse_double_value(take("t"), "t");
    if (!take("reps").empty())
        plan.replications = static_cast<std::size_t>(parse_double_value(take("reps"), "reps"));
    if (!take("test_size").empty())
        plan.test_size =
            static_cast<std::size_t>(parse_double_value(take("test_size"), "test_size"));
    if (!take("seed").empty())
        plan.base_seed = static_cast<std::uint64_t>(parse_double_value(take("seed"), "seed"));
    if (!take("bandwidth_exponent").empty())
        plan.bandwidth_exponent =
            parse_double_value(take("bandwidth_exponent"), "bandwidth_exponent");
    if (!take("methods").empty()) plan.methods = split_list(take("methods"));
    if (!take("out").empty()) plan.output_dir = take("out");

    if (plan.methods.empty()) throw std::runtime_error("plan has an empty method set");
    for (const auto& m : plan.methods)
        if (std::find(kKnownMethods.begin(), kKnownMethods.end(), m) == kKnownMethods.end())
            throw std::runtime_error("unknown method in plan: " + m);
    if (!(plan.t > 0.0 && plan.t < 1.0)) throw std::runtime_error("plan t must lie in (0,1)");
    if (plan.replications < 1) throw std::runtime_error("plan needs at least one replication");
    return plan;
}

void write_plan_file(const ExperimentPlan& plan, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write plan file: " + path);
    out << "name=" << plan.name << '\n';
    out << "family=" << family_name(plan.scenario.family) << '\n';
    switch (plan.scenario.family) {
        case ScenarioFamily::contaminated_normal:
            out << "train_typical=" << plan.scenario.n_typical << '\n';
            out << "train_contam=" << plan.scenario.n_contam << '\n';
            break;
        case ScenarioFamily::lognormal3:
            out << "train_cases=" << plan.scenario.n_cases << '\n';
            out << "train_controls=" << plan.scenario.n_controls << '\n';
            break;
        case ScenarioFamily::normal_mixture:
            out << "train_n=" << plan.scenario.n << '\n';
            out << "link=" << (plan.scenario.link == MixtureLink::f2 ? "f2" : "f1") << '\n';
            out << "beta0=" << format_double(plan.scenario.beta0) << '\n';
            out << "outliers=" << (plan.scenario.outliers ? 1 : 0) << '\n';
            break;
    }
    out << "t=" << format_double(plan.t) << '\n';
    out << "reps=" << plan.replications << '\n';
    out << "test_size=" << plan.test_size << '\n';
    out << "seed=" << plan.base_seed << '\n';
    out << "bandwidth_exponent=" << format_double(plan.bandwidth_exponent) << '\n';
    out << "methods=";
    for (std::size_t i = 0; i < plan.methods.size(); ++i)
        out << plan.methods[i] << (i + 1 < plan.methods.size() ? "," : "");
    out << '\n';
    if (!plan.output_dir.empty()) out << "out=" << plan.output_dir << '\n';
}

ResultTable run_experiment(const ExperimentPlan& plan, unsigned threads,
                           Schedule schedule, std::vector<RepOutcome>* outcomes,
                           std::ostream* log) {
    if (plan.methods.empty()) throw std::invalid_argument("empty method set");
    const std::size_t reps = plan.replications;
    const ScenarioSpec test_spec = test_scenario(plan);
    const std::size_t n_methods = plan.methods.size();

    std::vector<RepOutcome> slots(reps);

    // Execution order varies with the schedule; results are written into
    // per-replication slots, so the aggregate is schedule-independent.
    std::vector<std::size_t> order(reps);
    std::iota(order.begin(), order.end(), 0);
    if (schedule == Schedule::reverse) {
        std::reverse(order.begin(), order.end());
    } else if (schedule == Schedule::strided) {
        std::vector<std::size_t> strided;
        strided.reserve(reps);
        for (std::size_t start = 0; start < 7; ++start)
            for (std::size_t r = start; r < reps; r += 7) strided.push_back(r);
        order = std::move(strided);
    }

    auto run_one = [&](std::size_t rep) {
        RepOutcome out;
        out.rep = rep;
        out.tpr.assign(n_methods, 0.0);
        out.fpr.assign(n_methods, 0.0);
        out.train_fpr.assign(n_methods, 0.0);
        out.converged.assign(n_methods, true);
        out.fallback.assign(n_methods, false);
        try {
            const std::uint64_t train_seed =
                derive_replication_seed(plan.base_seed, 2 * rep);
            const std::uint64_t test_seed =
                derive_replication_seed(plan.base_seed, 2 * rep + 1);
            const Dataset train = generate(plan.scenario, train_seed).data;
            const Dataset test = generate(test_spec, test_seed).data;
            for (std::size_t m = 0; m < n_methods; ++m) {
                const FitOutcome fit = fit_method(plan.methods[m], train, plan);
                const auto [tpr, fpr] = evaluate_fit(fit.model, train, test, plan.t);
                const double train_threshold =
                    threshold_for_fpr(fit.model.theta, train.controls, plan.t);
                out.tpr[m] = 100.0 * tpr;
                out.fpr[m] = 100.0 * fpr;
                out.train_fpr[m] =
                    empirical_fpr(fit.model.theta, train_threshold, train.controls);
                out.converged[m] = fit.converged;
                out.fallback[m] = fit.fallback;
            }
        } catch (const std::exception& ex) {
            out.aborted = true;
            out.abort_reason = ex.what();
        }
        slots[rep] = std::move(out);
    };

    unsigned n_threads = threads == 0 ? std::thread::hardware_concurrency() : threads;
    if (n_threads < 1) n_threads = 1;
    n_threads = static_cast<unsigned>(
        std::min<std::size_t>(n_threads, order.size()));

    if (n_threads <= 1) {
        for (std::size_t idx : order) run_one(idx);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned w = 0; w < n_threads; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= order.size()) return;
                    run_one(order[i]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // Ordered reduction by replication index.
    std::size_t aborted = 0;
    std::vector<double> sum_tpr(n_methods, 0.0), sum_fpr(n_methods, 0.0);
    std::vector<double> sum_tpr2(n_methods, 0.0), sum_fpr2(n_methods, 0.0);
    std::vector<std::size_t> n_conv(n_methods, 0);
    std::vector<double> max_train_fpr(n_methods, 0.0);
    std::size_t used = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        const RepOutcome& out = slots[r];
        if (out.aborted) {
            ++aborted;
            if (log) *log << "rep " << r << ": aborted: " << out.abort_reason << '\n';
            continue;
        }
        ++used;
        for (std::size_t m = 0; m < n_methods; ++m) {
            sum_tpr[m] += out.tpr[m];
            sum_tpr2[m] += out.tpr[m] * out.tpr[m];
            sum_fpr[m] += out.fpr[m];
            sum_fpr2[m] += out.fpr[m] * out.fpr[m];
            if (out.converged[m]) ++n_conv[m];
            max_train_fpr[m] = std::max(max_train_fpr[m], out.train_fpr[m]);
            if (log && out.fallback[m])
                *log << "rep " << r << ": " << plan.methods[m]
                     << " fell back to its initializer\n";
        }
    }

    if (aborted * 5 > reps)
        throw std::runtime_error("experiment aborted: " + std::to_string(aborted) + " of " +
                                 std::to_string(reps) + " replications failed");
    if (used == 0) throw std::runtime_error("no successful replications");

    ResultTable table;
    table.name = plan.name;
    table.t = plan.t;
    table.replications = reps;
    table.aborted = aborted;
    const double dn = static_cast<double>(used);
    for (std::size_t m = 0; m < n_methods; ++m) {
        MethodSummary row;
        row.method = plan.methods[m];
        row.replications = used;
        row.mean_tpr = sum_tpr[m] / dn;
        row.mean_fpr = sum_fpr[m] / dn;
        const double var_tpr =
            used > 1 ? (sum_tpr2[m] - dn * row.mean_tpr * row.mean_tpr) / (dn - 1.0) : 0.0;
        const double var_fpr =
            used > 1 ? (sum_fpr2[m] - dn * row.mean_fpr * row.mean_fpr) / (dn - 1.0) : 0.0;
        row.sd_tpr = std::sqrt(std::max(0.0, var_tpr));
        row.sd_fpr = std::sqrt(std::max(0.0, var_fpr));
        row.convergence_rate = static_cast<double>(n_conv[m]) / dn;
        row.max_train_fpr = max_train_fpr[m];
        table.rows.push_back(row);
    }

    if (outcomes) *outcomes = std::move(slots);
    return table;
}

std::string render_table_markdown(const ResultTable& table) {
    std::ostringstream out;
    char head[160];
    std::snprintf(head, sizeof head, "## %s (t = %.2f, %zu replications", table.name.c_str(),
                  table.t, table.replications);
    out << head;
    if (table.aborted) out << ", " << table.aborted << " aborted";
    out << ")\n\n";
    out << "| Method | TPR mean (sd) | FPR mean (sd) | Convergence | Replications |\n";
    out << "|---|---|---|---|---|\n";
    for (const auto& row : table.rows) {
        char conv[16];
        std::snprintf(conv, sizeof conv, "%.3f", row.convergence_rate);
        out << "| " << method_label(row.method) << " | "
            << percent_cell(row.mean_tpr, row.sd_tpr) << " | "
            << percent_cell(row.mean_fpr, row.sd_fpr) << " | " << conv << " | "
            << row.replications << " |\n";
    }
    return out.str();
}

std::string render_table_csv(const ResultTable& table) {
    std::ostringstream out;
    out << "name," << table.name << '\n';
    out << "t," << format_double(table.t) << '\n';
    out << "replications," << table.replications << '\n';
    out << "aborted," << table.aborted << '\n';
    out << "method,mean_tpr,sd_tpr,mean_fpr,sd_fpr,convergence_rate,replications,"
           "max_train_fpr\n";
    for (const auto& row : table.rows) {
        out << row.method << ',' << format_double(row.mean_tpr) << ','
            << format_double(row.sd_tpr) << ',' << format_double(row.mean_fpr) << ','
            << format_double(row.sd_fpr) << ',' << format_double(row.convergence_rate)
            << ',' << row.replications << ',' << format_double(row.max_train_fpr) << '\n';
    }
    return out.str();
}

ResultTable parse_table_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    ResultTable table;
    auto next_field = [](std::stringstream& ss, const char* what) {
        std::string field;
        if (!std::getline(ss, field, ','))
            throw std::runtime_error(std::string("missing field: ") + what);
        return field;
    };
    int header_rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        const std::string first = next_field(ss, "key");
        if (header_rows < 4) {
            const std::string value = next_field(ss, first.c_str());
            if (first == "name")
                table.name = value;
            else if (first == "t")
                table.t = parse_double_value(value, "t");
            else if (first == "replications")
                table.replications =
                    static_cast<std::size_t>(parse_double_value(value, "replications"));
            else if (first == "aborted")
                table.aborted = static_cast<std::size_t>(parse_double_value(value, "aborted"));
            else
                throw std::runtime_error("unexpected table header key: " + first);
            ++header_rows;
            continue;
        }
        if (first == "method") continue;  // column header line
        MethodSummary row;
        row.method = first;
        row.mean_tpr = parse_double_value(next_field(ss, "mean_tpr"), "mean_tpr");
        row.sd_tpr = parse_double_value(next_field(ss, "sd_tpr"), "sd_tpr");
        row.mean_fpr = parse_double_value(next_field(ss, "mean_fpr"), "mean_fpr");
        row.sd_fpr = parse_double_value(next_field(ss, "sd_fpr"), "sd_fpr");
        row.convergence_rate =
            parse_double_value(next_field(ss, "convergence_rate"), "convergence_rate");
        row.replications = static_cast<std::size_t>(
            parse_double_value(next_field(ss, "replications"), "replications"));
        row.max_train_fpr =
            parse_double_value(next_field(ss, "max_train_fpr"), "max_train_fpr");
        table.rows.push_back(row);
    }
    return table;
}

void emit_table(const ResultTable& table, const std::string& format,
                const std::string& out_path) {
    std::string text;
    if (format == "markdown")
        text = render_table_markdown(table);
    else if (format == "csv")
        text = render_table_csv(table);
    else
        throw std::invalid_argument("unknown table format: " + format);
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write file: " + out_path);
    out << text;
    if (!out) throw std::runtime_error("failed writing file: " + out_path);
}

PimaReport run_pima(const std::string& data_csv, const std::string& split_file,
                    double t, const std::string& label_column,
                    const std::string& positive_label) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("t must lie in (0,1)");
    const Dataset full = load_csv(data_csv, label_column, positive_label);
    const SplitSpec spec = load_split_file(split_file);
    auto [train_raw, test_raw] = split(full, spec);

    const ScalingTransform transform = fit_scaling(train_raw);
    const Dataset train = apply_scaling(train_raw, transform);
    const Dataset test = apply_scaling(test_raw, transform);

    PimaReport report;
    report.marker_names = full.marker_names;
    report.t = t;
    report.n_train = train.n_total();
    report.n_test = test.n_total();
    report.train_cases = train.n_cases();
    report.test_cases = test.n_cases();

    for (const std::string& method : {std::string("glm"), std::string("rglm"),
                                      std::string("stpr")}) {
        CombinationModel model;
        bool converged = true;
        if (method == "glm") {
            model = fit_logistic(train);
            converged = model.converged;
        } else if (method == "rglm") {
            model = fit_robust_logistic(train);
            converged = model.converged;
        } else {
            SolverConfig config;
            config.t = t;
            auto [m, diag] = fit_stpr(train, config);
            model = m;
            converged = diag.converged;
        }
        const auto [tpr, fpr] = evaluate_fit(model, train, test, t);
        PimaMethodResult row;
        row.method = method;
        row.coefficients = model.theta;
        row.tpr = 100.0 * tpr;
        row.fpr = 100.0 * fpr;
        row.converged = converged;
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string render_pima_report(const PimaReport& report) {
    std::ostringstream out;
    char head[200];
    std::snprintf(head, sizeof head,
                  "## Fitted combinations of the scaled predictors (t = %.2f)\n\n",
                  report.t);
    out << head;
    out << "Training: " << report.n_train << " observations (" << report.train_cases
        << " cases); test: " << report.n_test << " observations (" << report.test_cases
        << " cases).\n\n";
    out << "| Predictor |";
    for (const auto& row : report.rows) out << ' ' << method_label(row.method) << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < report.rows.size(); ++i) out << "---|";
    out << '\n';
    for (std::size_t j = 0; j < report.marker_names.size(); ++j) {
        out << "| " << report.marker_names[j] << " |";
        for (const auto& row : report.rows) {
            char cell[24];
            std::snprintf(cell, sizeof cell, " %.3f |", row.coefficients[static_cast<Eigen::Index>(j)]);
            out << cell;
        }
        out << '\n';
    }
    out << "| TPR (%) |";
    for (const auto& row : report.rows) {
        char cell[24];
        std::snprintf(cell, sizeof cell, " %.1f |", row.tpr);
        out << cell;
    }
    out << "\n| FPR (%) |";
    for (const auto& row : report.rows) {
        char cell[24];
        std::snprintf(cell, sizeof cell, " %.1f |", row.fpr);
        out << cell;
    }
    out << '\n';
    return out.str();
}

}  // namespace stpr

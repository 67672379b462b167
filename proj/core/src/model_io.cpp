#include "stpr/model_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace stpr {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

double parse_double(const std::string& token, const std::string& key) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw std::runtime_error("bad numeric value for key '" + key + "': " + token);
    return value;
}

}  // namespace

void write_model_file(const ModelRecord& record, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    const auto& m = record.model;
    out << "method=" << m.method_tag << '\n';
    out << "p=" << m.theta.size() << '\n';
    for (Eigen::Index i = 0; i < m.theta.size(); ++i)
        out << "theta_" << i << '=' << format_double(m.theta[i]) << '\n';
    out << "delta=" << format_double(m.delta) << '\n';
    out << "converged=" << (m.converged ? 1 : 0) << '\n';
    out << "iterations=" << m.iterations << '\n';
    if (record.train_threshold)
        out << "train_threshold=" << format_double(*record.train_threshold) << '\n';
    if (record.diagnostics) {
        const auto& d = *record.diagnostics;
        out << "diag_converged=" << (d.converged ? 1 : 0) << '\n';
        out << "diag_iterations=" << d.iterations << '\n';
        out << "diag_smooth_tpr=" << format_double(d.smooth_tpr) << '\n';
        out << "diag_smooth_fpr=" << format_double(d.smooth_fpr) << '\n';
        out << "diag_initializer=" << d.initializer << '\n';
        out << "diag_fallback=" << (d.fallback ? 1 : 0) << '\n';
        out << "diag_h=" << format_double(d.h) << '\n';
        out << "diag_alpha=" << format_double(d.alpha) << '\n';
        out << "diag_kkt_residual=" << format_double(d.kkt_residual) << '\n';
    }
}

ModelRecord read_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("bad model file line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }

    auto require = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw std::runtime_error("model file missing key '" + key + "': " + path);
        return it->second;
    };

    ModelRecord record;
    record.model.method_tag = require("method");
    const auto p = static_cast<Eigen::Index>(parse_double(require("p"), "p"));
    if (p < 1) throw std::runtime_error("model file has invalid dimension");
    record.model.theta.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const std::string key = "theta_" + std::to_string(i);
        record.model.theta[i] = parse_double(require(key), key);
    }
    record.model.delta = parse_double(require("delta"), "delta");
    record.model.converged = require("converged") == "1";
    record.model.iterations =
        static_cast<int>(parse_double(require("iterations"), "iterations"));
    if (kv.count("train_threshold"))
        record.train_threshold = parse_double(kv["train_threshold"], "train_threshold");
    if (kv.count("diag_converged")) {
        FitDiagnostics d;
        d.converged = kv["diag_converged"] == "1";
        d.iterations = static_cast<int>(parse_double(kv["diag_iterations"], "diag_iterations"));
        d.smooth_tpr = parse_double(kv["diag_smooth_tpr"], "diag_smooth_tpr");
        d.smooth_fpr = parse_double(kv["diag_smooth_fpr"], "diag_smooth_fpr");
        d.initializer = kv["diag_initializer"];
        d.fallback = kv["diag_fallback"] == "1";
        d.h = parse_double(kv["diag_h"], "diag_h");
        d.alpha = parse_double(kv["diag_alpha"], "diag_alpha");
        d.kkt_residual = parse_double(kv["diag_kkt_residual"], "diag_kkt_residual");
        record.diagnostics = d;
    }
    return record;
}

}  // namespace stpr

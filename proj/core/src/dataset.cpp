#include "stpr/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace stpr {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

std::string strip(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    const std::string token = strip(cell);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw std::runtime_error("non-numeric value '" + token + "' at row " +
                                 std::to_string(row) + ", column '" + column + "'");
    }
    if (!std::isfinite(value)) {
        throw std::runtime_error("non-finite value at row " + std::to_string(row) +
                                 ", column '" + column + "'");
    }
    return value;
}

Eigen::MatrixXd rows_to_matrix(const std::vector<Eigen::VectorXd>& rows, std::size_t p) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i];
    return m;
}

}  // namespace

Eigen::MatrixXd Dataset::pooled() const {
    Eigen::MatrixXd all(cases.rows() + controls.rows(), cases.cols());
    all.topRows(cases.rows()) = cases;
    all.bottomRows(controls.rows()) = controls;
    return all;
}

void validate(const Dataset& data) {
    if (data.cases.rows() < 1 || data.controls.rows() < 1)
        throw std::invalid_argument("dataset needs at least one case and one control");
    if (data.cases.cols() < 1)
        throw std::invalid_argument("dataset needs at least one marker");
    if (data.cases.cols() != data.controls.cols())
        throw std::invalid_argument("case/control marker column counts differ");
    if (!data.cases.allFinite() || !data.controls.allFinite())
        throw std::invalid_argument("dataset contains non-finite entries");
    if (!data.marker_names.empty() &&
        data.marker_names.size() != static_cast<std::size_t>(data.cases.cols()))
        throw std::invalid_argument("marker name count does not match columns");
}

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::string& positive_label) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
    std::vector<std::string> header = split_fields(line);
    for (auto& name : header) name = strip(name);

    std::ptrdiff_t label_index = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == label_column) label_index = static_cast<std::ptrdiff_t>(j);
    if (label_index < 0)
        throw std::runtime_error("label column '" + label_column + "' not found in " + path);

    std::vector<std::string> marker_names;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (static_cast<std::ptrdiff_t>(j) != label_index) marker_names.push_back(header[j]);
    if (marker_names.empty()) throw std::runtime_error("no marker columns in " + path);

    std::vector<Eigen::VectorXd> case_rows, control_rows;
    std::set<std::string> labels_seen;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (strip(line).empty()) continue;
        std::vector<std::string> fields = split_fields(line);
        if (fields.size() != header.size())
            throw std::runtime_error("row " + std::to_string(row) + " has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(header.size()));
        const std::string label = strip(fields[static_cast<std::size_t>(label_index)]);
        labels_seen.insert(label);
        Eigen::VectorXd values(static_cast<Eigen::Index>(marker_names.size()));
        Eigen::Index k = 0;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (static_cast<std::ptrdiff_t>(j) == label_index) continue;
            values[k++] = parse_cell(fields[j], row, header[j]);
        }
        if (label == positive_label)
            case_rows.push_back(values);
        else
            control_rows.push_back(values);
    }

    if (labels_seen.size() != 2)
        throw std::runtime_error("label column must hold exactly two distinct tokens, saw " +
                                 std::to_string(labels_seen.size()));
    if (case_rows.empty() || control_rows.empty())
        throw std::runtime_error("need at least one case and one control");

    Dataset data;
    data.cases = rows_to_matrix(case_rows, marker_names.size());
    data.controls = rows_to_matrix(control_rows, marker_names.size());
    data.marker_names = std::move(marker_names);
    validate(data);
    return data;
}

ScalingTransform fit_scaling(const Dataset& train) {
    validate(train);
    const Eigen::MatrixXd pooled = train.pooled();
    const Eigen::Index n = pooled.rows();
    if (n < 2) throw std::invalid_argument("scaling needs at least two rows");

    ScalingTransform transform;
    transform.factors.resize(pooled.cols());
    for (Eigen::Index j = 0; j < pooled.cols(); ++j) {
        const double mean = pooled.col(j).mean();
        const double ss = (pooled.col(j).array() - mean).square().sum();
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 0.0) || !std::isfinite(sd)) {
            const std::string name = train.marker_names.empty()
                                         ? "column " + std::to_string(j)
                                         : train.marker_names[static_cast<std::size_t>(j)];
            throw std::runtime_error("zero-variance marker: " + name);
        }
        transform.factors[j] = sd;
    }
    transform.train_derived = true;
    return transform;
}

Dataset apply_scaling(const Dataset& data, const ScalingTransform& transform) {
    if (transform.factors.size() != data.cases.cols())
        throw std::invalid_argument("scaling transform dimension mismatch");
    Dataset out = data;
    const Eigen::ArrayXd inv = transform.factors.array().inverse();
    out.cases = data.cases.array().rowwise() * inv.transpose();
    out.controls = data.controls.array().rowwise() * inv.transpose();
    return out;
}

Dataset invert_scaling(const Dataset& data, const ScalingTransform& transform) {
    if (transform.factors.size() != data.cases.cols())
        throw std::invalid_argument("scaling transform dimension mismatch");
    Dataset out = data;
    out.cases = data.cases.array().rowwise() * transform.factors.array().transpose();
    out.controls = data.controls.array().rowwise() * transform.factors.array().transpose();
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec) {
    const std::size_t n = data.n_total();
    std::vector<char> is_train(n, 0);
    for (std::size_t idx : spec.train_rows) {
        if (idx >= n)
            throw std::invalid_argument("split index " + std::to_string(idx) +
                                        " out of range for " + std::to_string(n) + " rows");
        if (is_train[idx])
            throw std::invalid_argument("duplicate split index " + std::to_string(idx));
        is_train[idx] = 1;
    }
    if (spec.train_rows.empty()) throw std::invalid_argument("empty training split");
    if (spec.train_rows.size() == n) throw std::invalid_argument("empty test split");

    const std::size_t n1 = data.n_cases();
    const Eigen::MatrixXd pooled = data.pooled();
    std::vector<Eigen::VectorXd> train_cases, train_controls, test_cases, test_controls;
    for (std::size_t i = 0; i < n; ++i) {
        const bool is_case = i < n1;
        auto& bucket = is_train[i] ? (is_case ? train_cases : train_controls)
                                   : (is_case ? test_cases : test_controls);
        bucket.push_back(pooled.row(static_cast<Eigen::Index>(i)));
    }
    if (train_cases.empty() || train_controls.empty())
        throw std::invalid_argument("training split lacks a case or a control");
    if (test_cases.empty() || test_controls.empty())
        throw std::invalid_argument("test split lacks a case or a control");

    const std::size_t p = data.n_markers();
    Dataset train{rows_to_matrix(train_cases, p), rows_to_matrix(train_controls, p),
                  data.marker_names};
    Dataset test{rows_to_matrix(test_cases, p), rows_to_matrix(test_controls, p),
                 data.marker_names};
    return {std::move(train), std::move(test)};
}

SplitSpec load_split_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open split file: " + path);
    SplitSpec spec;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string token = strip(line);
        if (token.empty()) continue;
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || ptr != token.data() + token.size())
            throw std::runtime_error("bad index '" + token + "' at line " +
                                     std::to_string(lineno) + " of " + path);
        spec.train_rows.push_back(value);
    }
    if (spec.train_rows.empty()) throw std::runtime_error("empty split file: " + path);
    return spec;
}

void write_csv(const Dataset& data, const std::string& path,
               const std::string& label_column, const std::string& positive_label,
               const std::string& negative_label) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    const std::size_t p = data.n_markers();
    for (std::size_t j = 0; j < p; ++j) {
        out << (data.marker_names.empty() ? "m" + std::to_string(j) : data.marker_names[j])
            << ',';
    }
    out << label_column << '\n';
    char buf[40];
    auto write_row = [&](const Eigen::MatrixXd& m, Eigen::Index i, const std::string& label) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out << buf << ',';
        }
        out << label << '\n';
    };
    for (Eigen::Index i = 0; i < data.cases.rows(); ++i) write_row(data.cases, i, positive_label);
    for (Eigen::Index i = 0; i < data.controls.rows(); ++i)
        write_row(data.controls, i, negative_label);
}

}  // namespace stpr

#pragma once

// Dataset representation, CSV ingestion, equal-variance scaling, and
// train/test splitting. Everything downstream consumes these types.

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace stpr {

// Case/control biomarker matrices. Rows are subjects, columns are markers.
// Immutable by convention once built; all operations return new values.
struct Dataset {
    Eigen::MatrixXd cases;     // n1 x p
    Eigen::MatrixXd controls;  // n0 x p
    std::vector<std::string> marker_names;

    std::size_t n_cases() const { return static_cast<std::size_t>(cases.rows()); }
    std::size_t n_controls() const { return static_cast<std::size_t>(controls.rows()); }
    std::size_t n_total() const { return n_cases() + n_controls(); }
    std::size_t n_markers() const { return static_cast<std::size_t>(cases.cols()); }

    // Pooled rows in canonical order: cases 0..n1-1 first, then controls.
    // Row indices in SplitSpec refer to this ordering.
    Eigen::MatrixXd pooled() const;
};

// Throws std::invalid_argument if the invariants fail (empty group, column
// mismatch, non-finite entry).
void validate(const Dataset& data);

// Per-marker positive scale factors derived from training data.
struct ScalingTransform {
    Eigen::VectorXd factors;  // length p, all > 0
    bool train_derived = true;
};

// Training rows by index into Dataset::pooled() order; the rest form the
// test set.
struct SplitSpec {
    std::vector<std::size_t> train_rows;
};

// Reads a CSV with a header row. The label column must hold exactly two
// distinct tokens; rows whose label equals positive_label become cases.
// Remaining columns are parsed as numeric markers in header order.
Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::string& positive_label);

// Factor for marker k is the pooled (cases+controls) sample standard
// deviation with the n-1 denominator. Throws on zero variance, naming the
// marker.
ScalingTransform fit_scaling(const Dataset& train);

// Divides each marker column by its factor. Case/control partition is
// untouched.
Dataset apply_scaling(const Dataset& data, const ScalingTransform& transform);

// Multiplies factors back in; apply then invert round-trips to 1e-12
// relative error.
Dataset invert_scaling(const Dataset& data, const ScalingTransform& transform);

// Deterministic partition by pooled-row index. Throws on out-of-range or
// duplicate indices and on an empty side.
std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec);

// One zero-based pooled-row index per line, naming training rows.
SplitSpec load_split_file(const std::string& path);

// Writes a Dataset back to the standard CSV format (markers + label column).
void write_csv(const Dataset& data, const std::string& path,
               const std::string& label_column = "label",
               const std::string& positive_label = "1",
               const std::string& negative_label = "0");

}  // namespace stpr

#pragma once

// Minimal SVG plotting for ROC curves: unit square, diagonal reference, a
// vertical marker at the target FPR, and per-curve TPR callouts at that
// marker.

#include "stpr/roc.hpp"

#include <string>
#include <vector>

namespace stpr {

struct LabeledCurve {
    RocCurve curve;
    std::string label;
};

// Interpolated TPR of a curve at a given FPR (linear between curve points).
double curve_tpr_at_fpr(const RocCurve& curve, double fpr);

void plot_roc(const std::vector<LabeledCurve>& curves, double t_marker,
              const std::string& out_path);

}  // namespace stpr

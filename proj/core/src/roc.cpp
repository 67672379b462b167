#include "stpr/roc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

namespace stpr {

Eigen::VectorXd combination_scores(const Eigen::MatrixXd& markers,
                                   const Eigen::VectorXd& theta) {
    if (markers.cols() != theta.size())
        throw std::invalid_argument("direction length does not match marker count");
    return markers * theta;
}

double rate_above(const Eigen::VectorXd& scores, double delta) {
    if (scores.size() == 0) throw std::invalid_argument("empty score vector");
    const auto count = (scores.array() > delta).count();
    return static_cast<double>(count) / static_cast<double>(scores.size());
}

double empirical_tpr(const Eigen::VectorXd& theta, double delta,
                     const Eigen::MatrixXd& cases) {
    return rate_above(combination_scores(cases, theta), delta);
}

double empirical_fpr(const Eigen::VectorXd& theta, double delta,
                     const Eigen::MatrixXd& controls) {
    return rate_above(combination_scores(controls, theta), delta);
}

double threshold_for_fpr_scores(Eigen::VectorXd control_scores, double t) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("t must lie in (0,1)");
    const auto n0 = control_scores.size();
    if (n0 == 0) throw std::invalid_argument("empty control scores");
    // k-th smallest with k = ceil((1-t) n0); the epsilon guards against the
    // product landing an ulp above an exact integer.
    auto k = static_cast<Eigen::Index>(
        std::ceil((1.0 - t) * static_cast<double>(n0) - 1e-12));
    k = std::clamp<Eigen::Index>(k, 1, n0);
    double* begin = control_scores.data();
    std::nth_element(begin, begin + (k - 1), begin + n0);
    return control_scores[k - 1];
}

double threshold_for_fpr(const Eigen::VectorXd& theta,
                         const Eigen::MatrixXd& controls, double t) {
    return threshold_for_fpr_scores(combination_scores(controls, theta), t);
}

RocCurve roc_curve(const Eigen::VectorXd& case_scores,
                   const Eigen::VectorXd& control_scores) {
    if (case_scores.size() == 0 || control_scores.size() == 0)
        throw std::invalid_argument("roc_curve needs nonempty case and control scores");

    std::vector<double> sorted_cases(case_scores.data(),
                                     case_scores.data() + case_scores.size());
    std::vector<double> sorted_controls(control_scores.data(),
                                        control_scores.data() + control_scores.size());
    std::sort(sorted_cases.begin(), sorted_cases.end());
    std::sort(sorted_controls.begin(), sorted_controls.end());

    std::vector<double> thresholds;
    thresholds.reserve(sorted_cases.size() + sorted_controls.size());
    std::merge(sorted_cases.begin(), sorted_cases.end(), sorted_controls.begin(),
               sorted_controls.end(), std::back_inserter(thresholds));
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    const double n1 = static_cast<double>(sorted_cases.size());
    const double n0 = static_cast<double>(sorted_controls.size());
    const double inf = std::numeric_limits<double>::infinity();

    RocCurve curve;
    curve.points.reserve(thresholds.size() + 2);
    curve.points.push_back({inf, 0.0, 0.0});
    // Sweep thresholds from the largest distinct score downward; counts use
    // the strict rule score > threshold.
    for (auto it = thresholds.rbegin(); it != thresholds.rend(); ++it) {
        const double v = *it;
        const double tpr =
            static_cast<double>(sorted_cases.end() -
                                std::upper_bound(sorted_cases.begin(), sorted_cases.end(), v)) /
            n1;
        const double fpr =
            static_cast<double>(
                sorted_controls.end() -
                std::upper_bound(sorted_controls.begin(), sorted_controls.end(), v)) /
            n0;
        curve.points.push_back({v, fpr, tpr});
    }
    curve.points.push_back({-inf, 1.0, 1.0});
    return curve;
}

double auc(const RocCurve& curve) {
    if (curve.points.size() < 2) throw std::invalid_argument("curve has fewer than two points");
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    return area;
}

double tpr_at_test_fpr(const Eigen::VectorXd& theta, const Dataset& test, double t) {
    const double delta = threshold_for_fpr(theta, test.controls, t);
    return empirical_tpr(theta, delta, test.cases);
}

void write_roc_csv(const RocCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "threshold,fpr,tpr\n";
    char buf[128];
    for (const auto& pt : curve.points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", pt.threshold, pt.fpr, pt.tpr);
        out << buf;
    }
}

}  // namespace stpr

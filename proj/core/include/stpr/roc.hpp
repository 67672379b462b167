#pragma once

// Empirical TPR/FPR, control-quantile thresholds, ROC curves, and AUC.
// Classification rule is strictly "score > delta" throughout; ties at the
// threshold count as negative.

#include "stpr/dataset.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace stpr {

// A fitted linear combination: unit-norm direction theta plus threshold.
struct CombinationModel {
    Eigen::VectorXd theta;
    double delta = 0.0;
    std::string method_tag;
    bool converged = true;
    int iterations = 0;
};

struct RocPoint {
    double threshold;
    double fpr;
    double tpr;
};

// Ordered (threshold, FPR, TPR) triples, FPR nondecreasing; first point is
// (0,0) at +inf, last is (1,1) at -inf.
struct RocCurve {
    std::vector<RocPoint> points;
};

// theta' X for every row of a marker matrix.
Eigen::VectorXd combination_scores(const Eigen::MatrixXd& markers,
                                   const Eigen::VectorXd& theta);

// Fraction of case scores strictly greater than delta.
double empirical_tpr(const Eigen::VectorXd& theta, double delta,
                     const Eigen::MatrixXd& cases);

// Fraction of control scores strictly greater than delta.
double empirical_fpr(const Eigen::VectorXd& theta, double delta,
                     const Eigen::MatrixXd& controls);

// Score-space versions used by the hot paths.
double rate_above(const Eigen::VectorXd& scores, double delta);

// The ceil((1-t)*n0)-th smallest control score. Guarantees
// empirical_fpr(theta, delta, controls) <= t on the same controls.
double threshold_for_fpr(const Eigen::VectorXd& theta,
                         const Eigen::MatrixXd& controls, double t);
double threshold_for_fpr_scores(Eigen::VectorXd control_scores, double t);

// Curve evaluated at every distinct score plus +/-inf endpoints.
RocCurve roc_curve(const Eigen::VectorXd& case_scores,
                   const Eigen::VectorXd& control_scores);

// Trapezoidal area; equals the Mann-Whitney statistic with the half-tie
// convention exactly.
double auc(const RocCurve& curve);

// TPR on test cases at the threshold that makes the FPR on test controls
// equal to t (test-quantile rule of the evaluation protocol).
double tpr_at_test_fpr(const Eigen::VectorXd& theta, const Dataset& test,
                       double t);

// CSV export: header "threshold,fpr,tpr", one point per line.
void write_roc_csv(const RocCurve& curve, const std::string& path);

}  // namespace stpr

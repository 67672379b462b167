#pragma once

// Constrained maximization of the smoothed TPR:
//   max  TPR~(theta, delta)   s.t.  ||theta|| = 1,  FPR~(theta, delta) <= t + alpha
// via an augmented Lagrangian with analytic derivatives, a Newton polish of
// the KKT system, and a fallback to the initializer on nonconvergence.

#include "stpr/dataset.hpp"
#include "stpr/roc.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <utility>

namespace stpr {

struct SolverConfig {
    double t = 0.2;                      // target FPR, in (0,1)
    double bandwidth_exponent = -0.5;    // h = sigma * n^exponent
    std::optional<double> alpha_override;  // default 1/(2 n0)
    int max_iterations = 500;            // total inner iterations across outer loops
    double constraint_tolerance = 1e-8;  // KKT residual bound
    double objective_tolerance = 1e-8;   // near-maximizer slack a_n
    double penalty_growth = 10.0;
};

struct FitDiagnostics {
    bool converged = false;
    int iterations = 0;
    double smooth_tpr = 0.0;  // at the returned point
    double smooth_fpr = 0.0;
    std::string initializer;  // "robust-logistic", "logistic", or "unit"
    bool fallback = false;
    double h = 0.0;
    double alpha = 0.0;
    double kkt_residual = 0.0;  // at the final iterate, before repair
};

// Robust-logistic slopes normalized to unit norm (plain logistic if the
// robust fit fails; kind records which). delta0 solves
// smooth_fpr(theta0, delta, controls, h) = t by bisection on
// [min score - 6h, max score + 6h] to absolute tolerance 1e-10.
// Throws if the slope vector is exactly zero.
std::pair<Eigen::VectorXd, double> initialize(const Dataset& train, double t,
                                              double h_exponent = -0.5,
                                              std::string* kind = nullptr,
                                              double* h_out = nullptr);

// Bisection for smooth_fpr(theta, delta, controls, h) = target.
double solve_delta_for_smooth_fpr(const Eigen::VectorXd& theta,
                                  const Eigen::MatrixXd& controls, double h,
                                  double target);

std::pair<CombinationModel, FitDiagnostics> fit_stpr(const Dataset& train,
                                                     const SolverConfig& config);

// Protocol evaluation: TPR on test cases at the test-quantile threshold, and
// FPR on test controls at the training-quantile threshold. The model's own
// delta is not consulted.
std::pair<double, double> evaluate_fit(const CombinationModel& model,
                                       const Dataset& train, const Dataset& test,
                                       double t);

}  // namespace stpr

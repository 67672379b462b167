#pragma once

// The four comparison methods plus the closed-form quadratic likelihood-ratio
// combination used as an exact oracle under proportional covariances.

#include "stpr/dataset.hpp"
#include "stpr/roc.hpp"

#include <Eigen/Core>

#include <cstddef>

namespace stpr {

// Raw logistic fit (intercept + slopes) by IRLS; reused by the robust fit
// and tests that need un-normalized coefficients.
struct LogisticFit {
    double intercept = 0.0;
    Eigen::VectorXd slopes;
    bool converged = false;
    bool separation = false;
    int iterations = 0;
};

LogisticFit fit_logistic_raw(const Dataset& train);

// Maximum-likelihood logistic slopes, intercept discarded, normalized to
// unit norm. Complete separation is detected by a diverging coefficient
// norm; the capped coefficients are returned with converged=false.
CombinationModel fit_logistic(const Dataset& train);

// Bounded-deviance robust logistic estimate (tuning constant c = 0.5,
// bias-correction term included), damped Newton from the plain-logistic
// start; falls back to fit_logistic on nonconvergence.
CombinationModel fit_robust_logistic(const Dataset& train);

LogisticFit fit_robust_logistic_raw(const Dataset& train);

// Best linear combination under multivariate normality:
// theta ~ (Sigma0 + Sigma1)^{-1} (mu1 - mu0), normalized. Sample moments use
// the n-1 denominator.
CombinationModel fit_su_liu(const Dataset& train);

// Exhaustive direction search: p=2 walks 'resolution' angles on the unit
// circle (default 2000), p=3 a Fibonacci lattice on the sphere (default
// 20000). delta comes from threshold_for_fpr at t; the (theta, delta) with
// the highest training TPR wins, ties broken by smallest grid index.
CombinationModel grid_search(const Dataset& train, double t,
                             std::size_t resolution = 0);

// Coefficients of beta0 + beta1 X1 + beta2 X2 + beta3 X1 X2 + beta4 X1^2
// + beta5 X2^2, the ROC-optimal combination when cases are N(mu, sigma2 *
// Sigma) and controls N(mu0, Sigma).
struct QuadraticCombination {
    double beta0, beta1, beta2, beta3, beta4, beta5;

    double evaluate(double x1, double x2) const {
        return beta0 + beta1 * x1 + beta2 * x2 + beta3 * x1 * x2 +
               beta4 * x1 * x1 + beta5 * x2 * x2;
    }
};

// Inputs are shifted so mu0 = 0 internally. Throws unless sigma is positive
// definite and sigma2 > 0. sigma2 = 1 forces beta3 = beta4 = beta5 = 0.
QuadraticCombination quadratic_lr(const Eigen::Vector2d& mu0,
                                  const Eigen::Vector2d& mu1,
                                  const Eigen::Matrix2d& sigma, double sigma2);

}  // namespace stpr

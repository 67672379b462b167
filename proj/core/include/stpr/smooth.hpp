#pragma once

// Smooth approximations to the empirical rates: the indicator 1(s > delta)
// is replaced by Phi((s - delta)/h). Analytic first and second derivatives
// feed the constrained solver.

#include "stpr/dataset.hpp"

#include <Eigen/Core>

namespace stpr {

struct SmoothParams {
    double h;      // bandwidth, > 0
    double alpha;  // constraint relaxation, >= 0
};

// Standard normal CDF/PDF via erfc; absolute accuracy well below 1e-15.
double norm_cdf(double x);
double norm_pdf(double x);

// (1/n) sum Phi((theta'x_i - delta)/h) over the rows of markers.
double smooth_rate(const Eigen::MatrixXd& markers, const Eigen::VectorXd& theta,
                   double delta, double h);

inline double smooth_tpr(const Eigen::VectorXd& theta, double delta,
                         const Eigen::MatrixXd& cases, double h) {
    return smooth_rate(cases, theta, delta, h);
}
inline double smooth_fpr(const Eigen::VectorXd& theta, double delta,
                         const Eigen::MatrixXd& controls, double h) {
    return smooth_rate(controls, theta, delta, h);
}

struct RateGradient {
    Eigen::VectorXd dtheta;
    double ddelta;
};

// Exact gradient of smooth_rate:
//   d/dtheta = (1/(n h)) sum phi(u_i) x_i,   d/ddelta = -(1/(n h)) sum phi(u_i)
RateGradient smooth_rate_gradient(const Eigen::MatrixXd& markers,
                                  const Eigen::VectorXd& theta, double delta,
                                  double h);

inline RateGradient smooth_tpr_gradient(const Eigen::VectorXd& theta, double delta,
                                        const Eigen::MatrixXd& cases, double h) {
    return smooth_rate_gradient(cases, theta, delta, h);
}
inline RateGradient smooth_fpr_gradient(const Eigen::VectorXd& theta, double delta,
                                        const Eigen::MatrixXd& controls, double h) {
    return smooth_rate_gradient(controls, theta, delta, h);
}

// Value, gradient, and Hessian blocks of smooth_rate in one pass. Using
// phi'(u) = -u phi(u):
//   d2/dtheta2    = -(1/(n h^2)) sum u_i phi(u_i) x_i x_i'
//   d2/dtheta ddelta =  (1/(n h^2)) sum u_i phi(u_i) x_i
//   d2/ddelta2    = -(1/(n h^2)) sum u_i phi(u_i)
struct RateExpansion {
    double value;
    Eigen::VectorXd dtheta;
    double ddelta;
    Eigen::MatrixXd dtheta2;
    Eigen::VectorXd dtheta_ddelta;
    double ddelta2;
};

RateExpansion smooth_rate_expansion(const Eigen::MatrixXd& markers,
                                    const Eigen::VectorXd& theta, double delta,
                                    double h);

// h = sigma * n^exponent where sigma is the sample SD (n-1 denominator) of
// the initializer scores over the pooled sample. Throws on zero variance.
double select_bandwidth(const Eigen::VectorXd& theta_init, const Dataset& data,
                        double exponent = -0.5);

// alpha = 1/(2 n0).
double select_alpha(std::size_t n0);

}  // namespace stpr

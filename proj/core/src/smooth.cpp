#include "stpr/smooth.hpp"

#include <cmath>
#include <stdexcept>

namespace stpr {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void check_h(double h) {
    if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
}
}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double smooth_rate(const Eigen::MatrixXd& markers, const Eigen::VectorXd& theta,
                   double delta, double h) {
    check_h(h);
    if (markers.cols() != theta.size())
        throw std::invalid_argument("direction length does not match marker count");
    const Eigen::ArrayXd u = ((markers * theta).array() - delta) / h;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) sum += norm_cdf(u[i]);
    return sum / static_cast<double>(u.size());
}

RateGradient smooth_rate_gradient(const Eigen::MatrixXd& markers,
                                  const Eigen::VectorXd& theta, double delta,
                                  double h) {
    check_h(h);
    if (markers.cols() != theta.size())
        throw std::invalid_argument("direction length does not match marker count");
    const Eigen::Index n = markers.rows();
    const Eigen::ArrayXd u = ((markers * theta).array() - delta) / h;
    Eigen::ArrayXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = norm_pdf(u[i]);
    const double scale = 1.0 / (static_cast<double>(n) * h);
    RateGradient g;
    g.dtheta = scale * (markers.transpose() * w.matrix());
    g.ddelta = -scale * w.sum();
    return g;
}

RateExpansion smooth_rate_expansion(const Eigen::MatrixXd& markers,
                                    const Eigen::VectorXd& theta, double delta,
                                    double h) {
    check_h(h);
    if (markers.cols() != theta.size())
        throw std::invalid_argument("direction length does not match marker count");
    const Eigen::Index n = markers.rows();
    const Eigen::Index p = markers.cols();
    const Eigen::ArrayXd u = ((markers * theta).array() - delta) / h;

    RateExpansion e;
    e.value = 0.0;
    Eigen::ArrayXd w(n), uw(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        e.value += norm_cdf(u[i]);
        w[i] = norm_pdf(u[i]);
        uw[i] = u[i] * w[i];
    }
    const double dn = static_cast<double>(n);
    e.value /= dn;

    const double g1 = 1.0 / (dn * h);
    const double g2 = 1.0 / (dn * h * h);
    e.dtheta = g1 * (markers.transpose() * w.matrix());
    e.ddelta = -g1 * w.sum();
    e.dtheta2.setZero(p, p);
    // X' diag(uw) X without forming the diagonal matrix.
    e.dtheta2 = markers.transpose() * (markers.array().colwise() * uw).matrix();
    e.dtheta2 *= -g2;
    e.dtheta_ddelta = g2 * (markers.transpose() * uw.matrix());
    e.ddelta2 = -g2 * uw.sum();
    return e;
}

double select_bandwidth(const Eigen::VectorXd& theta_init, const Dataset& data,
                        double exponent) {
    const Eigen::MatrixXd pooled = data.pooled();
    if (pooled.cols() != theta_init.size())
        throw std::invalid_argument("direction length does not match marker count");
    const Eigen::VectorXd scores = pooled * theta_init;
    const Eigen::Index n = scores.size();
    if (n < 2) throw std::invalid_argument("bandwidth needs at least two observations");
    const double mean = scores.mean();
    const double ss = (scores.array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw std::runtime_error("combination scores are constant");
    return sd * std::pow(static_cast<double>(n), exponent);
}

double select_alpha(std::size_t n0) {
    if (n0 < 1) throw std::invalid_argument("need at least one control");
    return 1.0 / (2.0 * static_cast<double>(n0));
}

}  // namespace stpr

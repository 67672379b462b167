#include "stpr/baselines.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stpr {

namespace {

constexpr double kDivergenceCap = 1e6;

double expit(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

double softplus(double v) {  // log(1 + e^v), overflow-safe
    if (v > 35.0) return v;
    if (v < -35.0) return std::exp(v);
    return std::log1p(std::exp(v));
}

// Pooled design with a leading intercept column and the 0/1 response.
// Marker columns are standardized in place; both fits are affine-equivariant,
// so solving in standardized coordinates and mapping the coefficients back is
// exact while keeping the score tolerance and ridge jitter scale-meaningful
// even for heavy-tailed markers.
struct PooledDesign {
    Eigen::MatrixXd z;       // n x (p+1), standardized marker columns
    Eigen::VectorXd y;
    Eigen::VectorXd center;  // p, raw column means
    Eigen::VectorXd scale;   // p, raw pooled sd (1 for constant columns)

    // eta = b[0] + sum_j b[j] (x_j - center_j) / scale_j.
    void to_raw(const Eigen::VectorXd& beta, double& intercept,
                Eigen::VectorXd& slopes) const {
        slopes = beta.tail(beta.size() - 1).array() / scale.array();
        intercept = beta[0] - slopes.dot(center);
    }
    Eigen::VectorXd from_raw(double intercept, const Eigen::VectorXd& slopes) const {
        Eigen::VectorXd beta(slopes.size() + 1);
        beta[0] = intercept + slopes.dot(center);
        beta.tail(slopes.size()) = slopes.array() * scale.array();
        return beta;
    }
};

PooledDesign build_design(const Dataset& train) {
    validate(train);
    const Eigen::Index n1 = train.cases.rows();
    const Eigen::Index n0 = train.controls.rows();
    const Eigen::Index p = train.cases.cols();
    PooledDesign d;
    d.z.resize(n1 + n0, p + 1);
    d.z.col(0).setOnes();
    d.z.block(0, 1, n1, p) = train.cases;
    d.z.block(n1, 1, n0, p) = train.controls;
    d.y.resize(n1 + n0);
    d.y.head(n1).setOnes();
    d.y.tail(n0).setZero();

    const Eigen::Index n = d.z.rows();
    d.center.resize(p);
    d.scale.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double mean = d.z.col(j + 1).mean();
        const double ss = (d.z.col(j + 1).array() - mean).square().sum();
        double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        if (!(sd > 0.0)) sd = 1.0;
        d.center[j] = mean;
        d.scale[j] = sd;
        d.z.col(j + 1) = (d.z.col(j + 1).array() - mean) / sd;
    }
    return d;
}

double log_likelihood(const PooledDesign& d, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = d.z * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        ll += d.y[i] * eta[i] - softplus(eta[i]);
    return ll;
}

CombinationModel normalized_model(const Eigen::VectorXd& slopes,
                                  const std::string& tag, bool converged,
                                  int iterations) {
    const double norm = slopes.norm();
    if (!(norm > 1e-12))
        throw std::runtime_error(tag + ": slope vector is zero, no direction defined");
    CombinationModel model;
    model.theta = slopes / norm;
    model.delta = 0.0;
    model.method_tag = tag;
    model.converged = converged;
    model.iterations = iterations;
    return model;
}

// Bounded-deviance pieces, tuning constant c = 0.5 with the standard
// exponential rho and its bias-correction integral.
struct RobustPieces {
    static constexpr double c = 0.5;
    double e_sqrt_c = std::exp(-std::sqrt(c));
    double exp_neg_c = std::exp(-c);
    double g_at_break = g_lower(std::sqrt(c));
    double g_one = g_at_break + std::exp(-std::sqrt(c)) * (1.0 - std::exp(-c));

    static double g_lower(double a) {  // G(e^{-a^2}) for a >= sqrt(c)
        const double w = a + 0.5;
        return std::exp(0.25) *
               (std::exp(-w * w) - 0.5 * std::sqrt(M_PI) * std::erfc(w));
    }

    double rho(double d) const {
        if (d <= c) return d * e_sqrt_c;
        const double s = std::sqrt(d);
        return -2.0 * std::exp(-s) * (1.0 + s) + e_sqrt_c * (2.0 * (1.0 + std::sqrt(c)) + c);
    }
    double psi(double d) const {
        if (d <= c) return e_sqrt_c;
        return std::exp(-std::sqrt(d));
    }
    double dpsi(double d) const {
        if (d <= c) return 0.0;
        const double s = std::sqrt(d);
        return -std::exp(-s) / (2.0 * s);
    }
    // G(t) for t = e^{-m} parameterized by m = -log t >= 0.
    double g_of_neglog(double m) const {
        if (m <= c) return g_at_break + e_sqrt_c * (std::exp(-m) - exp_neg_c);
        return g_lower(std::sqrt(m));
    }
};

}  // namespace

LogisticFit fit_logistic_raw(const Dataset& train) {
    const PooledDesign d = build_design(train);
    const Eigen::Index q = d.z.cols();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
    double ll = log_likelihood(d, beta);

    LogisticFit fit;
    double prev_ll = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= 100; ++iter) {
        const Eigen::VectorXd eta = d.z * beta;
        Eigen::VectorXd pr(eta.size()), w(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            pr[i] = expit(eta[i]);
            w[i] = pr[i] * (1.0 - pr[i]);
        }
        const Eigen::VectorXd score = d.z.transpose() * (d.y - pr);
        fit.iterations = iter;
        // Either the score equations hold, or a full Newton step no longer
        // moves the log-likelihood beyond rounding (stall at the maximum).
        if (score.lpNorm<Eigen::Infinity>() <= 1e-8 ||
            std::abs(ll - prev_ll) <= 1e-13 * (std::abs(ll) + 0.1)) {
            fit.converged = true;
            break;
        }
        prev_ll = ll;
        Eigen::MatrixXd hess = d.z.transpose() * (d.z.array().colwise() * w.array()).matrix();
        hess.diagonal().array() += 1e-10;  // ridge jitter for rank deficiency
        Eigen::VectorXd step = hess.ldlt().solve(score);

        double scale = 1.0;
        Eigen::VectorXd candidate = beta + step;
        double cand_ll = log_likelihood(d, candidate);
        int halvings = 0;
        while (cand_ll < ll && halvings++ < 30) {
            scale *= 0.5;
            candidate = beta + scale * step;
            cand_ll = log_likelihood(d, candidate);
        }
        beta = candidate;
        ll = cand_ll;

        if (beta.norm() > kDivergenceCap) {
            fit.separation = true;
            beta *= kDivergenceCap / beta.norm();
            break;
        }
    }

    // Complete separation leaves no interior maximizer: the score criterion
    // can still trip once the probabilities saturate, so check whether the
    // final direction splits the groups outright.
    if (beta.tail(q - 1).norm() > 0.0) {
        const Eigen::VectorXd eta = d.z * beta;
        double case_min = std::numeric_limits<double>::infinity();
        double control_max = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            if (d.y[i] > 0.5)
                case_min = std::min(case_min, eta[i]);
            else
                control_max = std::max(control_max, eta[i]);
        }
        if (case_min > 0.0 && control_max < 0.0) fit.separation = true;
    }

    d.to_raw(beta, fit.intercept, fit.slopes);
    return fit;
}

CombinationModel fit_logistic(const Dataset& train) {
    const LogisticFit fit = fit_logistic_raw(train);
    return normalized_model(fit.slopes, "glm", fit.converged && !fit.separation,
                            fit.iterations);
}

LogisticFit fit_robust_logistic_raw(const Dataset& train) {
    const PooledDesign d = build_design(train);
    const Eigen::Index n = d.z.rows();
    const RobustPieces rp;

    auto objective = [&](const Eigen::VectorXd& beta) {
        const Eigen::VectorXd eta = d.z * beta;
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double m_pos = softplus(-eta[i]);  // -log p
            const double m_neg = softplus(eta[i]);   // -log (1-p)
            const double dev = d.y[i] > 0.5 ? m_pos : m_neg;
            total += rp.rho(dev) + rp.g_of_neglog(m_pos) + rp.g_of_neglog(m_neg) - rp.g_one;
        }
        return total;
    };

    const LogisticFit start = fit_logistic_raw(train);
    Eigen::VectorXd beta = d.from_raw(start.intercept, start.slopes);
    double obj = objective(beta);

    LogisticFit fit;
    fit.separation = start.separation;
    double prev_obj = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= 50; ++iter) {
        const Eigen::VectorXd eta = d.z * beta;
        Eigen::VectorXd gfac(n), hfac(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = expit(eta[i]);
            const double qq = 1.0 - p;
            const double v = p * qq;
            const double m_pos = softplus(-eta[i]);
            const double m_neg = softplus(eta[i]);
            const double y = d.y[i];
            const double dev = y > 0.5 ? m_pos : m_neg;
            const double dprime = p - y;
            gfac[i] = rp.psi(dev) * dprime + v * (rp.psi(m_pos) - rp.psi(m_neg));
            hfac[i] = rp.dpsi(dev) * dprime * dprime + rp.psi(dev) * v +
                      v * (1.0 - 2.0 * p) * (rp.psi(m_pos) - rp.psi(m_neg)) -
                      v * (qq * rp.dpsi(m_pos) + p * rp.dpsi(m_neg));
        }
        const Eigen::VectorXd grad = d.z.transpose() * gfac;
        fit.iterations = iter;
        // First-order optimality, or an accepted step that no longer moves
        // the objective beyond rounding.
        if (grad.lpNorm<Eigen::Infinity>() <= 1e-8 ||
            std::abs(obj - prev_obj) <= 1e-13 * (std::abs(obj) + 0.1)) {
            fit.converged = true;
            break;
        }
        prev_obj = obj;

        Eigen::MatrixXd hess = d.z.transpose() * (d.z.array().colwise() * hfac.array()).matrix();
        double tau = 0.0;
        Eigen::VectorXd step;
        for (;;) {  // damp until the Newton direction descends
            Eigen::MatrixXd damped = hess;
            damped.diagonal().array() += tau + 1e-12;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
            step = ldlt.solve(-grad);
            if (ldlt.info() == Eigen::Success && grad.dot(step) < 0.0) break;
            tau = std::max(1e-8, tau * 10.0);
            if (tau > 1e12) break;
        }
        if (grad.dot(step) >= 0.0) break;  // no descent direction found

        double scale = 1.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 40; ++halvings) {
            const Eigen::VectorXd candidate = beta + scale * step;
            const double cand = objective(candidate);
            if (cand <= obj + 1e-4 * scale * grad.dot(step)) {
                beta = candidate;
                obj = cand;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) break;
    }
    d.to_raw(beta, fit.intercept, fit.slopes);
    return fit;
}

CombinationModel fit_robust_logistic(const Dataset& train) {
    LogisticFit fit = fit_robust_logistic_raw(train);
    if (!fit.converged || fit.slopes.norm() <= 1e-12) {
        const LogisticFit plain = fit_logistic_raw(train);
        CombinationModel model = normalized_model(plain.slopes, "rglm", false,
                                                  fit.iterations + plain.iterations);
        return model;
    }
    return normalized_model(fit.slopes, "rglm", true, fit.iterations);
}

CombinationModel fit_su_liu(const Dataset& train) {
    validate(train);
    if (train.cases.rows() < 2 || train.controls.rows() < 2)
        throw std::invalid_argument("covariance estimates need at least two rows per group");

    auto moments = [](const Eigen::MatrixXd& m) {
        const Eigen::RowVectorXd mean = m.colwise().mean();
        const Eigen::MatrixXd centered = m.rowwise() - mean;
        const Eigen::MatrixXd cov =
            centered.transpose() * centered / static_cast<double>(m.rows() - 1);
        return std::make_pair(mean.transpose().eval(), cov);
    };
    const auto [mu1, cov1] = moments(train.cases);
    const auto [mu0, cov0] = moments(train.controls);

    const Eigen::MatrixXd total = cov0 + cov1;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(total);
    if (!lu.isInvertible())
        throw std::runtime_error("singular pooled covariance sum");
    const Eigen::VectorXd direction = lu.solve(mu1 - mu0);
    return normalized_model(direction, "suliu", true, 1);
}

CombinationModel grid_search(const Dataset& train, double t, std::size_t resolution) {
    validate(train);
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("t must lie in (0,1)");
    const Eigen::Index p = train.cases.cols();
    if (p != 2 && p != 3)
        throw std::invalid_argument("grid search supports p in {2, 3}");

    const std::size_t k_points = resolution ? resolution : (p == 2 ? 2000 : 20000);

    const Eigen::Index n1 = train.cases.rows();
    const Eigen::Index n0 = train.controls.rows();
    Eigen::VectorXd case_scores(n1), control_scores(n0);

    double best_tpr = -1.0;
    Eigen::VectorXd best_theta;
    double best_delta = 0.0;

    Eigen::VectorXd theta(p);
    for (std::size_t k = 0; k < k_points; ++k) {
        if (p == 2) {
            const double angle = 2.0 * M_PI * static_cast<double>(k) /
                                 static_cast<double>(k_points);
            theta[0] = std::cos(angle);
            theta[1] = std::sin(angle);
        } else {
            // Fibonacci lattice on the unit sphere.
            const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) /
                                       static_cast<double>(k_points);
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double golden = M_PI * (3.0 - std::sqrt(5.0));
            const double phi = golden * static_cast<double>(k);
            theta[0] = r * std::cos(phi);
            theta[1] = r * std::sin(phi);
            theta[2] = z;
        }
        case_scores.noalias() = train.cases * theta;
        control_scores.noalias() = train.controls * theta;
        const double delta = threshold_for_fpr_scores(control_scores, t);
        const double tpr = rate_above(case_scores, delta);
        if (tpr > best_tpr) {  // strict: ties keep the smallest index
            best_tpr = tpr;
            best_theta = theta;
            best_delta = delta;
        }
    }

    CombinationModel model;
    model.theta = best_theta;
    model.delta = best_delta;
    model.method_tag = "grid";
    model.converged = true;
    model.iterations = static_cast<int>(k_points);
    return model;
}

QuadraticCombination quadratic_lr(const Eigen::Vector2d& mu0,
                                  const Eigen::Vector2d& mu1,
                                  const Eigen::Matrix2d& sigma, double sigma2) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
    const double det = sigma(0, 0) * sigma(1, 1) - sigma(0, 1) * sigma(1, 0);
    if (!(sigma(0, 0) > 0.0) || !(det > 0.0))
        throw std::invalid_argument("sigma must be positive definite");

    const double s11 = sigma(1, 1) / det;
    const double s22 = sigma(0, 0) / det;
    const double s12 = -sigma(0, 1) / det;
    const double s21 = -sigma(1, 0) / det;

    // Coefficients in the shifted coordinates where mu0 = 0.
    const Eigen::Vector2d mu = mu1 - mu0;
    const double m1 = mu[0], m2 = mu[1];
    const double b0 = (-s11 * m1 * m1 - s21 * m1 * m2 - s12 * m1 * m2 - s22 * m2 * m2) / sigma2;
    const double b1 = (2.0 * s11 * m1 + s21 * m2 + s12 * m2) / sigma2;
    const double b2 = (s21 * m1 + s12 * m1 + 2.0 * s22 * m2) / sigma2;
    const double b3 = (s12 + s21) * (1.0 - 1.0 / sigma2);
    const double b4 = s11 * (1.0 - 1.0 / sigma2);
    const double b5 = s22 * (1.0 - 1.0 / sigma2);

    // Expand back to the original coordinates (x -> x - mu0 substitution);
    // identical to the shifted form when mu0 = 0.
    const double c1 = mu0[0], c2 = mu0[1];
    QuadraticCombination out;
    out.beta3 = b3;
    out.beta4 = b4;
    out.beta5 = b5;
    out.beta1 = b1 - b3 * c2 - 2.0 * b4 * c1;
    out.beta2 = b2 - b3 * c1 - 2.0 * b5 * c2;
    out.beta0 = b0 - b1 * c1 - b2 * c2 + b3 * c1 * c2 + b4 * c1 * c1 + b5 * c2 * c2;
    return out;
}

}  // namespace stpr

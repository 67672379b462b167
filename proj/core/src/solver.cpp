#include "stpr/solver.hpp"

#include "stpr/baselines.hpp"
#include "stpr/smooth.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace stpr {

namespace {

// State shared by one solve: data views, bandwidth, and target.
struct Problem {
    const Eigen::MatrixXd& cases;
    const Eigen::MatrixXd& controls;
    double h;
    double bound;  // t + alpha

    // Negated smooth TPR (the minimized objective), FPR constraint value,
    // and all derivatives at (theta, delta).
    struct Eval {
        double f;              // -TPR~
        Eigen::VectorXd gf;    // gradient in (theta, delta)
        Eigen::MatrixXd hf;    // Hessian in (theta, delta)
        double g;              // FPR~ - bound
        Eigen::VectorXd gg;
        Eigen::MatrixXd hg;
        double tpr;
        double fpr;
    };

    Eval evaluate(const Eigen::VectorXd& theta, double delta) const {
        const Eigen::Index p = theta.size();
        const RateExpansion te = smooth_rate_expansion(cases, theta, delta, h);
        const RateExpansion fe = smooth_rate_expansion(controls, theta, delta, h);
        Eval e;
        e.tpr = te.value;
        e.fpr = fe.value;
        e.f = -te.value;
        e.g = fe.value - bound;
        e.gf.resize(p + 1);
        e.gf.head(p) = -te.dtheta;
        e.gf[p] = -te.ddelta;
        e.gg.resize(p + 1);
        e.gg.head(p) = fe.dtheta;
        e.gg[p] = fe.ddelta;
        e.hf.setZero(p + 1, p + 1);
        e.hf.topLeftCorner(p, p) = -te.dtheta2;
        e.hf.topRightCorner(p, 1) = -te.dtheta_ddelta;
        e.hf.bottomLeftCorner(1, p) = -te.dtheta_ddelta.transpose();
        e.hf(p, p) = -te.ddelta2;
        e.hg.setZero(p + 1, p + 1);
        e.hg.topLeftCorner(p, p) = fe.dtheta2;
        e.hg.topRightCorner(p, 1) = fe.dtheta_ddelta;
        e.hg.bottomLeftCorner(1, p) = fe.dtheta_ddelta.transpose();
        e.hg(p, p) = fe.ddelta2;
        return e;
    }
};

// KKT residual of min -TPR s.t. theta'theta = 1 (multiplier lambda) and
// g <= 0 (multiplier mu >= 0), measured in the sup norm.
double kkt_residual(const Problem::Eval& e, const Eigen::VectorXd& theta,
                    double lambda, double mu) {
    const Eigen::Index p = theta.size();
    Eigen::VectorXd stat = e.gf + mu * e.gg;
    stat.head(p) += 2.0 * lambda * theta;
    const double c = theta.squaredNorm() - 1.0;
    double r = stat.lpNorm<Eigen::Infinity>();
    r = std::max(r, std::abs(c));
    r = std::max(r, std::max(e.g, 0.0));
    r = std::max(r, std::abs(mu * e.g));
    return r;
}

}  // namespace

double solve_delta_for_smooth_fpr(const Eigen::VectorXd& theta,
                                  const Eigen::MatrixXd& controls, double h,
                                  double target) {
    if (!(target > 0.0 && target < 1.0))
        throw std::invalid_argument("smooth FPR target must lie in (0,1)");
    const Eigen::VectorXd scores = controls * theta;
    double lo = scores.minCoeff() - 6.0 * h;
    double hi = scores.maxCoeff() + 6.0 * h;
    // smooth_fpr is strictly decreasing in delta; expand until bracketed.
    while (smooth_fpr(theta, lo, controls, h) < target) lo -= 6.0 * h;
    while (smooth_fpr(theta, hi, controls, h) > target) hi += 6.0 * h;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (smooth_fpr(theta, mid, controls, h) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::pair<Eigen::VectorXd, double> initialize(const Dataset& train, double t,
                                              double h_exponent, std::string* kind,
                                              double* h_out) {
    validate(train);
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("t must lie in (0,1)");

    Eigen::VectorXd theta;
    std::string used = "robust-logistic";
    const LogisticFit robust = fit_robust_logistic_raw(train);
    if (robust.converged && robust.slopes.norm() > 1e-12) {
        theta = robust.slopes / robust.slopes.norm();
    } else {
        const LogisticFit plain = fit_logistic_raw(train);
        if (plain.slopes.norm() <= 1e-12)
            throw std::runtime_error("initializer slope vector is zero");
        theta = plain.slopes / plain.slopes.norm();
        used = "logistic";
    }

    const double h = select_bandwidth(theta, train, h_exponent);
    const double delta = solve_delta_for_smooth_fpr(theta, train.controls, h, t);
    if (kind) *kind = used;
    if (h_out) *h_out = h;
    return {theta, delta};
}

std::pair<CombinationModel, FitDiagnostics> fit_stpr(const Dataset& train,
                                                     const SolverConfig& config) {
    validate(train);
    if (!(config.t > 0.0 && config.t < 1.0))
        throw std::invalid_argument("t must lie in (0,1)");

    const Eigen::Index p = train.cases.cols();
    const double alpha =
        config.alpha_override.value_or(select_alpha(train.n_controls()));

    FitDiagnostics diag;
    diag.alpha = alpha;

    Eigen::VectorXd theta0;
    double delta0 = 0.0;
    double h = 0.0;
    try {
        std::tie(theta0, delta0) = initialize(train, config.t,
                                              config.bandwidth_exponent,
                                              &diag.initializer, &h);
    } catch (const std::runtime_error&) {
        // Zero slopes (e.g., identical groups): any direction is as good as
        // any other, so start from the first coordinate axis.
        theta0 = Eigen::VectorXd::Zero(p);
        theta0[0] = 1.0;
        diag.initializer = "unit";
        h = select_bandwidth(theta0, train, config.bandwidth_exponent);
        delta0 = solve_delta_for_smooth_fpr(theta0, train.controls, h, config.t);
    }
    diag.h = h;

    const Problem prob{train.cases, train.controls, h, config.t + alpha};
    const double tpr_init = smooth_tpr(theta0, delta0, train.cases, h);

    Eigen::VectorXd x(p + 1);
    x.head(p) = theta0;
    x[p] = delta0;

    double lambda = 0.0, mu = 0.0, rho = 10.0;
    int iterations = 0;
    double last_obj_change = std::numeric_limits<double>::infinity();
    double prev_violation = std::numeric_limits<double>::infinity();
    Problem::Eval e = prob.evaluate(x.head(p), x[p]);

    const auto al_value = [&](const Problem::Eval& ev, const Eigen::VectorXd& theta) {
        const double c = theta.squaredNorm() - 1.0;
        const double s = mu + rho * ev.g;
        double v = ev.f + lambda * c + 0.5 * rho * c * c;
        v += (s > 0.0 ? (s * s - mu * mu) : -mu * mu) / (2.0 * rho);
        return v;
    };

    for (int outer = 0; outer < 30 && iterations < config.max_iterations; ++outer) {
        const double inner_tol =
            std::max(0.1 * config.constraint_tolerance, 1e-2 * std::pow(0.1, outer));

        // Damped Newton on the augmented Lagrangian.
        while (iterations < config.max_iterations) {
            const Eigen::VectorXd theta = x.head(p);
            const double c = theta.squaredNorm() - 1.0;
            const double s = mu + rho * e.g;

            Eigen::VectorXd grad = e.gf;
            grad.head(p) += 2.0 * (lambda + rho * c) * theta;
            Eigen::MatrixXd hess = e.hf;
            hess.topLeftCorner(p, p).diagonal().array() += 2.0 * (lambda + rho * c);
            hess.topLeftCorner(p, p) += 4.0 * rho * theta * theta.transpose();
            if (s > 0.0) {
                grad += s * e.gg;
                hess += rho * e.gg * e.gg.transpose() + s * e.hg;
            }
            if (grad.lpNorm<Eigen::Infinity>() <= inner_tol) break;

            double tau = 0.0;
            Eigen::VectorXd step;
            for (;;) {
                Eigen::MatrixXd damped = hess;
                damped.diagonal().array() += tau;
                Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
                step = ldlt.solve(-grad);
                if (ldlt.info() == Eigen::Success && grad.dot(step) < 0.0 &&
                    step.allFinite())
                    break;
                tau = std::max(1e-10 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff()),
                               tau * 10.0);
                if (tau > 1e14) break;
            }
            if (!(grad.dot(step) < 0.0) || !step.allFinite()) break;

            const double al0 = al_value(e, theta);
            const double slope = grad.dot(step);
            double scale = 1.0;
            bool accepted = false;
            for (int halvings = 0; halvings < 40; ++halvings) {
                const Eigen::VectorXd cand = x + scale * step;
                const Problem::Eval ce = prob.evaluate(cand.head(p), cand[p]);
                if (al_value(ce, cand.head(p)) <= al0 + 1e-4 * scale * slope) {
                    last_obj_change = std::abs(ce.f - e.f);
                    x = cand;
                    e = ce;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            ++iterations;
            if (!accepted) break;
        }

        const double c = x.head(p).squaredNorm() - 1.0;
        lambda += rho * c;
        mu = std::max(0.0, mu + rho * e.g);

        const double residual = kkt_residual(e, x.head(p), lambda, mu);
        if (residual <= config.constraint_tolerance &&
            last_obj_change <= config.objective_tolerance)
            break;

        const double violation = std::max(std::abs(c), std::max(e.g, 0.0));
        if (violation > 0.25 * prev_violation) rho = std::min(rho * config.penalty_growth, 1e12);
        prev_violation = violation;
    }

    // Newton polish of the full KKT system with both constraints active;
    // the FPR constraint binds at any maximizer because TPR~ strictly
    // decreases in delta.
    {
        Eigen::VectorXd v(p + 3);
        v.head(p + 1) = x;
        v[p + 1] = lambda;
        v[p + 2] = std::max(mu, 1e-8);
        Problem::Eval pe = prob.evaluate(v.head(p), v[p]);
        auto residual_vec = [&](const Problem::Eval& ev, const Eigen::VectorXd& vv) {
            Eigen::VectorXd r(p + 3);
            r.head(p + 1) = ev.gf + vv[p + 2] * ev.gg;
            r.head(p) += 2.0 * vv[p + 1] * vv.head(p);
            r[p + 1] = vv.head(p).squaredNorm() - 1.0;
            r[p + 2] = ev.g;
            return r;
        };
        Eigen::VectorXd r = residual_vec(pe, v);
        for (int it = 0; it < 30 && iterations < config.max_iterations + 60; ++it) {
            if (r.lpNorm<Eigen::Infinity>() <= 1e-13) break;
            Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(p + 3, p + 3);
            jac.topLeftCorner(p + 1, p + 1) = pe.hf + v[p + 2] * pe.hg;
            jac.topLeftCorner(p, p).diagonal().array() += 2.0 * v[p + 1];
            jac.block(0, p + 1, p, 1) = 2.0 * v.head(p);
            jac.block(0, p + 2, p + 1, 1) = pe.gg;
            jac.block(p + 1, 0, 1, p) = 2.0 * v.head(p).transpose();
            jac.block(p + 2, 0, 1, p + 1) = pe.gg.transpose();
            const Eigen::VectorXd dv = jac.fullPivLu().solve(-r);
            if (!dv.allFinite()) break;
            double scale = 1.0;
            bool accepted = false;
            for (int halvings = 0; halvings < 30; ++halvings) {
                const Eigen::VectorXd cand = v + scale * dv;
                const Problem::Eval ce = prob.evaluate(cand.head(p), cand[p]);
                const Eigen::VectorXd cr = residual_vec(ce, cand);
                if (cr.norm() <= (1.0 - 1e-4 * scale) * r.norm()) {
                    const double prev_f = pe.f;
                    v = cand;
                    pe = ce;
                    r = cr;
                    last_obj_change = std::abs(pe.f - prev_f);
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            ++iterations;
            if (!accepted) break;
        }
        if (v[p + 2] >= 0.0 && v.allFinite()) {
            x = v.head(p + 1);
            lambda = v[p + 1];
            mu = v[p + 2];
            e = pe;
        }
    }

    const double final_residual = kkt_residual(e, x.head(p), lambda, mu);
    diag.kkt_residual = final_residual;
    diag.iterations = iterations;
    const bool converged = final_residual <= config.constraint_tolerance &&
                           last_obj_change <= config.objective_tolerance;

    // Repair: exact unit norm and constraint boundary.
    Eigen::VectorXd theta_fit = x.head(p);
    theta_fit /= theta_fit.norm();
    double delta_fit =
        solve_delta_for_smooth_fpr(theta_fit, train.controls, h, config.t + alpha);
    const double tpr_fit = smooth_tpr(theta_fit, delta_fit, train.cases, h);

    CombinationModel model;
    model.method_tag = "stpr";
    if (converged && tpr_fit >= tpr_init - config.objective_tolerance) {
        model.theta = theta_fit;
        model.delta = delta_fit;
        model.converged = true;
        diag.converged = true;
        diag.fallback = false;
        diag.smooth_tpr = tpr_fit;
        diag.smooth_fpr = smooth_fpr(theta_fit, delta_fit, train.controls, h);
    } else {
        model.theta = theta0;
        model.delta = delta0;
        model.converged = false;
        diag.converged = false;
        diag.fallback = true;
        diag.smooth_tpr = tpr_init;
        diag.smooth_fpr = smooth_fpr(theta0, delta0, train.controls, h);
    }
    model.iterations = iterations;
    return {model, diag};
}

std::pair<double, double> evaluate_fit(const CombinationModel& model,
                                       const Dataset& train, const Dataset& test,
                                       double t) {
    if (train.n_markers() != test.n_markers())
        throw std::invalid_argument("train and test marker counts differ");
    const double tpr = tpr_at_test_fpr(model.theta, test, t);
    const double train_threshold = threshold_for_fpr(model.theta, train.controls, t);
    const double fpr = empirical_fpr(model.theta, train_threshold, test.controls);
    return {tpr, fpr};
}

}  // namespace stpr

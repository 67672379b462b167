#include "stpr/solver.hpp"

#include "stpr/baselines.hpp"
#include "stpr/simgen.hpp"
#include "stpr/smooth.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using Eigen::VectorXd;

namespace {

stpr::Dataset contaminated_draw(std::uint64_t seed) {
    return stpr::gen_contaminated(800, 50, seed).data;
}

}  // namespace

TEST_CASE("delta bisection hits the smooth FPR target") {
    const auto data = test_util::gaussian_dataset(163, 40, 60, 2, 1.0);
    VectorXd theta(2);
    theta << 0.6, 0.8;
    const double h = stpr::select_bandwidth(theta, data);

    double prev_delta = std::numeric_limits<double>::infinity();
    for (double target : {0.05, 0.2, 0.5, 0.9}) {
        const double delta =
            stpr::solve_delta_for_smooth_fpr(theta, data.controls, h, target);
        CHECK(std::abs(stpr::smooth_fpr(theta, delta, data.controls, h) - target) <= 1e-8);
        CHECK(delta < prev_delta);
        prev_delta = delta;
    }
    CHECK_THROWS_AS(stpr::solve_delta_for_smooth_fpr(theta, data.controls, h, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(stpr::solve_delta_for_smooth_fpr(theta, data.controls, h, 1.0),
                    std::invalid_argument);
}

TEST_CASE("initializer on one positive marker is the unit direction") {
    stpr::Dataset d;
    d.cases.resize(4, 1);
    d.cases << -0.5, 1.0, 2.0, 1.5;
    d.controls.resize(4, 1);
    d.controls << 0.5, -1.0, -2.0, -0.3;
    d.marker_names = {"m1"};

    std::string kind;
    const auto [theta0, delta0] = stpr::initialize(d, 0.2, -0.5, &kind);
    REQUIRE(theta0.size() == 1);
    CHECK(theta0[0] == doctest::Approx(1.0));
    CHECK((kind == "robust-logistic" || kind == "logistic"));
}

TEST_CASE("initializer threshold decreases as the allowed FPR grows") {
    const auto data = contaminated_draw(7001);
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {0.05, 0.1, 0.2, 0.3, 0.5}) {
        const auto [theta0, delta0] = stpr::initialize(data, t);
        CHECK(delta0 < prev);
        prev = delta0;
    }
}

TEST_CASE("initializer solves the smooth FPR equation to 1e-8") {
    const auto data = contaminated_draw(7002);
    std::string kind;
    double h = 0.0;
    const auto [theta0, delta0] = stpr::initialize(data, 0.2, -0.5, &kind, &h);
    CHECK(h > 0.0);
    CHECK(std::abs(stpr::smooth_fpr(theta0, delta0, data.controls, h) - 0.2) <= 1e-8);
}

TEST_CASE("initializer rejects data with no direction") {
    const auto base = test_util::gaussian_dataset(167, 10, 10, 2, 0.0);
    stpr::Dataset same;
    same.cases = base.cases;
    same.controls = base.cases;
    same.marker_names = base.marker_names;
    CHECK_THROWS_AS(stpr::initialize(same, 0.2), std::runtime_error);
}

TEST_CASE("solver output satisfies the declared constraints") {
    stpr::SolverConfig config;
    config.t = 0.2;
    for (std::uint64_t seed : {7003ull, 7004ull, 7005ull}) {
        const auto data = contaminated_draw(seed);
        const auto [model, diag] = stpr::fit_stpr(data, config);

        CHECK(std::abs(model.theta.norm() - 1.0) <= 1e-8);
        CHECK(diag.h > 0.0);
        CHECK(diag.alpha == doctest::Approx(stpr::select_alpha(data.n_controls())));
        if (diag.converged) {
            CHECK(diag.kkt_residual <= config.constraint_tolerance);
            CHECK(stpr::smooth_fpr(model.theta, model.delta, data.controls, diag.h) <=
                  config.t + diag.alpha + 1e-8);
        }

        // Never worse than its own start.
        std::string kind;
        double h = 0.0;
        const auto [theta0, delta0] =
            stpr::initialize(data, config.t, config.bandwidth_exponent, &kind, &h);
        const double tpr_init = stpr::smooth_tpr(theta0, delta0, data.cases, h);
        CHECK(diag.smooth_tpr >= tpr_init - config.objective_tolerance - 1e-12);
    }
}

TEST_CASE("solver converges and beats the initializer on lognormal data") {
    stpr::SolverConfig config;
    config.t = 0.3;
    const auto sample = stpr::gen_lognormal3(400, 400, 7010);
    const auto transform = stpr::fit_scaling(sample.data);
    const auto data = stpr::apply_scaling(sample.data, transform);

    const auto [model, diag] = stpr::fit_stpr(data, config);
    CHECK(std::abs(model.theta.norm() - 1.0) <= 1e-8);
    CHECK(diag.converged);
    CHECK(diag.smooth_tpr >= 0.0);
    CHECK(diag.smooth_fpr <= config.t + diag.alpha + 1e-8);
}

TEST_CASE("solver is deterministic for identical inputs") {
    const auto data = contaminated_draw(7006);
    stpr::SolverConfig config;
    const auto [m1, d1] = stpr::fit_stpr(data, config);
    const auto [m2, d2] = stpr::fit_stpr(data, config);
    CHECK(m1.theta == m2.theta);
    CHECK(m1.delta == m2.delta);
    CHECK(d1.iterations == d2.iterations);
    CHECK(d1.kkt_residual == d2.kkt_residual);
}

TEST_CASE("identical case and control data yields a feasible no-signal point") {
    const auto base = test_util::gaussian_dataset(173, 25, 25, 2, 0.0);
    stpr::Dataset same;
    same.cases = base.cases;
    same.controls = base.cases;
    same.marker_names = base.marker_names;

    stpr::SolverConfig config;
    config.t = 0.2;
    const auto [model, diag] = stpr::fit_stpr(same, config);
    CHECK(diag.initializer == "unit");
    CHECK(std::abs(model.theta.norm() - 1.0) <= 1e-8);

    const double tpr = stpr::smooth_tpr(model.theta, model.delta, same.cases, diag.h);
    const double fpr = stpr::smooth_fpr(model.theta, model.delta, same.controls, diag.h);
    CHECK(fpr <= config.t + diag.alpha + 1e-8);
    CHECK(tpr == doctest::Approx(fpr).epsilon(1e-12));
}

TEST_CASE("solver outscores plain logistic on a contaminated draw") {
    const auto train = contaminated_draw(7007);
    const auto test = stpr::gen_contaminated(20000, 1250, 7008).data;

    stpr::SolverConfig config;
    config.t = 0.2;
    const auto [model, diag] = stpr::fit_stpr(train, config);
    const auto glm = stpr::fit_logistic(train);

    const auto [tpr_stpr, fpr_stpr] = stpr::evaluate_fit(model, train, test, config.t);
    const auto [tpr_glm, fpr_glm] = stpr::evaluate_fit(glm, train, test, config.t);
    CHECK(tpr_stpr > tpr_glm);
    CHECK(fpr_stpr <= config.t + 0.05);
}

TEST_CASE("evaluating on the training data keeps the FPR at or under t") {
    const auto data = contaminated_draw(7009);
    const auto glm = stpr::fit_logistic(data);
    for (double t : {0.1, 0.2, 0.3}) {
        const auto [tpr, fpr] = stpr::evaluate_fit(glm, data, data, t);
        CHECK(fpr <= t);
        CHECK(tpr >= 0.0);
        CHECK(tpr <= 1.0);
    }
}

TEST_CASE("a useless direction scores near t on both axes") {
    const auto train = test_util::gaussian_dataset(179, 10000, 10000, 2, 0.0);
    const auto test = test_util::gaussian_dataset(181, 10000, 10000, 2, 0.0);
    stpr::CombinationModel model;
    model.theta = (VectorXd(2) << 0.0, 1.0).finished();
    model.delta = 0.0;
    const auto [tpr, fpr] = stpr::evaluate_fit(model, train, test, 0.3);
    CHECK(std::abs(tpr - 0.3) <= 0.02);
    CHECK(std::abs(fpr - 0.3) <= 0.02);
}

TEST_CASE("evaluate_fit rejects mismatched marker counts") {
    const auto a = test_util::gaussian_dataset(191, 10, 10, 2);
    const auto b = test_util::gaussian_dataset(193, 10, 10, 3);
    stpr::CombinationModel model;
    model.theta = (VectorXd(2) << 1.0, 0.0).finished();
    CHECK_THROWS_AS(stpr::evaluate_fit(model, a, b, 0.2), std::invalid_argument);
}

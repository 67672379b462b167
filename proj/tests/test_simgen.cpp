#include "stpr/simgen.hpp"

#include "stpr/roc.hpp"

#include <Eigen/Dense>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double mean_of(const VectorXd& v) { return v.mean(); }

double var_of(const VectorXd& v) {
    const double m = v.mean();
    return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

double cov_of(const VectorXd& a, const VectorXd& b) {
    const double ma = a.mean(), mb = b.mean();
    return ((a.array() - ma) * (b.array() - mb)).sum() /
           static_cast<double>(a.size() - 1);
}

}  // namespace

TEST_CASE("contaminated draw places every contaminating row at (6,6)") {
    const auto sample = stpr::gen_contaminated(100, 7, 4001);
    CHECK(sample.data.n_total() == 107);
    CHECK(sample.data.n_markers() == 2);

    std::size_t at_six = 0;
    for (Eigen::Index i = 0; i < sample.data.controls.rows(); ++i)
        if (sample.data.controls(i, 0) == 6.0 && sample.data.controls(i, 1) == 6.0)
            ++at_six;
    CHECK(at_six == 7);
    for (Eigen::Index i = 0; i < sample.data.cases.rows(); ++i)
        CHECK_FALSE((sample.data.cases(i, 0) == 6.0 && sample.data.cases(i, 1) == 6.0));
}

TEST_CASE("uncontaminated latent rule is balanced at large n") {
    const auto sample = stpr::gen_contaminated(100000, 0, 4002);
    CHECK(std::abs(sample.prevalence - 0.5) <= 0.01);
}

TEST_CASE("contaminated prevalence near 47 percent at the table sizes") {
    const auto sample = stpr::gen_contaminated(800, 50, 4003);
    CHECK(std::abs(sample.prevalence - 0.47) <= 0.03);
}

TEST_CASE("the true direction separates the uncontaminated design") {
    const auto small = stpr::gen_contaminated(500, 0, 4004);
    const auto large = stpr::gen_contaminated(20000, 0, 4005);
    const VectorXd truth = (VectorXd(2) << 1.0, 1.0).finished().normalized();
    const double auc_small =
        stpr::auc(stpr::roc_curve(small.data.cases * truth, small.data.controls * truth));
    const double auc_large =
        stpr::auc(stpr::roc_curve(large.data.cases * truth, large.data.controls * truth));
    CHECK(auc_small > 0.6);
    CHECK(auc_large > auc_small - 0.02);
}

TEST_CASE("lognormal sample log-moments match the design at n = 10^5") {
    const auto sample = stpr::gen_lognormal3(100000, 100000, 4006);
    const MatrixXd& controls = sample.data.controls;
    const MatrixXd& cases = sample.data.cases;
    REQUIRE(controls.cols() == 3);

    const VectorXd l1 = controls.col(0).array().log();
    const VectorXd l2 = controls.col(1).array().log();
    const double n = static_cast<double>(controls.rows());

    // 3 standard errors of each sample moment.
    CHECK(std::abs(mean_of(l1) - 1.1) <= 3.0 * std::sqrt(0.04 / n));
    CHECK(std::abs(mean_of(l2) - 1.1) <= 3.0 * std::sqrt(0.5 / n));
    CHECK(std::abs(var_of(l1) - 0.04) <= 3.0 * 0.04 * std::sqrt(2.0 / n));
    CHECK(std::abs(var_of(l2) - 0.5) <= 3.0 * 0.5 * std::sqrt(2.0 / n));
    const double se_cov = std::sqrt((0.04 * 0.5 + 0.09 * 0.09) / n);
    CHECK(std::abs(cov_of(l1, l2) - 0.09) <= 3.0 * se_cov);

    const VectorXd c1 = cases.col(0).array().log();
    const VectorXd c2 = cases.col(1).array().log();
    CHECK(std::abs(mean_of(c1) - 1.0) <= 3.0 * std::sqrt(0.05 / n));
    CHECK(std::abs(mean_of(c2) - 1.0) <= 3.0 * std::sqrt(0.05 / n));
    CHECK(std::abs(var_of(c1) - 0.05) <= 3.0 * 0.05 * std::sqrt(2.0 / n));
    const double se_cov_cases = std::sqrt((0.05 * 0.05 + 0.015 * 0.015) / n);
    CHECK(std::abs(cov_of(c1, c2) - 0.015) <= 3.0 * se_cov_cases);
}

TEST_CASE("the third lognormal marker is pure noise") {
    const auto sample = stpr::gen_lognormal3(10000, 10000, 4007);
    const VectorXd a = sample.data.cases.col(2).array().log();
    const VectorXd b = sample.data.controls.col(2).array().log();
    const double pooled_se =
        std::sqrt(var_of(a) / static_cast<double>(a.size()) +
                  var_of(b) / static_cast<double>(b.size()));
    CHECK(std::abs(mean_of(a) - mean_of(b)) / pooled_se < 4.0);
}

TEST_CASE("all lognormal markers are strictly positive") {
    const auto sample = stpr::gen_lognormal3(2000, 2000, 4008);
    CHECK(sample.data.cases.minCoeff() > 0.0);
    CHECK(sample.data.controls.minCoeff() > 0.0);
}

TEST_CASE("mixture links are continuous and correctly shaped") {
    CHECK(stpr::mixture_link_value(stpr::MixtureLink::f1, 0.0) == doctest::Approx(0.5));
    CHECK(stpr::mixture_link_value(stpr::MixtureLink::f2, 0.0) == doctest::Approx(0.5));
    CHECK(stpr::mixture_link_value(stpr::MixtureLink::f2, -1e-12) ==
          doctest::Approx(0.5).epsilon(1e-9));
    CHECK(stpr::mixture_link_value(stpr::MixtureLink::f2, 1e-12) ==
          doctest::Approx(0.5).epsilon(1e-9));

    // Left branch is shallow, right branch steep.
    CHECK(stpr::mixture_link_value(stpr::MixtureLink::f2, -3.0) ==
          doctest::Approx(1.0 / (1.0 + std::exp(1.0))));
    CHECK(stpr::mixture_link_value(stpr::MixtureLink::f2, 1.0) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-3.0))));
    CHECK(stpr::mixture_link_value(stpr::MixtureLink::f1, 700.0) == doctest::Approx(1.0));
    CHECK(stpr::mixture_link_value(stpr::MixtureLink::f1, -700.0) ==
          doctest::Approx(0.0));
}

TEST_CASE("mixture prevalence tracks the intercept") {
    // The index 4 X1 - 3 X2 - 0.8 (X1 - X2)^3 is odd in (X1, X2), which is
    // symmetric about zero, so beta0 = 0 gives prevalence 1/2 exactly; the
    // other expectations are numerically integrated against N(0, Sigma0).
    const auto at_zero = stpr::gen_mixture(100000, stpr::MixtureLink::f1, 0.0, false, 4009);
    CHECK(at_zero.prevalence >= 0.48);
    CHECK(at_zero.prevalence <= 0.52);

    const auto negative =
        stpr::gen_mixture(100000, stpr::MixtureLink::f1, -1.75, false, 4010);
    CHECK(negative.prevalence >= 0.16);
    CHECK(negative.prevalence <= 0.19);

    const auto positive =
        stpr::gen_mixture(100000, stpr::MixtureLink::f1, 3.5, false, 4011);
    CHECK(positive.prevalence >= 0.94);
    CHECK(positive.prevalence <= 0.98);
}

TEST_CASE("outlier flag scatters about five percent outside the core ellipse") {
    const auto sample = stpr::gen_mixture(10000, stpr::MixtureLink::f1, 0.0, true, 4012);
    Eigen::Matrix2d cov0;
    cov0 << 0.2, 0.18, 0.18, 0.2;
    const Eigen::Matrix2d inv = cov0.inverse();
    const double chi2_99 = 9.21034;  // two-dof 99% quantile

    std::size_t outside = 0, total = 0;
    auto scan = [&](const MatrixXd& rows) {
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            const Eigen::Vector2d x = rows.row(i).transpose();
            if (x.dot(inv * x) > chi2_99) ++outside;
            ++total;
        }
    };
    scan(sample.data.cases);
    scan(sample.data.controls);
    const double fraction = static_cast<double>(outside) / static_cast<double>(total);
    CHECK(std::abs(fraction - 0.05) <= 0.015);

    const auto clean = stpr::gen_mixture(10000, stpr::MixtureLink::f1, 0.0, false, 4013);
    std::size_t clean_outside = 0;
    auto scan_clean = [&](const MatrixXd& rows) {
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            const Eigen::Vector2d x = rows.row(i).transpose();
            if (x.dot(inv * x) > chi2_99) ++clean_outside;
        }
    };
    scan_clean(clean.data.cases);
    scan_clean(clean.data.controls);
    CHECK(static_cast<double>(clean_outside) / 10000.0 <= 0.02);
}

TEST_CASE("generators are pure functions of spec and seed") {
    stpr::ScenarioSpec spec;
    spec.family = stpr::ScenarioFamily::normal_mixture;
    spec.n = 500;
    spec.link = stpr::MixtureLink::f2;
    spec.beta0 = -1.75;
    spec.outliers = true;

    const auto a = stpr::generate(spec, 4014);
    const auto b = stpr::generate(spec, 4014);
    CHECK(a.data.cases == b.data.cases);
    CHECK(a.data.controls == b.data.controls);
    CHECK(a.prevalence == b.prevalence);

    const auto c = stpr::generate(spec, 4015);
    CHECK(a.data.n_total() == c.data.n_total());
    CHECK_FALSE((a.data.cases.rows() == c.data.cases.rows() &&
                 a.data.cases == c.data.cases));
}

TEST_CASE("derived replication seeds are order independent and distinct") {
    const std::uint64_t base = 99;
    CHECK(stpr::derive_replication_seed(base, 7) == stpr::derive_replication_seed(base, 7));
    CHECK(stpr::derive_replication_seed(base, 7) != stpr::derive_replication_seed(base, 8));
    CHECK(stpr::derive_replication_seed(base, 0) != stpr::derive_replication_seed(base + 1, 0));

    // No collisions over a realistic replication range.
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t r = 0; r < 4096; ++r)
        seeds.push_back(stpr::derive_replication_seed(base, r));
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());

    // Permuting the derivation order changes nothing.
    std::vector<std::uint64_t> order(256);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937_64(5));
    std::vector<std::uint64_t> permuted(256);
    for (std::uint64_t r : order) permuted[r] = stpr::derive_replication_seed(base, r);
    for (std::uint64_t r = 0; r < 256; ++r)
        CHECK(permuted[r] == stpr::derive_replication_seed(base, r));
}

TEST_CASE("adjacent replication streams differ immediately") {
    const auto a =
        stpr::gen_contaminated(200, 10, stpr::derive_replication_seed(1, 0));
    const auto b =
        stpr::gen_contaminated(200, 10, stpr::derive_replication_seed(1, 1));
    CHECK_FALSE((a.data.cases.rows() == b.data.cases.rows() && a.data.cases == b.data.cases));
}

TEST_CASE("scenario family names round-trip") {
    for (auto family : {stpr::ScenarioFamily::contaminated_normal,
                        stpr::ScenarioFamily::lognormal3,
                        stpr::ScenarioFamily::normal_mixture})
        CHECK(stpr::parse_family(stpr::family_name(family)) == family);
    CHECK_THROWS_AS(stpr::parse_family("nope"), std::invalid_argument);
}

#include "stpr/simgen.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace stpr {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed) {
    std::uint64_t state = seed;
    std::seed_seq seq{splitmix64(state), splitmix64(state), splitmix64(state),
                      splitmix64(state)};
    return std::mt19937_64(seq);
}

double stable_expit(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

double piecewise_logistic(double v) {
    if (v < 0.0) return stable_expit(v / 3.0);
    return stable_expit(3.0 * v);
}

Dataset assemble(const std::vector<Eigen::VectorXd>& case_rows,
                 const std::vector<Eigen::VectorXd>& control_rows,
                 std::vector<std::string> names) {
    if (case_rows.empty() || control_rows.empty())
        throw std::runtime_error("generated sample lacks a case or a control");
    const auto p = case_rows.front().size();
    Dataset data;
    data.cases.resize(static_cast<Eigen::Index>(case_rows.size()), p);
    for (std::size_t i = 0; i < case_rows.size(); ++i)
        data.cases.row(static_cast<Eigen::Index>(i)) = case_rows[i];
    data.controls.resize(static_cast<Eigen::Index>(control_rows.size()), p);
    for (std::size_t i = 0; i < control_rows.size(); ++i)
        data.controls.row(static_cast<Eigen::Index>(i)) = control_rows[i];
    data.marker_names = std::move(names);
    return data;
}

}  // namespace

std::uint64_t derive_replication_seed(std::uint64_t base_seed,
                                      std::uint64_t replication_index) {
    std::uint64_t state = replication_index;
    const std::uint64_t mixed = splitmix64(state);
    std::uint64_t combined = base_seed ^ mixed;
    return splitmix64(combined);
}

GeneratedSample gen_contaminated(std::size_t n_typical, std::size_t n_contam,
                                 std::uint64_t seed) {
    auto rng = make_engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<Eigen::VectorXd> case_rows, control_rows;
    for (std::size_t i = 0; i < n_typical; ++i) {
        Eigen::VectorXd x(2);
        x[0] = normal(rng);
        x[1] = normal(rng);
        // Standard logistic variate via inverse CDF.
        const double u = unif(rng);
        const double zeta = std::log(u / (1.0 - u));
        if (2.0 * x[0] + 2.0 * x[1] + zeta > 0.0)
            case_rows.push_back(x);
        else
            control_rows.push_back(x);
    }
    for (std::size_t i = 0; i < n_contam; ++i) {
        Eigen::VectorXd x(2);
        x[0] = 6.0;
        x[1] = 6.0;
        control_rows.push_back(x);
    }

    GeneratedSample sample;
    sample.data = assemble(case_rows, control_rows, {"x1", "x2"});
    sample.prevalence = static_cast<double>(case_rows.size()) /
                        static_cast<double>(n_typical + n_contam);
    return sample;
}

GeneratedSample gen_lognormal3(std::size_t n_cases, std::size_t n_controls,
                               std::uint64_t seed) {
    if (n_cases < 1 || n_controls < 1)
        throw std::invalid_argument("both group sizes must be at least 1");
    auto rng = make_engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const Eigen::Vector2d mean_controls(1.1, 1.1);
    Eigen::Matrix2d cov_controls;
    cov_controls << 0.04, 0.09, 0.09, 0.5;
    const Eigen::Vector2d mean_cases(1.0, 1.0);
    Eigen::Matrix2d cov_cases;
    cov_cases << 0.05, 0.015, 0.015, 0.05;
    const double mean3 = 1.65, sd3 = std::sqrt(4.66);

    const Eigen::Matrix2d l_controls = cov_controls.llt().matrixL();
    const Eigen::Matrix2d l_cases = cov_cases.llt().matrixL();

    auto draw = [&](const Eigen::Vector2d& mean, const Eigen::Matrix2d& l) {
        Eigen::Vector2d z(normal(rng), normal(rng));
        const Eigen::Vector2d logs = mean + l * z;
        Eigen::VectorXd x(3);
        x[0] = std::exp(logs[0]);
        x[1] = std::exp(logs[1]);
        x[2] = std::exp(mean3 + sd3 * normal(rng));
        return x;
    };

    std::vector<Eigen::VectorXd> case_rows, control_rows;
    case_rows.reserve(n_cases);
    control_rows.reserve(n_controls);
    for (std::size_t i = 0; i < n_cases; ++i) case_rows.push_back(draw(mean_cases, l_cases));
    for (std::size_t i = 0; i < n_controls; ++i)
        control_rows.push_back(draw(mean_controls, l_controls));

    GeneratedSample sample;
    sample.data = assemble(case_rows, control_rows, {"x1", "x2", "x3"});
    sample.prevalence =
        static_cast<double>(n_cases) / static_cast<double>(n_cases + n_controls);
    return sample;
}

GeneratedSample gen_mixture(std::size_t n, MixtureLink link, double beta0,
                            bool outliers, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample size must be at least 1");
    if (!std::isfinite(beta0)) throw std::invalid_argument("beta0 must be finite");
    auto rng = make_engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Eigen::Matrix2d cov0;
    cov0 << 0.2, 0.18, 0.18, 0.2;  // 0.2 * [1 .9; .9 1]
    const Eigen::Matrix2d l0 = cov0.llt().matrixL();
    const double sd1 = std::sqrt(2.0);

    std::vector<Eigen::VectorXd> case_rows, control_rows;
    for (std::size_t i = 0; i < n; ++i) {
        const bool contaminated = outliers && unif(rng) < 0.05;
        Eigen::VectorXd x(2);
        if (contaminated) {
            x[0] = sd1 * normal(rng);
            x[1] = sd1 * normal(rng);
        } else {
            Eigen::Vector2d z(normal(rng), normal(rng));
            const Eigen::Vector2d v = l0 * z;
            x[0] = v[0];
            x[1] = v[1];
        }
        const double d = x[0] - x[1];
        const double predictor = beta0 + 4.0 * x[0] - 3.0 * x[1] - 0.8 * d * d * d;
        const double prob =
            link == MixtureLink::f1 ? stable_expit(predictor) : piecewise_logistic(predictor);
        if (unif(rng) < prob)
            case_rows.push_back(x);
        else
            control_rows.push_back(x);
    }

    GeneratedSample sample;
    sample.data = assemble(case_rows, control_rows, {"x1", "x2"});
    sample.prevalence =
        static_cast<double>(case_rows.size()) / static_cast<double>(n);
    return sample;
}

double mixture_link_value(MixtureLink link, double v) {
    return link == MixtureLink::f1 ? stable_expit(v) : piecewise_logistic(v);
}

GeneratedSample generate(const ScenarioSpec& spec, std::uint64_t seed) {
    switch (spec.family) {
        case ScenarioFamily::contaminated_normal:
            return gen_contaminated(spec.n_typical, spec.n_contam, seed);
        case ScenarioFamily::lognormal3:
            return gen_lognormal3(spec.n_cases, spec.n_controls, seed);
        case ScenarioFamily::normal_mixture:
            return gen_mixture(spec.n, spec.link, spec.beta0, spec.outliers, seed);
    }
    throw std::logic_error("unknown scenario family");
}

std::string family_name(ScenarioFamily family) {
    switch (family) {
        case ScenarioFamily::contaminated_normal: return "contaminated-normal";
        case ScenarioFamily::lognormal3: return "lognormal3";
        case ScenarioFamily::normal_mixture: return "normal-mixture";
    }
    throw std::logic_error("unknown scenario family");
}

ScenarioFamily parse_family(const std::string& name) {
    if (name == "contaminated-normal") return ScenarioFamily::contaminated_normal;
    if (name == "lognormal3") return ScenarioFamily::lognormal3;
    if (name == "normal-mixture") return ScenarioFamily::normal_mixture;
    throw std::invalid_argument("unknown scenario family: " + name);
}

}  // namespace stpr

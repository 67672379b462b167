#pragma once

// Seedable generators for the three simulation designs: contaminated
// bivariate normal, conditionally lognormal three-marker, and the bivariate
// normal mixture with a cubic link. All generators are pure functions of
// (spec, seed).

#include "stpr/dataset.hpp"

#include <cstdint>
#include <string>

namespace stpr {

enum class MixtureLink { f1, f2 };

enum class ScenarioFamily { contaminated_normal, lognormal3, normal_mixture };

struct ScenarioSpec {
    ScenarioFamily family = ScenarioFamily::contaminated_normal;
    // contaminated_normal
    std::size_t n_typical = 800;
    std::size_t n_contam = 50;
    // lognormal3
    std::size_t n_cases = 400;
    std::size_t n_controls = 400;
    // normal_mixture
    std::size_t n = 800;
    MixtureLink link = MixtureLink::f1;
    double beta0 = 0.0;
    bool outliers = false;
};

struct GeneratedSample {
    Dataset data;
    double prevalence = 0.0;  // realized fraction of cases
};

// X1, X2 iid standard normal; D = 1(2 X1 + 2 X2 + zeta > 0) with zeta
// standard logistic; n_contam extra controls placed at exactly (6, 6).
GeneratedSample gen_contaminated(std::size_t n_typical, std::size_t n_contam,
                                 std::uint64_t seed);

// Group-conditional bivariate lognormal (X1, X2) plus an independent
// lognormal X3 identically distributed in both groups (pure noise).
// Controls: E log = (1.1, 1.1), Var log = (0.04, 0.5), Cov log = 0.09.
// Cases:    E log = (1, 1),     Var log = (0.05, 0.05), Cov log = 0.015.
// X3: E log = 1.65, Var log = 4.66.
GeneratedSample gen_lognormal3(std::size_t n_cases, std::size_t n_controls,
                               std::uint64_t seed);

// (X1, X2) = (1 - Delta) Z0 + Delta Z1 with Z0 ~ N(0, 0.2 [1 .9; .9 1]),
// Z1 ~ N(0, 2 I), Delta ~ Bernoulli(0.05) when outliers is set, else 0.
// D ~ Bernoulli(f(beta0 + 4 X1 - 3 X2 - 0.8 (X1 - X2)^3)) with f the chosen
// link; f1 is a numerically stable expit, f2 the piecewise logistic
// 1(v<0)/(1+e^{-v/3}) + 1(v>=0)/(1+e^{-3v}).
GeneratedSample gen_mixture(std::size_t n, MixtureLink link, double beta0,
                            bool outliers, std::uint64_t seed);

GeneratedSample generate(const ScenarioSpec& spec, std::uint64_t seed);

// Success-probability links of the mixture design, exposed for direct checks:
// f1 is the overflow-safe expit, f2 the piecewise logistic with slow left and
// steep right branches (continuous at 0 where both equal 0.5).
double mixture_link_value(MixtureLink link, double v);

// Counter-based seed derivation (splitmix64 over base ^ mixed index) so
// replication r sees the same stream regardless of execution order.
std::uint64_t derive_replication_seed(std::uint64_t base_seed,
                                      std::uint64_t replication_index);

std::string family_name(ScenarioFamily family);
ScenarioFamily parse_family(const std::string& name);

}  // namespace stpr

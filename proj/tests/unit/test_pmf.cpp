#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "relaychain/errors.hpp"
#include "relaychain/moments.hpp"
#include "relaychain/pmf.hpp"

using namespace relaychain;

namespace {

const SystemParams half(0.5, 0.5, 0.1, PathLossModel::bounded(3.0), InterferenceMode::dependent);

}  // namespace

TEST_CASE("single link masses match the references") {
    PmfEngine engine(uniform_chain(1, 1.0), half);
    for (int t = 1; t <= 4; ++t) {
        CAPTURE(t);
        const auto p = engine.link_pmf(0, t);
        CHECK(std::abs(p.value - oracle::bounded_half::pmf[t - 1]) < 1e-13);
        CHECK(p.error < 1e-12);
    }
}

TEST_CASE("composition count") {
    CHECK(composition_count(5, 1) == 1.0);
    CHECK(composition_count(5, 5) == 1.0);
    CHECK(composition_count(5, 2) == 4.0);
    CHECK(composition_count(30, 3) == 406.0);
    CHECK(composition_count(2, 3) == 0.0);
}

TEST_CASE("joint moment of the empty exponent is one") {
    PmfEngine engine(uniform_chain(2, 1.0), half);
    const auto m = engine.joint_moment({0, 0});
    CHECK(m.value == 1.0);
    CHECK(m.error < 1e-15);
    // A single active link reduces to a radial moment: E[Omega] = P[T_n = 1].
    CHECK(engine.joint_moment({1, 0}).value == doctest::Approx(oracle::bounded_half::pmf[0]).epsilon(1e-13));
    CHECK_THROWS_AS(engine.joint_moment({1}), ModelError);
    CHECK_THROWS_AS(engine.joint_moment({-1, 0}), ModelError);
}

TEST_CASE("joint law marginalizes to the link law") {
    PmfEngine engine(uniform_chain(2, 1.0), half);
    double marginal = 0.0;
    for (int t2 = 1; t2 <= 22; ++t2) {
        const int t[] = {2, t2};
        marginal += engine.joint_pmf(t).value;
    }
    // The omitted tail is P[T_1 = 2, T_2 > 22] <= P[T_2 > 22].
    const double tail = engine.link_survival(1, 22).value;
    CHECK(tail < 1e-9);
    CHECK(marginal == doctest::Approx(engine.link_pmf(0, 2).value).epsilon(1e-8));
}

TEST_CASE("dependent links are positively associated") {
    PmfEngine engine(uniform_chain(2, 1.0), half);
    const int ones[] = {1, 1};
    const double p11 = engine.joint_pmf(ones).value;
    const double p1 = engine.link_pmf(0, 1).value;
    CHECK(p11 > p1 * p1);
}

TEST_CASE("survival is consistent with the masses") {
    PmfEngine engine(uniform_chain(1, 1.0), half);
    double below = 0.0;
    for (int t = 1; t <= 6; ++t) below += engine.link_pmf(0, t).value;
    CHECK(engine.link_survival(0, 6).value == doctest::Approx(1.0 - below).epsilon(1e-10));
    CHECK(engine.link_survival(0, 0).value == 1.0);
}

TEST_CASE("single link table sums to one and reproduces the mean") {
    const auto table = travel_time_pmf(uniform_chain(1, 1.0), half, 30);
    CHECK(table.first == 1);
    CHECK(table.mass.size() == 30);
    const double total = table.total_mass() + table.tail_mass_bound;
    // Masses near t_max are tiny against their certified errors.
    CHECK(total >= 1.0 - 1e-9);
    CHECK(total <= 1.0 + table.total_error() + 1e-15);
    CHECK(table.total_error() < 1e-8);
    CHECK(table.truncated_mean() ==
          doctest::Approx(oracle::bounded_half::mean_dependent).epsilon(1e-6));
    std::ostringstream csv;
    table.write_csv(csv);
    CHECK(csv.str().rfind("# tail_mass_bound = ", 0) == 0);
    CHECK(csv.str().find("t,mass\n1,") != std::string::npos);
}

TEST_CASE("independent mode is a geometric convolution") {
    const auto P = half.with_mode(InterferenceMode::independent);
    const double q = oracle::bounded_half::pmf[0];  // per-slot success
    const auto one = travel_time_pmf(uniform_chain(1, 1.0), P, 20);
    for (int t = 1; t <= 20; ++t) CHECK(one.at(t) == doctest::Approx(q * std::pow(1 - q, t - 1)).epsilon(1e-12));
    // Two hops: negative binomial (t - 1) q^2 (1 - q)^(t - 2).
    const auto two = travel_time_pmf(uniform_chain(2, 1.0), P, 25);
    for (int t = 2; t <= 25; ++t)
        CHECK(two.at(t) == doctest::Approx((t - 1) * q * q * std::pow(1 - q, t - 2)).epsilon(1e-11));
    CHECK(two.total_mass() + two.tail_mass_bound == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trivial limits give a point mass at N") {
    const auto g = PathLossModel::bounded(3.0);
    for (const auto& P : {SystemParams(0.0, 1.0, 0.1, g, InterferenceMode::dependent),
                          SystemParams(1.0, 0.0, 0.1, g, InterferenceMode::dependent),
                          SystemParams(0.0, 1.0, 0.1, g, InterferenceMode::independent)}) {
        const auto table = travel_time_pmf(uniform_chain(3, 0.5), P, 6);
        CHECK(table.at(3) == 1.0);
        CHECK(table.at(4) == 0.0);
        CHECK(table.tail_mass_bound == 0.0);
    }
}

TEST_CASE("budgets and precision limits are enforced") {
    PmfOptions tight;
    tight.term_budget = 10;
    CHECK_THROWS_AS(travel_time_pmf(uniform_chain(3, 0.5), half, 12, tight), BudgetError);
    const int t[] = {1, 1, 1};
    CHECK_NOTHROW(joint_pmf(uniform_chain(3, 0.5), half, t, tight));

    PmfOptions strict;
    strict.mass_tolerance = 1e-30;
    CHECK_THROWS_AS(link_pmf(uniform_chain(1, 1.0), 0, half, 12, strict), PrecisionError);

    CHECK_THROWS_AS(travel_time_pmf(uniform_chain(3, 0.5), half, 2), ModelError);
}

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "relaychain/errors.hpp"
#include "relaychain/montecarlo.hpp"

using namespace relaychain;

namespace {

const SystemParams half(0.5, 0.5, 0.1, PathLossModel::bounded(3.0), InterferenceMode::dependent);

McConfig config(std::size_t trials, std::uint64_t seed) {
    McConfig c;
    c.trials = trials;
    c.master_seed = seed;
    return c;
}

}  // namespace

TEST_CASE("ppp counts are Poisson") {
    const double lambda = 1.0, R = 3.0;
    const double expected = lambda * oracle::pi * R * R;
    Engine rng(42);
    const int draws = 4000;
    double sum = 0.0;
    for (int i = 0; i < draws; ++i) {
        const auto pts = sample_ppp(lambda, {1.0, 2.0}, R, rng);
        sum += static_cast<double>(pts.size());
        for (Point x : pts) REQUIRE(distance(x, {1.0, 2.0}) <= R);
    }
    const double se = std::sqrt(expected / draws);
    CHECK(std::abs(sum / draws - expected) < 4 * se);
    CHECK(sample_ppp(0.0, {0, 0}, 5.0, rng).empty());
}

TEST_CASE("a larger disk extends the same realization") {
    Engine a(7), b(7);
    const auto small = sample_ppp(0.8, {0, 0}, 4.0, a);
    const auto large = sample_ppp(0.8, {0, 0}, 9.0, b);
    REQUIRE(large.size() >= small.size());
    for (std::size_t i = 0; i < small.size(); ++i) CHECK(large[i] == small[i]);
}

TEST_CASE("one interferer blocks with the Rayleigh probability") {
    // Success iff h > theta g(u) h_u / g(L): probability 1 / (1 + theta g(u) / g(L)).
    const Link link{{0, 0}, {0.5, 0}};
    const Point u{2.5, 0};
    const double theta = 0.5;
    const SystemParams P(1.0, 1.0, theta, PathLossModel::singular(3.0), InterferenceMode::dependent);
    const double q = 1.0 / (1.0 + theta * std::pow(2.0, -3.0) / std::pow(0.5, -3.0));
    Engine rng(3);
    const int n = 200000;
    int ok = 0;
    for (int i = 0; i < n; ++i) ok += simulate_slot(link, std::span<const Point>(&u, 1), P, rng);
    CHECK(std::abs(static_cast<double>(ok) / n - q) < 4 * std::sqrt(q * (1 - q) / n));
}

TEST_CASE("streams are keyed, not shared") {
    Engine a = make_stream(1, 5, StreamPurpose::fading, 2);
    Engine b = make_stream(1, 5, StreamPurpose::fading, 2);
    Engine c = make_stream(1, 5, StreamPurpose::fading, 3);
    Engine d = make_stream(2, 5, StreamPurpose::fading, 2);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}

TEST_CASE("empty field takes exactly one slot per hop") {
    const SystemParams P(0.0, 1.0, 0.1, PathLossModel::bounded(3.0), InterferenceMode::dependent);
    const auto est = estimate(uniform_chain(4, 0.25), P, config(500, 1));
    CHECK(est.mean == 4.0);
    CHECK(est.variance == 0.0);
    CHECK(est.censored_count == 0);
    CHECK(est.empirical_probability(4) == 1.0);
}

TEST_CASE("single link estimates agree with the references") {
    const auto chain = uniform_chain(1, 1.0);
    const auto dep = estimate(chain, half, config(40000, 11));
    CHECK(std::abs(dep.mean - oracle::bounded_half::mean_dependent) < 4 * dep.standard_error);
    CHECK(std::abs(dep.variance - oracle::bounded_half::var_dependent) < 4 * dep.variance_standard_error);
    const double p1 = oracle::bounded_half::pmf[0];
    CHECK(std::abs(dep.empirical_probability(1) - p1) < 4 * std::sqrt(p1 * (1 - p1) / 40000));

    const auto ind = estimate(chain, half.with_mode(InterferenceMode::independent), config(40000, 12));
    CHECK(std::abs(ind.mean - oracle::bounded_half::mean_independent) < 4 * ind.standard_error);
    CHECK(std::abs(ind.variance - oracle::bounded_half::var_independent) < 4 * ind.variance_standard_error);
}

TEST_CASE("results do not depend on the worker count") {
    const auto chain = uniform_chain(3, 1.0 / 3);
    McConfig c = config(3000, 99);
    c.keep_outcomes = true;
    const auto one = estimate(chain, half, c);
    c.workers = 3;
    const auto three = estimate(chain, half, c);
    CHECK(one.mean == three.mean);
    CHECK(one.variance == three.variance);
    CHECK(one.empirical_pmf == three.empirical_pmf);
    CHECK(one.per_link_mean == three.per_link_mean);
    REQUIRE(one.outcomes.size() == 3000);
    for (std::size_t i = 0; i < 3000; i += 97) CHECK(one.outcomes[i].total_slots == three.outcomes[i].total_slots);
    const auto single = simulate_packet(chain, half, c, 123);
    CHECK(single.total_slots == one.outcomes[123].total_slots);
    CHECK(single.per_link_slots == one.outcomes[123].per_link_slots);
}

TEST_CASE("censoring is counted separately") {
    const SystemParams P(3.0, 1.0, 1.0, PathLossModel::bounded(3.0), InterferenceMode::dependent);
    McConfig c = config(400, 5);
    c.slot_cap = 3;
    const auto est = estimate(uniform_chain(2, 1.0), P, c);
    CHECK(est.censored_count > 0);
    CHECK(est.uncensored() + est.censored_count == 400);
    for (const auto& [t, count] : est.empirical_pmf) CHECK(t <= 3);
}

TEST_CASE("trial table layout") {
    McConfig c = config(3, 1);
    c.keep_outcomes = true;
    const auto est = estimate(uniform_chain(2, 0.5), half, c);
    std::ostringstream out;
    write_trials_csv(out, est.outcomes);
    const std::string s = out.str();
    CHECK(s.rfind("trial_id,T_1,T_2,total,censored\n0,", 0) == 0);
}

TEST_CASE("configuration checks") {
    const auto chain = uniform_chain(3, 1.0);
    McConfig c;
    c.trials = 0;
    CHECK_THROWS_AS(c.validate(chain), ModelError);
    c = {};
    c.slot_cap = 2;
    CHECK_THROWS_AS(c.validate(chain), ModelError);
    c = {};
    c.sampling_radius = chain.radius() + 0.5;
    CHECK_THROWS_AS(simulation_radius(chain, half, c), ModelError);
    c.sampling_radius = 0.0;
    CHECK(simulation_radius(chain, half, c) >= chain.radius() + 2.0);
}

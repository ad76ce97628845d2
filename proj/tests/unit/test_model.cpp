#include <doctest.h>

#include <cmath>

#include "relaychain/errors.hpp"
#include "relaychain/model.hpp"

using namespace relaychain;

TEST_CASE("singular path loss is a pure power law") {
    const auto g = PathLossModel::singular(3.0);
    CHECK(g.at_distance(2.0) == doctest::Approx(0.125));
    CHECK(g.at_distance(0.5) == doctest::Approx(8.0));
    CHECK_THROWS_AS(g.at_distance(0.0), DomainError);
    CHECK(g.kink_radii().empty());
}

TEST_CASE("bounded path loss saturates inside the unit disk") {
    const auto g = PathLossModel::bounded(4.0);
    CHECK(g.at_distance(0.0) == 1.0);
    CHECK(g.at_distance(0.7) == 1.0);
    CHECK(g.at_distance(1.0) == 1.0);
    CHECK(g.at_distance(2.0) == doctest::Approx(1.0 / 16.0));
    REQUIRE(g.kink_radii().size() == 1);
    CHECK(g.kink_radii()[0] == 1.0);
    CHECK(g(Point{0, 0}, Point{3, 4}) == doctest::Approx(std::pow(5.0, -4.0)));
}

TEST_CASE("path loss exponent must exceed 2") {
    CHECK_THROWS_AS(PathLossModel::singular(2.0), ModelError);
    CHECK_THROWS_AS(PathLossModel::bounded(1.5), ModelError);
    CHECK_THROWS_AS(PathLossModel::bounded(NAN), ModelError);
}

TEST_CASE("uniform chain geometry") {
    const ChainTopology c = uniform_chain(4, 0.25);
    REQUIRE(c.size() == 4);
    CHECK(c.link(0).tx == Point{0, 0});
    CHECK(c.link(3).rx.x == doctest::Approx(1.0));
    for (const Link& l : c.links()) CHECK(l.length() == doctest::Approx(0.25));
    CHECK(c.centroid().x == doctest::Approx(0.5));
    CHECK(c.radius() == doctest::Approx(0.5));
    CHECK_THROWS_AS(uniform_chain(0, 1.0), ModelError);
    CHECK_THROWS_AS(uniform_chain(2, -1.0), ModelError);
}

TEST_CASE("chain validation") {
    CHECK_THROWS_AS(ChainTopology({}), ModelError);
    CHECK_THROWS_AS(ChainTopology({Link{{0, 0}, {0, 0}}}), ModelError);
}

TEST_CASE("system parameter ranges") {
    const auto g = PathLossModel::bounded(3.0);
    CHECK_NOTHROW(SystemParams(0.0, 0.0, 0.1, g, InterferenceMode::dependent));
    CHECK_THROWS_AS(SystemParams(-1.0, 0.5, 0.1, g, InterferenceMode::dependent), ModelError);
    CHECK_THROWS_AS(SystemParams(1.0, 1.5, 0.1, g, InterferenceMode::dependent), ModelError);
    CHECK_THROWS_AS(SystemParams(1.0, 0.5, 0.0, g, InterferenceMode::dependent), ModelError);
    const SystemParams s(1.0, 0.5, 0.1, g, InterferenceMode::dependent);
    CHECK(s.with_mode(InterferenceMode::independent).mode() == InterferenceMode::independent);
    CHECK(s.with_density(2.0).density() == 2.0);
    CHECK(s.with_aloha(0.25).aloha() == 0.25);
}

TEST_CASE("mode names round-trip") {
    for (auto m : {InterferenceMode::dependent, InterferenceMode::independent})
        CHECK(parse_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_mode("sometimes"), ModelError);
}

TEST_CASE("effective thresholds") {
    const auto bounded = SystemParams(1.0, 1.0, 0.1, PathLossModel::bounded(3.0), InterferenceMode::dependent);
    // Hops no longer than 1 see the plain threshold under the bounded law.
    for (double L : {0.1, 0.5, 1.0}) CHECK(link_thresholds(uniform_chain(3, L), bounded)[1] == 0.1);
    CHECK(link_thresholds(uniform_chain(1, 2.0), bounded)[0] == doctest::Approx(0.8));
    const auto singular = SystemParams(1.0, 1.0, 0.1, PathLossModel::singular(3.0), InterferenceMode::dependent);
    CHECK(link_thresholds(uniform_chain(1, 0.5), singular)[0] == doctest::Approx(0.0125));
}

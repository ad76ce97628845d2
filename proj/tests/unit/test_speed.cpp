#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "relaychain/errors.hpp"
#include "relaychain/moments.hpp"
#include "relaychain/speed.hpp"

using namespace relaychain;

namespace {

SystemParams params(double lambda, double p, double theta,
                    InterferenceMode mode = InterferenceMode::dependent) {
    return SystemParams(lambda, p, theta, PathLossModel::bounded(3.0), mode);
}

}  // namespace

TEST_CASE("empty field: speed equals the hop length") {
    for (double L : {0.5, 1.0, 3.0}) {
        const auto r = asymptotic_speed(L, params(0.0, 1.0, 0.1));
        CHECK(r.asymptotic_speed == L);
        CHECK(r.mean_inverse_speed == 1.0 / L);
        REQUIRE(r.truncation);
        CHECK(r.truncation->K == 1);
        CHECK(r.truncation->C == 0.0);
    }
}

TEST_CASE("divergent regime reports zero speed") {
    const SystemParams P(1.0, 1.0, 0.1, PathLossModel::singular(3.0), InterferenceMode::dependent);
    const auto r = asymptotic_speed(1.0, P);
    CHECK(r.divergent);
    CHECK(r.asymptotic_speed == 0.0);
    CHECK(std::isinf(r.mean_inverse_speed));
    CHECK(std::isinf(r.chebyshev_bound(10, 0.1)));
    const auto ri = asymptotic_speed(1.0, P.with_mode(InterferenceMode::independent));
    CHECK_FALSE(ri.divergent);
    CHECK(ri.asymptotic_speed > 0.0);
}

TEST_CASE("speed invariants") {
    for (double L : {1.0, 2.5})
        for (auto mode : {InterferenceMode::dependent, InterferenceMode::independent}) {
            const auto r = asymptotic_speed(L, params(0.5, 0.5, 0.2, mode));
            CHECK(r.asymptotic_speed * r.mean_inverse_speed == doctest::Approx(1.0).epsilon(1e-15));
            CHECK(r.asymptotic_speed > 0.0);
            CHECK(r.asymptotic_speed <= L);
            CHECK(r.mean_link == doctest::Approx(mean_link(uniform_chain(1, L), 0, r.params).value()));
        }
    const auto r = asymptotic_speed(1.0, params(0.5, 0.5, 0.1));
    CHECK(r.asymptotic_speed == doctest::Approx(1.0 / oracle::bounded_half::mean_dependent).epsilon(1e-10));
}

TEST_CASE("speed ordering on the long-hop grid") {
    for (double p : {0.25, 0.5, 0.75}) {
        for (double L = 1.0; L <= 5.0; L += 1.0) {
            const auto d = asymptotic_speed(L, params(0.25, p, 0.2), {}, {.with_truncation = false});
            const auto i = asymptotic_speed(L, params(0.25, p, 0.2, InterferenceMode::independent));
            CHECK(d.asymptotic_speed <= i.asymptotic_speed);
        }
    }
}

TEST_CASE("speed does not increase with p") {
    for (auto mode : {InterferenceMode::dependent, InterferenceMode::independent})
        for (double L : {1.0, 2.0, 4.0}) {
            double last = INFINITY;
            for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
                const double s =
                    asymptotic_speed(L, params(0.25, p, 0.2, mode), {}, {.with_truncation = false}).asymptotic_speed;
                CHECK(s <= last);
                last = s;
            }
        }
}

TEST_CASE("truncation lag") {
    const auto P = params(1.0, 1.0, 0.1);
    const auto t = truncation_lag(1.0, P, 1e-3);
    const auto cov = [&](int k) {
        const double s = k;
        return covariance_curve(1.0, std::span<const double>(&s, 1), P).front().second;
    };
    CHECK(t.K >= 1);
    CHECK(t.C == doctest::Approx(cov(1)));
    CHECK(cov(t.K) < 1e-3);
    if (t.K > 1) CHECK(cov(t.K - 1) >= 1e-3);
    // A threshold above the lag-1 covariance stops at once.
    CHECK(truncation_lag(1.0, P, 2 * t.C).K == 1);
    CHECK_THROWS_AS(truncation_lag(1.0, P, 1e-30, {}, 3), ConvergenceError);
    CHECK_THROWS_AS(truncation_lag(1.0, P, 0.0), ModelError);
}

TEST_CASE("variance bound arithmetic") {
    const CovarianceTruncation zero{3, 0.0, 1e-3};
    CHECK(variance_upper_bound(7, 2.5, zero) == 7 * 2.5);
    const CovarianceTruncation t{3, 0.2, 1e-3};
    CHECK(variance_upper_bound(1, 2.5, t) == 2.5);
    CHECK(variance_upper_bound(2, 1.0, t) == doctest::Approx(2 + 2 * 2 * 1 * 0.2));
    CHECK(variance_upper_bound(10, 1.0, t) == doctest::Approx(10 + 2 * 10 * 3 * 0.2));
    CHECK_THROWS_AS(variance_upper_bound(0, 1.0, t), ModelError);
}

TEST_CASE("variance bound dominates the exact variance") {
    const auto P = params(2.0, 1.0, 0.1);
    const auto r = asymptotic_speed(1.0, P);
    REQUIRE(r.truncation);
    for (int N : {2, 5, 10}) {
        const auto exact = chain_moments(uniform_chain(N, 1.0), P).get();
        CHECK(r.variance_bound(N) + exact.total_var_error + 2.0 * N * (N - 1) * 1e-3 >= exact.total_var);
    }
}

TEST_CASE("chebyshev bound decays like 1 / N") {
    const auto r = asymptotic_speed(1.0, params(1.0, 1.0, 0.1));
    const double eps = 0.05;
    CHECK(r.chebyshev_bound(40, eps) / r.chebyshev_bound(20, eps) < 0.75);
    CHECK(r.chebyshev_bound(20, eps) == doctest::Approx(r.variance_bound(20) / (400.0 * eps * eps)));
    const auto ri = asymptotic_speed(2.0, params(1.0, 1.0, 0.1, InterferenceMode::independent));
    CHECK(ri.variance_bound(8) == doctest::Approx(8 * ri.var_link));
    CHECK_THROWS_AS(ri.chebyshev_bound(0, 0.1), ModelError);
}

TEST_CASE("csv rows") {
    const std::vector<SpeedReport> reports = {asymptotic_speed(1.0, params(0.0, 0.5, 0.2)),
                                              asymptotic_speed(2.0, params(0.0, 0.5, 0.2, InterferenceMode::independent))};
    std::ostringstream out;
    write_speed_csv(out, reports);
    CHECK(out.str() == "L,p,lambda,theta,alpha,mode,speed\n"
                       "1,0.5,0,0.2,3,dependent,1\n"
                       "2,0.5,0,0.2,3,independent,2\n");
}

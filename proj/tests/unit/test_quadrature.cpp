#include <doctest.h>

#include <cmath>
#include <numbers>

#include "relaychain/errors.hpp"
#include "relaychain/quadrature.hpp"

using namespace relaychain;
using std::numbers::pi;

namespace {
const TailEnvelope no_tail = [](double) { return 0.0; };
}

TEST_CASE("radial gaussian") {
    // exp(-r^2) over the plane is pi; the tail beyond R is pi exp(-R^2).
    const auto r = integrate_radial([](double x) { return std::exp(-x * x); },
                                    [](double R) { return pi * std::exp(-R * R); });
    CHECK(r.value == doctest::Approx(pi).epsilon(1e-12));
    CHECK(r.total_error() < 1e-9);
    CHECK(r.tail_bound <= 1e-12);
}

TEST_CASE("radial power tail certifies the truncation") {
    // (1 + r^2)^-2 integrates to pi; the integrand is below r^-4.
    const auto tail = [](double R) { return power_tail(1.0, 4.0, 0.0, R); };
    const auto r = integrate_radial([](double x) { return 1.0 / ((1 + x * x) * (1 + x * x)); }, tail);
    CHECK(std::abs(r.value - pi) <= r.total_error() + 1e-12);
    CHECK(std::abs(r.value - pi) < 1e-9);
    CHECK(r.truncation_radius > 0.0);
}

TEST_CASE("kinked radial integrand") {
    // min(1, r^-3) over the plane: pi + 2 pi.
    IntegrationSpec spec;
    spec.kink_radii = {1.0};
    const auto r = integrate_radial([](double x) { return std::min(1.0, std::pow(x, -3.0)); },
                                    [](double R) { return power_tail(1.0, 3.0, 0.0, R); }, spec);
    CHECK(r.value == doctest::Approx(3 * pi).epsilon(1e-8));
}

TEST_CASE("fixed truncation radius") {
    IntegrationSpec spec;
    spec.truncation = Truncation::fixed_radius(2.0);
    const auto r = integrate_radial([](double) { return 1.0; }, no_tail, spec);
    CHECK(r.value == doctest::Approx(4 * pi).epsilon(1e-12));
    CHECK(r.truncation_radius == 2.0);
}

TEST_CASE("power_tail closed form") {
    // d = 0: K 2 pi R^(2 - beta) / (beta - 2).
    CHECK(power_tail(2.0, 4.0, 0.0, 10.0) == doctest::Approx(2.0 * 2 * pi * 1e-2 / 2.0));
    // Against a numerical integral with an offset.
    const double K = 0.3, beta = 5.0, d = 1.5, R = 6.0;
    double sum = 0.0;
    const int n = 400000;
    const double top = 2000.0, h = (top - R) / n;
    for (int i = 0; i < n; ++i) {
        const double r = R + (i + 0.5) * h;
        sum += K * std::pow(r - d, -beta) * 2 * pi * r * h;
    }
    CHECK(power_tail(K, beta, d, R) == doctest::Approx(sum).epsilon(1e-6));
    CHECK(std::isinf(power_tail(1.0, 4.0, 2.0, 2.5)));
    CHECK(std::isinf(power_tail(1.0, 2.0, 0.0, 5.0)));
}

TEST_CASE("plane gaussian off the origin") {
    IntegrationSpec spec;
    spec.centers = {{3.0, -1.0}};
    const Point c = spec.centers[0];
    const auto r = integrate_plane([c](Point x) { return std::exp(-std::pow(distance(x, c), 2)); },
                                   [](double R) { return pi * std::exp(-R * R); }, spec);
    CHECK(r.value == doctest::Approx(pi).epsilon(1e-9));
}

TEST_CASE("plane integrand with two centers") {
    // Product of two unit gaussians at distance s: (pi / 2) exp(-s^2 / 2).
    IntegrationSpec spec;
    spec.centers = {{-1.0, 0.0}, {1.0, 0.0}};
    const auto f = [](Point x) {
        return std::exp(-std::pow(distance(x, {-1, 0}), 2) - std::pow(distance(x, {1, 0}), 2));
    };
    const auto r = integrate_plane(f, [](double R) { return pi * std::exp(-R * R); }, spec);
    CHECK(r.value == doctest::Approx(pi / 2 * std::exp(-2.0)).epsilon(1e-9));
}

TEST_CASE("extended precision variants agree") {
    const auto r = integrate_radial_extended([](long double x) { return std::exp(-x * x); },
                                             [](double R) { return pi * std::exp(-R * R); });
    CHECK(std::abs(r.value - std::numbers::pi_v<long double>) < 1e-15L);
    IntegrationSpec spec;
    spec.centers = {{0.5, 0.5}};
    const auto p = integrate_plane_extended(
        [](long double x, long double y) {
            return std::exp(-((x - 0.5L) * (x - 0.5L) + (y - 0.5L) * (y - 0.5L)));
        },
        [](double R) { return pi * std::exp(-R * R); }, spec);
    CHECK(std::abs(p.value - std::numbers::pi_v<long double>) < 1e-12L);
}

TEST_CASE("budget exhaustion raises with the best estimate") {
    IntegrationSpec spec;
    spec.rel_tol = 1e-15;
    spec.abs_tol = 1e-300;
    spec.max_evaluations = 50;
    try {
        integrate_radial([](double x) { return std::sin(40 * x) * std::exp(-x); },
                         [](double R) { return 2 * pi * (R + 1) * std::exp(-R); }, spec);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(std::isfinite(e.best_estimate()));
        CHECK(e.error_estimate() > 0.0);
    }
}

TEST_CASE("integration options are validated") {
    IntegrationSpec spec;
    spec.rel_tol = 0.0;
    CHECK_THROWS_AS(spec.validate(), ModelError);
    spec = {};
    spec.truncation = Truncation::fixed_radius(-1.0);
    CHECK_THROWS_AS(spec.validate(), ModelError);
}

TEST_CASE("automatic radius meets the tail tolerance") {
    const TailEnvelope tail = [](double R) { return power_tail(1.0, 3.0, 0.0, R); };
    const double R = auto_truncation_radius(tail, 1.0, 1e-8);
    CHECK(tail(R) < 1e-8);
}

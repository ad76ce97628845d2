#include "relaychain/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "adaptive_gk.hpp"
#include "relaychain/errors.hpp"

namespace relaychain {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr int max_doublings = 1100;

struct Domain {
    double radius;
    double tail;
};

Domain choose_domain(const TailEnvelope& tail, double extent, const IntegrationSpec& spec) {
    if (spec.truncation.fixed) {
        const double r = spec.truncation.radius;
        return {r, tail ? tail(r) : std::numeric_limits<double>::infinity()};
    }
    if (!tail) throw ModelError("automatic truncation needs a tail envelope");
    const double r = auto_truncation_radius(tail, extent, spec.abs_tol);
    return {r, tail(r)};
}

template <class Real>
std::vector<Real> radial_breakpoints(Real lo, Real radius, const std::vector<double>& extra) {
    std::vector<Real> pts{lo, radius};
    for (double k : extra)
        if (k > lo && k < radius) pts.push_back(static_cast<Real>(k));
    // Dyadic panels keep the far field from being sampled by one huge interval.
    for (Real s = 1; s < radius; s *= 2)
        if (s > lo) pts.push_back(s);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

void ensure_converged(bool converged, const char* what, double value, double error) {
    if (!converged)
        throw ConvergenceError(std::string(what) + ": evaluation budget exhausted before reaching tolerance",
                               value, error);
}

}  // namespace

void IntegrationSpec::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ModelError("integration tolerances must be positive");
    if (truncation.fixed && !(truncation.radius > 0.0 && std::isfinite(truncation.radius)))
        throw ModelError("fixed truncation radius must be positive and finite");
    for (double k : kink_radii)
        if (!(k > 0.0) || !std::isfinite(k)) throw ModelError("kink radii must be positive");
    for (Point c : centers)
        if (!std::isfinite(c.x) || !std::isfinite(c.y)) throw ModelError("centers must be finite");
    if (max_evaluations < 21) throw ModelError("evaluation budget too small");
}

double power_tail(double K, double beta, double d, double R) {
    if (K == 0.0) return 0.0;
    const double u = R - d;
    if (!(u >= 1.0) || !(beta > 2.0)) return std::numeric_limits<double>::infinity();
    return two_pi * K * (std::pow(u, 2.0 - beta) / (beta - 2.0) + d * std::pow(u, 1.0 - beta) / (beta - 1.0));
}

double auto_truncation_radius(const TailEnvelope& tail, double extent, double abs_tol) {
    double r = 2.0 * (extent + 1.0);
    for (int i = 0; i < max_doublings; ++i, r *= 2.0)
        if (tail(r) < abs_tol / 2.0) return r;
    throw ConvergenceError("tail envelope never fell below half the absolute tolerance",
                           std::numeric_limits<double>::quiet_NaN(),
                           std::numeric_limits<double>::infinity());
}

IntegralResult integrate_radial(const RadialFunction& f, const TailEnvelope& tail,
                                const IntegrationSpec& spec) {
    spec.validate();
    const Domain dom = choose_domain(tail, 0.0, spec);
    const auto pts = radial_breakpoints<double>(0.0, dom.radius, spec.kink_radii);

    detail::AdaptiveOptions opt;
    opt.abs_tol = spec.abs_tol / 2.0;
    opt.rel_tol = spec.rel_tol;
    opt.max_evaluations = spec.max_evaluations;
    auto g = [&](double r) { return r == 0.0 ? 0.0 : f(r) * two_pi * r; };
    const auto out = detail::integrate_adaptive<double>(g, std::span<const double>(pts), opt);
    ensure_converged(out.converged, "integrate_radial", out.value, out.error + dom.tail);
    return {out.value, out.error, dom.tail, dom.radius, out.evaluations};
}

ExtendedIntegralResult integrate_radial_extended(const ExtendedRadialFunction& f,
                                                 const TailEnvelope& tail,
                                                 const IntegrationSpec& spec) {
    spec.validate();
    const Domain dom = choose_domain(tail, 0.0, spec);
    const auto pts = radial_breakpoints<long double>(0.0L, dom.radius, spec.kink_radii);

    detail::AdaptiveOptions opt;
    opt.abs_tol = spec.abs_tol / 2.0;
    opt.rel_tol = spec.rel_tol;
    opt.max_evaluations = spec.max_evaluations;
    constexpr long double two_pi_l = 2.0L * std::numbers::pi_v<long double>;
    auto g = [&](long double r) { return r == 0.0L ? 0.0L : f(r) * two_pi_l * r; };
    const auto out = detail::integrate_adaptive<long double>(g, std::span<const long double>(pts), opt);
    ensure_converged(out.converged, "integrate_radial_extended", static_cast<double>(out.value),
                     static_cast<double>(out.error) + dom.tail);
    return {out.value, out.error, dom.tail, dom.radius, out.evaluations};
}

namespace {

template <class Real>
struct PlaneOutcome {
    Real value;
    Real error;
    Domain domain;
    std::size_t evaluations;
};

template <class Real, class F>
PlaneOutcome<Real> plane_impl(const F& f, const TailEnvelope& tail, const IntegrationSpec& spec) {
    spec.validate();

    Point origin{0.0, 0.0};
    if (!spec.centers.empty()) {
        for (Point c : spec.centers) origin = origin + c;
        origin = (1.0 / static_cast<double>(spec.centers.size())) * origin;
    }
    struct Center {
        Real dist;
        Real angle;
    };
    std::vector<Center> centers;
    double extent = 0.0;
    for (Point c : spec.centers) {
        const Real vx = Real(c.x) - Real(origin.x);
        const Real vy = Real(c.y) - Real(origin.y);
        const Real d = std::hypot(vx, vy);
        centers.push_back({d, d > 0 ? std::atan2(vy, vx) : Real(0)});
        extent = std::max(extent, static_cast<double>(d));
    }

    const Domain dom = choose_domain(tail, extent, spec);

    // Radii where some center's kink circle or the center itself is crossed.
    std::vector<double> radial_kinks;
    for (const Center& c : centers) {
        const double d = static_cast<double>(c.dist);
        if (d > 0.0) radial_kinks.push_back(d);
        for (double k : spec.kink_radii) {
            radial_kinks.push_back(d + k);
            if (std::abs(d - k) > 0.0) radial_kinks.push_back(std::abs(d - k));
        }
    }
    const auto outer_pts = radial_breakpoints<Real>(Real(0), Real(dom.radius), radial_kinks);

    constexpr Real two_pi_r = 2 * std::numbers::pi_v<Real>;
    const double inner_rel =
        std::max(spec.rel_tol * 1e-2, 100.0 * static_cast<double>(std::numeric_limits<Real>::epsilon()));
    detail::AdaptiveOptions inner_opt;
    inner_opt.abs_tol = std::numeric_limits<double>::min();
    inner_opt.rel_tol = inner_rel;
    inner_opt.l1_rel_tol = inner_rel;
    inner_opt.max_evaluations = 200'000;

    const Real ox = origin.x, oy = origin.y;
    std::size_t evaluations = 0;
    std::vector<Real> angles;
    auto ring = [&](Real r) -> Real {
        if (r == 0) return 0;
        angles.assign({Real(0), two_pi_r});
        auto add = [&](Real a) {
            a = std::fmod(a, two_pi_r);
            if (a < 0) a += two_pi_r;
            angles.push_back(a);
        };
        for (const Center& c : centers) {
            if (c.dist == 0) continue;
            add(c.angle);
            for (double k : spec.kink_radii) {
                const Real cosd = (r * r + c.dist * c.dist - Real(k) * Real(k)) / (2 * r * c.dist);
                if (std::abs(cosd) < 1) {
                    const Real delta = std::acos(cosd);
                    add(c.angle + delta);
                    add(c.angle - delta);
                }
            }
        }
        std::sort(angles.begin(), angles.end());
        angles.erase(std::unique(angles.begin(), angles.end()), angles.end());
        auto h = [&](Real a) { return f(ox + r * std::cos(a), oy + r * std::sin(a)); };
        const auto in = detail::integrate_adaptive<Real>(h, std::span<const Real>(angles), inner_opt);
        evaluations += in.evaluations;
        return in.value * r;
    };

    detail::AdaptiveOptions outer_opt;
    outer_opt.abs_tol = spec.abs_tol / 2.0;
    outer_opt.rel_tol = spec.rel_tol;
    // Outer nodes are capped separately; total work is checked below.
    outer_opt.max_evaluations = std::max<std::size_t>(21, spec.max_evaluations / 100);
    const auto out = detail::integrate_adaptive<Real>(ring, std::span<const Real>(outer_pts), outer_opt);

    const Real error = out.error + Real(inner_rel) * out.l1;
    const bool within_budget = evaluations <= spec.max_evaluations;
    ensure_converged(out.converged && within_budget, "integrate_plane", static_cast<double>(out.value),
                     static_cast<double>(error) + dom.tail);
    return {out.value, error, dom, evaluations};
}

}  // namespace

IntegralResult integrate_plane(const PlaneFunction& f, const TailEnvelope& tail,
                               const IntegrationSpec& spec) {
    auto g = [&](double x, double y) { return f(Point{x, y}); };
    const auto out = plane_impl<double>(g, tail, spec);
    return {out.value, out.error, out.domain.tail, out.domain.radius, out.evaluations};
}

ExtendedIntegralResult integrate_plane_extended(const ExtendedPlaneFunction& f, const TailEnvelope& tail,
                                                const IntegrationSpec& spec) {
    const auto out = plane_impl<long double>(f, tail, spec);
    return {out.value, out.error, out.domain.tail, out.domain.radius, out.evaluations};
}

}  // namespace relaychain

#pragma once

// Globally adaptive 21-point Gauss-Kronrod integration on a set of initial
// panels. Private to the library; the public surface is quadrature.hpp.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace relaychain::detail {

template <class Real>
struct GkEstimate {
    Real value = 0;
    Real error = 0;
    Real l1 = 0;     // integral of |f|
    Real floor = 0;  // roundoff floor of `error`
};

template <class Real, class F>
GkEstimate<Real> gk21(F& f, Real a, Real b) {
    using kronrod = boost::math::quadrature::gauss_kronrod<Real, 21>;
    using gauss = boost::math::quadrature::gauss<Real, 10>;
    const auto& x = kronrod::abscissa();
    const auto& wk = kronrod::weights();
    const auto& wg = gauss::weights();

    const Real center = (a + b) / 2;
    const Real half = (b - a) / 2;

    Real fv[21];
    fv[0] = f(center);
    for (std::size_t i = 1; i < x.size(); ++i) {
        fv[2 * i - 1] = f(center - half * x[i]);
        fv[2 * i] = f(center + half * x[i]);
    }

    Real resk = wk[0] * fv[0];
    Real resg = 0;
    Real resabs = wk[0] * std::abs(fv[0]);
    for (std::size_t i = 1; i < x.size(); ++i) {
        const Real pair = fv[2 * i - 1] + fv[2 * i];
        resk += wk[i] * pair;
        resabs += wk[i] * (std::abs(fv[2 * i - 1]) + std::abs(fv[2 * i]));
        // Gauss-10 nodes sit at the odd Kronrod positions.
        if (i % 2 == 1) resg += wg[i / 2] * pair;
    }
    const Real mean = resk / 2;
    Real resasc = wk[0] * std::abs(fv[0] - mean);
    for (std::size_t i = 1; i < x.size(); ++i)
        resasc += wk[i] * (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean));

    const Real h = std::abs(half);
    GkEstimate<Real> out;
    out.value = resk * half;
    out.l1 = resabs * h;
    resasc *= h;
    Real err = std::abs((resk - resg) * half);
    if (resasc != 0 && err != 0) err = resasc * std::min<Real>(1, std::pow(200 * err / resasc, Real(1.5)));
    out.floor = 50 * std::numeric_limits<Real>::epsilon() * out.l1;
    out.error = std::max(err, out.floor);
    return out;
}

template <class Real>
struct AdaptiveOutcome {
    Real value = 0;
    Real error = 0;
    Real l1 = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

struct AdaptiveOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-8;
    /// Additional relative tolerance measured against the L1 norm; useful for
    /// sign-changing integrands whose net value can be near zero.
    double l1_rel_tol = 0.0;
    std::size_t max_evaluations = 2'000'000;
};

/// Integrate f over [points.front(), points.back()] starting from the panels
/// delimited by `points` (sorted, duplicates removed by the caller).
template <class Real, class F>
AdaptiveOutcome<Real> integrate_adaptive(F&& f, std::span<const Real> points,
                                         const AdaptiveOptions& opt) {
    struct Interval {
        Real a, b;
        GkEstimate<Real> est;
    };
    auto by_error = [](const Interval& l, const Interval& r) { return l.est.error < r.est.error; };

    AdaptiveOutcome<Real> out;
    std::vector<Interval> heap;
    std::vector<Interval> frozen;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (!(points[i + 1] > points[i])) continue;
        heap.push_back({points[i], points[i + 1], gk21<Real>(f, points[i], points[i + 1])});
        out.evaluations += 21;
    }
    std::make_heap(heap.begin(), heap.end(), by_error);

    auto totals = [&](Real& value, Real& error, Real& l1) {
        // Sum in a fixed order (sorted by position) so the result does not
        // depend on heap layout.
        std::vector<const Interval*> all;
        all.reserve(heap.size() + frozen.size());
        for (const auto& i : heap) all.push_back(&i);
        for (const auto& i : frozen) all.push_back(&i);
        std::sort(all.begin(), all.end(), [](const Interval* l, const Interval* r) { return l->a < r->a; });
        Real s = 0, c = 0;
        error = 0;
        l1 = 0;
        for (const Interval* i : all) {
            const Real v = i->est.value;
            const Real t = s + v;
            c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
            s = t;
            error += i->est.error;
            l1 += i->est.l1;
        }
        value = s + c;
    };

    Real value = 0, error = 0, l1 = 0;
    totals(value, error, l1);
    // Running sums drift; they only steer the loop and are refreshed on exit.
    Real run_value = value, run_error = error, run_l1 = l1;
    const Real eps = std::numeric_limits<Real>::epsilon();

    auto target = [&](Real v, Real l) {
        return std::max({Real(opt.abs_tol), Real(opt.rel_tol) * std::abs(v), Real(opt.l1_rel_tol) * l});
    };

    while (!heap.empty()) {
        if (run_error <= target(run_value, run_l1)) {
            totals(run_value, run_error, run_l1);
            if (run_error <= target(run_value, run_l1)) break;
        }
        if (out.evaluations + 42 > opt.max_evaluations) break;

        std::pop_heap(heap.begin(), heap.end(), by_error);
        Interval worst = heap.back();
        heap.pop_back();

        const Real mid = (worst.a + worst.b) / 2;
        const bool too_narrow =
            (worst.b - worst.a) <= 1000 * eps * std::max(std::abs(worst.a), std::abs(worst.b));
        if (worst.est.error <= worst.est.floor || too_narrow || !(mid > worst.a && mid < worst.b)) {
            frozen.push_back(worst);
            continue;
        }
        Interval left{worst.a, mid, gk21<Real>(f, worst.a, mid)};
        Interval right{mid, worst.b, gk21<Real>(f, mid, worst.b)};
        out.evaluations += 42;
        run_value += left.est.value + right.est.value - worst.est.value;
        run_error += left.est.error + right.est.error - worst.est.error;
        run_l1 += left.est.l1 + right.est.l1 - worst.est.l1;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), by_error);
    }

    totals(value, error, l1);
    out.value = value;
    out.error = error;
    out.l1 = l1;
    // Intervals frozen at their roundoff floor count as converged: no further
    // subdivision can improve them.
    out.converged = error <= target(value, l1) || heap.empty();
    return out;
}

}  // namespace relaychain::detail

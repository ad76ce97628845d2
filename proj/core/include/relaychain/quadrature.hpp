#pragma once

// Adaptive integration over the plane with a certified bound on the mass
// discarded outside the truncation disk.

#include <cstddef>
#include <functional>
#include <vector>

#include "relaychain/model.hpp"

namespace relaychain {

/// How the infinite domain is cut to a disk.
struct Truncation {
    bool fixed = false;
    double radius = 0.0;  ///< used only when `fixed`

    static Truncation automatic() { return {}; }
    static Truncation fixed_radius(double r) { return {true, r}; }
};

struct IntegrationSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    Truncation truncation = Truncation::automatic();
    /// Points the integrand decays away from. Only integrate_plane uses them.
    std::vector<Point> centers;
    /// Radii (about every center) where the integrand has a derivative
    /// discontinuity, e.g. the unit circle of the bounded path loss.
    std::vector<double> kink_radii;
    std::size_t max_evaluations = 20'000'000;

    /// Throws ModelError on non-positive tolerances or radius.
    void validate() const;
};

struct IntegralResult {
    double value = 0.0;
    double error_estimate = 0.0;  ///< quadrature error on the truncated disk
    double tail_bound = 0.0;      ///< bound on the omitted mass outside it
    double truncation_radius = 0.0;
    std::size_t evaluations = 0;

    double total_error() const { return error_estimate + tail_bound; }
};

struct ExtendedIntegralResult {
    long double value = 0.0L;
    long double error_estimate = 0.0L;
    double tail_bound = 0.0;
    double truncation_radius = 0.0;
    std::size_t evaluations = 0;
};

using RadialFunction = std::function<double(double)>;
using ExtendedRadialFunction = std::function<long double(long double)>;
using PlaneFunction = std::function<double(Point)>;
using ExtendedPlaneFunction = std::function<long double(long double x, long double y)>;
/// Upper bound on the integrand's absolute mass outside a disk of radius R.
/// Must be non-increasing in R; may return +inf where no bound is available.
using TailEnvelope = std::function<double(double)>;

/// Integral over the plane of a radially symmetric f: int_0^inf f(r) 2 pi r dr.
/// Throws ConvergenceError (carrying the best estimate) when the budget runs out.
IntegralResult integrate_radial(const RadialFunction& f, const TailEnvelope& tail,
                                const IntegrationSpec& spec = {});

/// integrate_radial carried out in long double, for sums that cancel heavily.
ExtendedIntegralResult integrate_radial_extended(const ExtendedRadialFunction& f,
                                                 const TailEnvelope& tail,
                                                 const IntegrationSpec& spec = {});

/// Integral of f over the plane, using polar coordinates about the centroid
/// of spec.centers. The tail envelope is measured from that centroid.
IntegralResult integrate_plane(const PlaneFunction& f, const TailEnvelope& tail,
                               const IntegrationSpec& spec = {});

/// integrate_plane carried out in long double.
ExtendedIntegralResult integrate_plane_extended(const ExtendedPlaneFunction& f, const TailEnvelope& tail,
                                                const IntegrationSpec& spec = {});

/// Closed form of int_R^inf K (r - d)^(-beta) 2 pi r dr for beta > 2 and
/// R - d >= 1; +inf otherwise. Bounds integrands decaying like K |x - c|^-beta
/// when every center c lies within d of the origin of the disk.
double power_tail(double K, double beta, double d, double R);

/// Radius the automatic policy would pick for `tail` and `spec`.
double auto_truncation_radius(const TailEnvelope& tail, double extent, double abs_tol);

}  // namespace relaychain

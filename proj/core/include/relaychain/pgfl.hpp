#pragma once

// Per-link success factor and the PGFL exponent integrals built from it.
//
// Each interferer at x multiplies the conditional success probability of
// link n by phi_n(x) = p / (1 + theta_n g(x, rx_n)) + 1 - p, so the moments
// of the success probability reduce to integrals of 1 - phi_n^k over the
// plane.

#include <cstddef>
#include <span>
#include <vector>

#include "relaychain/model.hpp"
#include "relaychain/quadrature.hpp"

namespace relaychain {

class LinkFactor {
public:
    LinkFactor(Point receiver, double link_threshold, double aloha, PathLossModel path_loss);

    Point receiver() const noexcept { return rx_; }
    double threshold() const noexcept { return theta_; }
    double aloha() const noexcept { return p_; }
    const PathLossModel& path_loss() const noexcept { return model_; }

    double operator()(Point x) const { return 1.0 - deficit(distance(x, rx_)); }
    double at_distance(double r) const { return 1.0 - deficit(r); }

    /// 1 - phi at distance r from the receiver, free of cancellation.
    double deficit(double r) const noexcept;
    long double deficit(long double r) const noexcept;

    /// 1 - phi^k at distance r; negative for k < 0.
    double one_minus_power(double r, double k) const noexcept;
    long double one_minus_power(long double r, long double k) const noexcept;

    /// Infimum of phi over the plane: 1 - p + p / (1 + theta_n g_max), which is
    /// 1 - p under the singular law.
    double min_value() const noexcept;

    /// True when 1 - phi^k is not integrable (k < 0, singular law, p = 1).
    bool diverges(double k) const noexcept;

private:
    Point rx_;
    double theta_;
    double p_;
    PathLossModel model_;
};

LinkFactor link_factor(const ChainTopology& topology, const SystemParams& params, std::size_t n);

/// int (1 - phi^k) dx. For k < 0 the value is negative. Returns -inf when the
/// integral diverges.
IntegralResult power_integral(const LinkFactor& f, double k, const IntegrationSpec& spec = {});
ExtendedIntegralResult power_integral_extended(const LinkFactor& f, long double k,
                                               const IntegrationSpec& spec = {});

/// int (1 - 1/phi)^2 dx, the curvature term linking the k = -1 and k = -2
/// integrals: I(-2) = 2 I(-1) - Q.
IntegralResult squared_deficit_integral(const LinkFactor& f, const IntegrationSpec& spec = {});

/// int (1 - 1/phi_m)(1 - 1/phi_n) dx, non-negative. The log of E[T_m T_n] in
/// the dependent mode exceeds log E[T_m] + log E[T_n] by lambda times this.
IntegralResult coupling_integral(const LinkFactor& m, const LinkFactor& n,
                                 const IntegrationSpec& spec = {});

/// int [1 - prod phi_n^{e_n} - sum_n (1 - phi_n^{e_n})] dx, the part of a
/// joint exponent integral that is not a sum of radial integrals. Zero for a
/// single factor; non-positive in general.
ExtendedIntegralResult joint_residual_integral(std::span<const LinkFactor> factors,
                                               std::span<const int> exponents,
                                               const IntegrationSpec& spec = {});

}  // namespace relaychain

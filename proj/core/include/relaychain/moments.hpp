#pragma once

// First and second moments of per-link and end-to-end travel time.
//
// All moments are exponentials of PGFL integrals and are carried in log form:
// a `LogMoment` stores log E[...] with an absolute error bound on that log.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "relaychain/model.hpp"
#include "relaychain/quadrature.hpp"

namespace relaychain {

struct LogMoment {
    double log_value = 0.0;  ///< +inf when the moment diverges
    double log_error = 0.0;  ///< bound on |log_value - true log|

    bool finite() const { return std::isfinite(log_value); }
    double value() const { return std::exp(log_value); }
};

enum class Divergence { finite, infinite_dependent_mean };

/// Dependent-mode means diverge exactly under the singular law with p = 1:
/// an interferer arbitrarily close to the receiver blocks it in every slot.
Divergence check_divergence(const SystemParams& params);
Divergence check_divergence(const SystemParams& params, std::size_t link);

/// Single-slot success probability of link n, averaged over the field. Same in
/// both modes.
LogMoment success_probability(const ChainTopology& topology, std::size_t n, const SystemParams& params,
                              const IntegrationSpec& spec = {});

LogMoment mean_link_dependent(const ChainTopology& topology, std::size_t n, const SystemParams& params,
                              const IntegrationSpec& spec = {});
LogMoment mean_link_independent(const ChainTopology& topology, std::size_t n, const SystemParams& params,
                                const IntegrationSpec& spec = {});
/// Mean of link n in params.mode().
LogMoment mean_link(const ChainTopology& topology, std::size_t n, const SystemParams& params,
                    const IntegrationSpec& spec = {});

/// E[T_n^2] in params.mode().
LogMoment second_moment_link(const ChainTopology& topology, std::size_t n, const SystemParams& params,
                             const IntegrationSpec& spec = {});

/// Var[T_n] in params.mode(), evaluated without subtracting two large numbers.
double variance_link(const ChainTopology& topology, std::size_t n, const SystemParams& params,
                     const IntegrationSpec& spec = {});

/// E[T_m T_n] for m != n in params.mode().
LogMoment cross_moment(const ChainTopology& topology, std::size_t m, std::size_t n,
                       const SystemParams& params, const IntegrationSpec& spec = {});

/// Cov[T_m, T_n] for m != n; zero in the independent mode.
double covariance(const ChainTopology& topology, std::size_t m, std::size_t n, const SystemParams& params,
                  const IntegrationSpec& spec = {});

struct MomentValues {
    std::vector<double> per_link_mean;
    std::vector<double> per_link_second;
    std::vector<double> per_link_variance;
    /// E[T_m T_n]; the diagonal holds E[T_n^2].
    std::vector<std::vector<double>> cross;
    /// Cov[T_m, T_n]; the diagonal holds Var[T_n].
    std::vector<std::vector<double>> covariance;
    double total_mean = 0.0;
    double total_var = 0.0;
    /// Error bounds propagated from the quadrature and tail bounds.
    double total_mean_error = 0.0;
    double total_var_error = 0.0;

    std::vector<double> log_per_link_mean;
    std::vector<double> log_per_link_second;
    std::vector<std::vector<double>> log_cross;
};

struct MomentReport {
    InterferenceMode mode = InterferenceMode::dependent;
    Divergence divergence = Divergence::finite;
    /// Absent when the moments diverge.
    std::optional<MomentValues> values;

    bool finite() const { return values.has_value(); }
    /// Throws DomainError when the moments diverge.
    const MomentValues& get() const;
};

MomentReport chain_moments(const ChainTopology& topology, const SystemParams& params,
                           const IntegrationSpec& spec = {});

/// Cov[T_m, T_n] in the dependent mode between two links of length L whose
/// receivers are `separation` apart, for each separation in the grid.
std::vector<std::pair<double, double>> covariance_curve(double hop_length, std::span<const double> separations,
                                                        const SystemParams& params,
                                                        const IntegrationSpec& spec = {});

}  // namespace relaychain

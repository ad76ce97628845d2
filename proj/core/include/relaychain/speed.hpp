#pragma once

// Long-chain behaviour of uniform chains: a covariance-truncated bound on
// Var[T] that is linear in N, and the limiting packet speed L / E[T_link].

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "relaychain/model.hpp"
#include "relaychain/quadrature.hpp"

namespace relaychain {

struct CovarianceTruncation {
    /// Smallest lag k >= 1 with Cov[T_n, T_{n+k}] below the threshold.
    int K = 1;
    /// Covariance of adjacent links, which bounds every lag.
    double C = 0.0;
    double threshold = 1e-3;
};

/// Dependent-mode covariance lags of a uniform chain with hop length L.
/// Throws ConvergenceError when no lag up to max_lag falls below threshold.
CovarianceTruncation truncation_lag(double hop_length, const SystemParams& params, double threshold = 1e-3,
                                    const IntegrationSpec& spec = {}, int max_lag = 1000);

/// N Var[T_link] + 2 N min(N - 1, K) C.
double variance_upper_bound(int N, double var_link, const CovarianceTruncation& trunc);

struct SpeedReport {
    double hop_length = 0.0;
    SystemParams params;
    bool divergent = false;
    double mean_link = 0.0;            ///< E[T_link]; +inf when divergent
    double var_link = 0.0;
    double mean_inverse_speed = 0.0;   ///< E[T_link] / L
    double asymptotic_speed = 0.0;     ///< L / E[T_link]; 0 when divergent
    /// Present in the dependent mode when requested.
    std::optional<CovarianceTruncation> truncation;

    InterferenceMode mode() const { return params.mode(); }
    /// Bound on Var[T] for N hops: exact N Var[T_link] in the independent
    /// mode, variance_upper_bound in the dependent mode.
    double variance_bound(int N) const;
    /// Chebyshev bound on P[|N L / T - speed| style deviation]:
    /// Var[T] / (N^2 L^2 eps^2) with Var[T] from variance_bound.
    double chebyshev_bound(int N, double eps) const;
};

struct SpeedOptions {
    bool with_truncation = true;
    double threshold = 1e-3;
    int max_lag = 1000;
};

SpeedReport asymptotic_speed(double hop_length, const SystemParams& params, const IntegrationSpec& spec = {},
                             const SpeedOptions& options = {});

/// One CSV row without the trailing newline.
std::string speed_csv_row(const SpeedReport& report);

/// Header plus one row (L, p, lambda, theta, alpha, mode, speed) per report.
void write_speed_csv(std::ostream& out, std::span<const SpeedReport> reports);

}  // namespace relaychain

#pragma once

// Exact distribution of the travel time for short chains and small t.
//
// In the dependent mode the joint law of (T_1..T_N) is an alternating sum of
// moments E[prod Omega_n^{e_n}], each a PGFL integral indexed by the exponent
// vector e. The sums cancel heavily, so every mass carries an error bound
// propagated from the integrals, and a PrecisionError is raised when that
// bound exceeds the configured budget.

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "relaychain/model.hpp"

namespace relaychain {

/// Per-link powers e_n of phi_n inside one joint moment integral.
using ExponentVector = std::vector<int>;

struct PmfOptions {
    /// Largest admissible error bound on any single probability.
    double mass_tolerance = 1e-6;
    /// Largest number of joint terms (compositions) a table may need.
    std::size_t term_budget = 100'000;
    /// 0 picks the hardware concurrency.
    unsigned workers = 1;
    double radial_rel_tol = 1e-16;
    double radial_abs_tol = 1e-18;
    double plane_rel_tol = 1e-14;
    double plane_abs_tol = 1e-16;
};

/// A probability with a bound on its absolute error.
struct CertifiedProbability {
    double value = 0.0;
    double error = 0.0;
};

struct PmfTable {
    PmfTable(ChainTopology topology, SystemParams params, int first, int t_max);

    InterferenceMode mode = InterferenceMode::dependent;
    int first = 1;  ///< smallest t in the table (= N)
    int t_max = 1;
    std::vector<double> mass;        ///< P[T = t] for t = first..t_max
    std::vector<double> mass_error;  ///< error bound per entry
    /// Upper bound on P[T > t_max]: the smaller of the union bound over links
    /// and one minus the certified lower bound of the listed mass.
    double tail_mass_bound = 0.0;
    double union_tail_bound = 0.0;
    ChainTopology topology;
    SystemParams params;

    double at(int t) const;
    double total_mass() const;
    double total_error() const;
    /// sum t P[T = t] over the table.
    double truncated_mean() const;
    double truncated_second_moment() const;

    /// `# tail_mass_bound = ...` then a `t,mass` CSV.
    void write_csv(std::ostream& out) const;
};

/// Holds the memoized moment integrals for one (topology, params) pair.
/// Safe to use from several threads.
class PmfEngine {
public:
    PmfEngine(ChainTopology topology, SystemParams params, PmfOptions options = {});
    ~PmfEngine();
    PmfEngine(const PmfEngine&) = delete;
    PmfEngine& operator=(const PmfEngine&) = delete;

    const ChainTopology& topology() const noexcept { return topology_; }
    const SystemParams& params() const noexcept { return params_; }
    const PmfOptions& options() const noexcept { return options_; }

    /// P[T_n = t], dependent mode.
    CertifiedProbability link_pmf(std::size_t n, int t);
    /// P[T_1 = t_1, ..., T_N = t_N], dependent mode.
    CertifiedProbability joint_pmf(std::span<const int> t);
    /// P[T_n > s] = E[(1 - Omega_n)^s], dependent mode.
    CertifiedProbability link_survival(std::size_t n, int s);

    PmfTable travel_time_pmf(int t_max);

    /// E[prod Omega_n^{e_n}] and a bound on its absolute error.
    CertifiedProbability joint_moment(const ExponentVector& e);
    std::size_t cached_integrals() const;

private:
    struct Cache;
    /// joint_moment in long double; `error` receives the bound.
    long double extended_moment(const ExponentVector& e, long double& error);

    ChainTopology topology_;
    SystemParams params_;
    PmfOptions options_;
    std::unique_ptr<Cache> cache_;
};

CertifiedProbability link_pmf(const ChainTopology& topology, std::size_t n, const SystemParams& params, int t,
                              const PmfOptions& options = {});
CertifiedProbability joint_pmf(const ChainTopology& topology, const SystemParams& params,
                               std::span<const int> t, const PmfOptions& options = {});
PmfTable travel_time_pmf(const ChainTopology& topology, const SystemParams& params, int t_max,
                         const PmfOptions& options = {});
/// Independent mode: T is a sum of independent geometric laws.
PmfTable independent_pmf(const ChainTopology& topology, const SystemParams& params, int t_max);

/// Number of compositions of t into n positive parts, C(t - 1, n - 1).
double composition_count(int t, int n);

}  // namespace relaychain

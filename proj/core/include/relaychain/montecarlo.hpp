#pragma once

// Slot-level simulation of a packet crossing the chain.
//
// Interferers inside a disk around the chain are simulated point by point.
// Interference from beyond the disk is folded in exactly per slot by
// thinning: an interferer at x blocks the slot with probability 1 - phi_n(x),
// so the far field blocks with probability 1 - exp(-lambda int_far (1 - phi_n)).
// In the dependent mode this treats the far field as redrawn every slot; the
// automatic radius keeps the resulting bias on log E[T_n] below 1e-6.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "relaychain/model.hpp"
#include "relaychain/rng.hpp"

namespace relaychain {

struct McConfig {
    std::size_t trials = 100'000;
    std::uint64_t master_seed = 1;
    /// Fixed simulation radius R_sim about the chain centroid; 0 selects the
    /// automatic radius.
    double sampling_radius = 0.0;
    std::int64_t slot_cap = 1'000'000;
    unsigned workers = 1;
    /// Keep every TrialOutcome in the estimate.
    bool keep_outcomes = false;

    void validate(const ChainTopology& topology) const;
};

struct TrialOutcome {
    std::vector<std::int64_t> per_link_slots;
    std::int64_t total_slots = 0;
    bool censored = false;
};

struct McEstimate {
    double mean = 0.0;
    double variance = 0.0;
    double standard_error = 0.0;           ///< of the mean
    double variance_standard_error = 0.0;  ///< of the sample variance
    std::size_t trials = 0;
    std::size_t censored_count = 0;
    std::uint64_t seed = 0;
    double sampling_radius = 0.0;
    /// False when every trial was censored.
    bool usable = true;
    std::vector<double> per_link_mean;
    std::vector<double> per_link_variance;
    /// Count of uncensored trials with T = t.
    std::map<std::int64_t, std::uint64_t> empirical_pmf;
    std::vector<TrialOutcome> outcomes;  ///< only with keep_outcomes

    std::size_t uncensored() const { return trials - censored_count; }
    double empirical_probability(std::int64_t t) const;
};

/// Homogeneous PPP of intensity lambda in the disk of radius R about center,
/// generated in order of increasing distance from the center so that a larger
/// radius extends the same realization.
std::vector<Point> sample_ppp(double lambda, Point center, double radius, Engine& rng);

/// One slot of `link` against the given interferers, without any far field:
/// succeeds iff h g(tx, rx) > theta sum_u h_u g(u, rx) 1(u active).
bool simulate_slot(const Link& link, std::span<const Point> interferers, const SystemParams& params,
                   Engine& rng);

/// Radius of the simulated disk for `topology` under `config`.
double simulation_radius(const ChainTopology& topology, const SystemParams& params, const McConfig& config);

/// One packet; `trial` keys its random streams.
TrialOutcome simulate_packet(const ChainTopology& topology, const SystemParams& params, const McConfig& config,
                             std::uint64_t trial);

McEstimate estimate(const ChainTopology& topology, const SystemParams& params, const McConfig& config);

/// trial_id, T_1..T_N, total, censored.
void write_trials_csv(std::ostream& out, std::span<const TrialOutcome> outcomes);

}  // namespace relaychain

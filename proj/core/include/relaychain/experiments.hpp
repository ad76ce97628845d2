#pragma once

// Parameter sweeps behind the command-line tool. Each experiment writes a
// CSV whose header echoes the full config, so a file can be regenerated
// from its own header.
//
// Columns:
//   mean_vs_N, var_vs_N_fixed_span, var_vs_N_fixed_hop
//       N,L,lambda,p,theta,alpha,mode,E_T,Var_T,finite_flag,status
//   cov_vs_distance
//       distance,L,lambda,p,theta,alpha,mode,cov,status
//   speed_vs_L
//       L,p,lambda,theta,alpha,mode,speed,status
//   pmf
//       N,L,lambda,p,theta,alpha,mode,t,mass,mass_error,tail_mass_bound,status
//   validate
//       N,L,lambda,p,theta,alpha,mode,quantity,analytic,mc,se,z,trials,censored,status
//
// status is ok, divergent, mismatch (validate: |z| >= 3), censored
// (validate: some trials hit slot_cap) or error:<kind>. Every status other
// than ok and divergent counts as flagged.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>

#include "relaychain/config.hpp"

namespace relaychain {

struct RunOptions {
    /// 0 picks the hardware concurrency. Output does not depend on it.
    unsigned workers = 1;
};

struct RunSummary {
    std::size_t points = 0;
    std::size_t rows = 0;
    std::size_t flagged = 0;
};

std::string_view csv_columns(Experiment e);

/// `# relaychain <version>` followed by the config echo as comments.
void write_csv_header(std::ostream& out, const ExperimentConfig& config);

/// Validates the config, evaluates every grid point and writes header,
/// column line and rows in grid order. Per-point failures become flagged
/// rows; only invalid configs throw.
RunSummary run_experiment(const ExperimentConfig& config, std::ostream& out, const RunOptions& options = {});

}  // namespace relaychain

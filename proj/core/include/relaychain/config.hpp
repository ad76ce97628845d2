#pragma once

// Experiment configuration files.
//
// Grammar (one setting per line):
//
//   line    := blank | comment | key '=' value [comment]
//   comment := '#' anything
//   value   := scalar | list | range
//   list    := '[' item (',' item)* ']'       item := scalar | range
//   range   := int '..' int                   inclusive integer range
//
// Keys may appear once. Unset keys take the defaults of the chosen
// experiment. See README.md for the key table.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relaychain/model.hpp"

namespace relaychain {

std::string_view version();

enum class Experiment {
    mean_vs_N,
    var_vs_N_fixed_span,
    var_vs_N_fixed_hop,
    cov_vs_distance,
    speed_vs_L,
    pmf,
    validate,
};

std::string_view to_string(Experiment e);
/// Throws ConfigError for unknown names.
Experiment parse_experiment(std::string_view text);

struct ExperimentConfig {
    Experiment experiment = Experiment::mean_vs_N;
    std::vector<double> lambda;
    std::vector<double> p;
    std::vector<double> theta;
    std::vector<double> alpha;
    PathLossModel::Kind path_loss = PathLossModel::Kind::bounded;
    std::vector<int> N;
    /// Hop lengths. Empty when the chain span is fixed instead.
    std::vector<double> L;
    /// Total chain length; each chain of N links then has hop span / N.
    std::optional<double> span;
    std::vector<InterferenceMode> modes;
    /// Receiver separations for cov_vs_distance.
    std::vector<double> distances;
    int t_max = 30;
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    std::size_t trials = 100'000;
    std::uint64_t seed = 1;
    std::int64_t slot_cap = 1'000'000;
    std::size_t pmf_term_budget = 100'000;
    double mass_tolerance = 1e-6;
    double threshold = 1e-3;

    /// Throws ConfigError naming the offending key.
    void validate() const;
    /// Hop length of an N-link chain at position i of the L grid (or the
    /// span when set).
    std::vector<double> hop_lengths(int N) const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Default grid of an experiment.
ExperimentConfig default_config(Experiment e);

/// `fallback` supplies the experiment when the text has no `experiment` key.
ExperimentConfig parse_config(std::string_view text, std::optional<Experiment> fallback = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Experiment> fallback = std::nullopt);

/// Every key as `key = value` lines, in a form parse_config reads back to an
/// equal config.
std::string echo_config(const ExperimentConfig& config);

/// Recovers the config from the `# key = value` header of an emitted CSV.
ExperimentConfig config_from_csv_header(std::string_view csv);

}  // namespace relaychain

// relaychain: run experiment sweeps from a config file and write CSV.
//
//   relaychain run <config>        any experiment
//   relaychain validate <config>   analytic vs Monte Carlo (experiment defaults to validate)
//   relaychain pmf <config>        travel-time PMF tables (experiment defaults to pmf)
//
// Exit status: 0 when every row is ok or divergent, otherwise the number of
// flagged rows capped at 100; 101 for an unusable config or output file.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "relaychain/config.hpp"
#include "relaychain/errors.hpp"
#include "relaychain/experiments.hpp"

namespace {

constexpr int kConfigFailure = 101;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<double> tol;
    std::string out;
    unsigned workers = 1;
};

int execute(const std::string& verb, const std::string& path, const Overrides& o) {
    using namespace relaychain;
    std::optional<Experiment> verb_experiment;
    if (verb == "validate") verb_experiment = Experiment::validate;
    if (verb == "pmf") verb_experiment = Experiment::pmf;

    ExperimentConfig config;
    try {
        config = load_config(path, verb_experiment);
        if (verb_experiment && config.experiment != *verb_experiment)
            throw ConfigError("'" + verb + "' cannot run experiment '" + std::string(to_string(config.experiment)) +
                              "'; use 'run'");
        if (o.seed) config.seed = *o.seed;
        if (o.trials) config.trials = *o.trials;
        if (o.tol) config.rel_tol = *o.tol;
        config.validate();
    } catch (const ConfigError& e) {
        std::cerr << path << ": " << e.what() << '\n';
        return kConfigFailure;
    }

    std::ofstream file;
    if (!o.out.empty()) {
        file.open(o.out, std::ios::binary | std::ios::trunc);
        if (!file) {
            std::cerr << "cannot open '" << o.out << "' for writing\n";
            return kConfigFailure;
        }
    }
    std::ostream& out = o.out.empty() ? std::cout : file;
    const RunSummary s = run_experiment(config, out, RunOptions{o.workers});
    if (!out) {
        std::cerr << "write failed\n";
        return kConfigFailure;
    }
    std::cerr << to_string(config.experiment) << ": " << s.points << " points, " << s.rows << " rows, " << s.flagged
              << " flagged\n";
    return static_cast<int>(std::min<std::size_t>(s.flagged, 100));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Travel-time statistics of packets on relay chains in Poisson interference fields"};
    app.set_version_flag("--version", std::string(relaychain::version()));
    app.require_subcommand(1);

    Overrides o;
    std::string path;
    for (const char* verb : {"run", "validate", "pmf"}) {
        CLI::App* sub = app.add_subcommand(verb, std::string(verb) == "run"        ? "Run the experiment named in the config"
                                                 : std::string(verb) == "validate" ? "Compare analytic moments with Monte Carlo"
                                                                                   : "Tabulate the travel-time PMF");
        sub->add_option("config", path, "Config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Master seed (overrides the config)");
        sub->add_option("--trials", o.trials, "Monte Carlo trials per point (overrides the config)");
        sub->add_option("--tol", o.tol, "Relative quadrature tolerance (overrides the config)");
        sub->add_option("--out", o.out, "Output CSV path (default stdout)");
        sub->add_option("-j,--workers", o.workers, "Worker threads, 0 for all cores")->capture_default_str();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        return execute(app.get_subcommands().front()->get_name(), path, o);
    } catch (const std::exception& e) {
        std::cerr << "relaychain: " << e.what() << '\n';
        return kConfigFailure;
    }
}

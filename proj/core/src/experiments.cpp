#include "relaychain/experiments.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <vector>

#include "relaychain/errors.hpp"
#include "relaychain/moments.hpp"
#include "relaychain/montecarlo.hpp"
#include "relaychain/parallel.hpp"
#include "relaychain/pmf.hpp"
#include "relaychain/speed.hpp"
#include "text.hpp"

namespace relaychain {

namespace {

using detail::format_double;

struct GridPoint {
    double lambda, p, theta, alpha;
    int N;
    double L;
    InterferenceMode mode;
    std::size_t index;

    SystemParams params(PathLossModel::Kind kind) const {
        const PathLossModel g =
            kind == PathLossModel::Kind::bounded ? PathLossModel::bounded(alpha) : PathLossModel::singular(alpha);
        return SystemParams(lambda, p, theta, g, mode);
    }

    // N,L,lambda,p,theta,alpha,mode
    std::string prefix() const {
        std::string s = std::to_string(N);
        for (double x : {L, lambda, p, theta, alpha}) s += ',' + format_double(x);
        s += ',';
        s += to_string(mode);
        return s;
    }
};

struct PointRows {
    std::vector<std::string> rows;
    std::size_t flagged = 0;

    void add(std::string row, std::string_view status) {
        row += ',';
        row += status;
        rows.push_back(std::move(row));
        if (status != "ok" && status != "divergent") ++flagged;
    }
};

std::string error_status(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const ConvergenceError&) {
        return "error:convergence";
    } catch (const PrecisionError&) {
        return "error:precision";
    } catch (const BudgetError&) {
        return "error:budget";
    } catch (const DomainError&) {
        return "error:domain";
    } catch (const ModelError&) {
        return "error:model";
    } catch (...) {
        return "error:other";
    }
}

// Grid order: lambda, p, theta, alpha, mode, N, L.
std::vector<GridPoint> chain_grid(const ExperimentConfig& c, bool use_N) {
    std::vector<GridPoint> grid;
    const std::vector<int> ns = use_N ? c.N : std::vector<int>{1};
    for (double lambda : c.lambda)
        for (double p : c.p)
            for (double theta : c.theta)
                for (double alpha : c.alpha)
                    for (InterferenceMode mode : c.modes)
                        for (int n : ns)
                            for (double L : c.hop_lengths(n))
                                grid.push_back({lambda, p, theta, alpha, n, L, mode, grid.size()});
    return grid;
}

IntegrationSpec spec_of(const ExperimentConfig& c) {
    IntegrationSpec spec;
    spec.rel_tol = c.rel_tol;
    spec.abs_tol = c.abs_tol;
    return spec;
}

void moments_point(const ExperimentConfig& c, const GridPoint& g, PointRows& out) {
    const std::string prefix = g.prefix();
    try {
        const MomentReport r = chain_moments(uniform_chain(g.N, g.L), g.params(c.path_loss), spec_of(c));
        if (!r.finite()) {
            out.add(prefix + ",inf,inf,0", "divergent");
            return;
        }
        const MomentValues& v = r.get();
        out.add(prefix + ',' + format_double(v.total_mean) + ',' + format_double(v.total_var) + ",1", "ok");
    } catch (...) {
        out.add(prefix + ",,,0", error_status(std::current_exception()));
    }
}

void covariance_point(const ExperimentConfig& c, const GridPoint& g, PointRows& out) {
    // distance,L,lambda,p,theta,alpha,mode,cov
    auto row = [&](double d, std::string_view cov) {
        std::string s = format_double(d);
        for (double x : {g.L, g.lambda, g.p, g.theta, g.alpha}) s += ',' + format_double(x);
        s += ',';
        s += to_string(g.mode);
        s += ',';
        s += cov;
        return s;
    };
    try {
        const SystemParams params = g.params(c.path_loss);
        if (g.mode == InterferenceMode::independent) {
            for (double d : c.distances) out.add(row(d, "0"), "ok");
            return;
        }
        if (check_divergence(params) != Divergence::finite) {
            for (double d : c.distances) out.add(row(d, "inf"), "divergent");
            return;
        }
        for (const auto& [d, cov] : covariance_curve(g.L, c.distances, params, spec_of(c)))
            out.add(row(d, format_double(cov)), "ok");
    } catch (...) {
        const std::string status = error_status(std::current_exception());
        out.rows.clear();
        out.flagged = 0;
        for (double d : c.distances) out.add(row(d, ""), status);
    }
}

void speed_point(const ExperimentConfig& c, const GridPoint& g, PointRows& out) {
    const SystemParams params = g.params(c.path_loss);
    try {
        const SpeedReport r = asymptotic_speed(g.L, params, spec_of(c), SpeedOptions{.with_truncation = false});
        out.add(speed_csv_row(r), r.divergent ? "divergent" : "ok");
    } catch (...) {
        std::string s = format_double(g.L);
        for (double x : {g.p, g.lambda, g.theta, g.alpha}) s += ',' + format_double(x);
        s += ',';
        s += to_string(g.mode);
        out.add(s + ',', error_status(std::current_exception()));
    }
}

void pmf_point(const ExperimentConfig& c, const GridPoint& g, PointRows& out) {
    const std::string prefix = g.prefix();
    try {
        PmfOptions opt;
        opt.mass_tolerance = c.mass_tolerance;
        opt.term_budget = c.pmf_term_budget;
        const PmfTable table = travel_time_pmf(uniform_chain(g.N, g.L), g.params(c.path_loss), c.t_max, opt);
        const std::string tail = format_double(table.tail_mass_bound);
        for (int t = table.first; t <= table.t_max; ++t) {
            const std::size_t i = static_cast<std::size_t>(t - table.first);
            out.add(prefix + ',' + std::to_string(t) + ',' + format_double(table.mass[i]) + ',' +
                        format_double(table.mass_error[i]) + ',' + tail,
                    "ok");
        }
    } catch (...) {
        out.add(prefix + ",,,,", error_status(std::current_exception()));
    }
}

std::uint64_t point_seed(std::uint64_t master, std::size_t index) {
    // splitmix64 finalizer of (master, index)
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double z_score(double estimate, double exact, double se) {
    if (se > 0.0) return (estimate - exact) / se;
    return estimate == exact ? 0.0 : std::numeric_limits<double>::infinity();
}

void validate_point(const ExperimentConfig& c, const GridPoint& g, unsigned workers, PointRows& out) {
    const std::string prefix = g.prefix();
    const SystemParams params = g.params(c.path_loss);
    const ChainTopology chain = uniform_chain(g.N, g.L);
    try {
        const MomentReport analytic = chain_moments(chain, params, spec_of(c));
        if (!analytic.finite()) {
            out.add(prefix + ",mean,inf,,,,,", "divergent");
            out.add(prefix + ",var,inf,,,,,", "divergent");
            return;
        }
        McConfig mc;
        mc.trials = c.trials;
        mc.master_seed = point_seed(c.seed, g.index);
        mc.slot_cap = c.slot_cap;
        mc.workers = workers;
        const McEstimate est = estimate(chain, params, mc);
        const MomentValues& v = analytic.get();
        const std::string counts = ',' + std::to_string(est.trials) + ',' + std::to_string(est.censored_count);
        auto emit = [&](std::string_view quantity, double exact, double value, double se) {
            const double z = z_score(value, exact, se);
            std::string_view status = "ok";
            if (est.censored_count > 0) status = "censored";
            else if (!(std::abs(z) < 3.0)) status = "mismatch";
            out.add(prefix + ',' + std::string(quantity) + ',' + format_double(exact) + ',' + format_double(value) +
                        ',' + format_double(se) + ',' + format_double(z) + counts,
                    status);
        };
        emit("mean", v.total_mean, est.mean, est.standard_error);
        emit("var", v.total_var, est.variance, est.variance_standard_error);
    } catch (...) {
        const std::string status = error_status(std::current_exception());
        out.rows.clear();
        out.flagged = 0;
        out.add(prefix + ",mean,,,,,,", status);
        out.add(prefix + ",var,,,,,,", status);
    }
}

}  // namespace

std::string_view csv_columns(Experiment e) {
    switch (e) {
    case Experiment::mean_vs_N:
    case Experiment::var_vs_N_fixed_span:
    case Experiment::var_vs_N_fixed_hop:
        return "N,L,lambda,p,theta,alpha,mode,E_T,Var_T,finite_flag,status";
    case Experiment::cov_vs_distance:
        return "distance,L,lambda,p,theta,alpha,mode,cov,status";
    case Experiment::speed_vs_L:
        return "L,p,lambda,theta,alpha,mode,speed,status";
    case Experiment::pmf:
        return "N,L,lambda,p,theta,alpha,mode,t,mass,mass_error,tail_mass_bound,status";
    case Experiment::validate:
        return "N,L,lambda,p,theta,alpha,mode,quantity,analytic,mc,se,z,trials,censored,status";
    }
    return {};
}

void write_csv_header(std::ostream& out, const ExperimentConfig& config) {
    out << "# relaychain " << version() << '\n';
    const std::string echo = echo_config(config);
    std::string_view rest = echo;
    while (!rest.empty()) {
        const auto nl = rest.find('\n');
        out << "# " << rest.substr(0, nl) << '\n';
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    }
}

RunSummary run_experiment(const ExperimentConfig& config, std::ostream& out, const RunOptions& options) {
    config.validate();
    const Experiment e = config.experiment;
    const bool per_chain = e != Experiment::cov_vs_distance && e != Experiment::speed_vs_L;
    const std::vector<GridPoint> grid = chain_grid(config, per_chain);
    std::vector<PointRows> results(grid.size());

    if (e == Experiment::validate) {
        // Points are few and heavy: spread the trials of each over the workers.
        for (std::size_t i = 0; i < grid.size(); ++i) validate_point(config, grid[i], options.workers, results[i]);
    } else {
        parallel_for(grid.size(), options.workers, [&](std::size_t i) {
            switch (e) {
            case Experiment::cov_vs_distance: covariance_point(config, grid[i], results[i]); break;
            case Experiment::speed_vs_L: speed_point(config, grid[i], results[i]); break;
            case Experiment::pmf: pmf_point(config, grid[i], results[i]); break;
            default: moments_point(config, grid[i], results[i]); break;
            }
        });
    }

    write_csv_header(out, config);
    out << csv_columns(e) << '\n';
    RunSummary summary;
    summary.points = grid.size();
    for (const PointRows& r : results) {
        for (const std::string& row : r.rows) out << row << '\n';
        summary.rows += r.rows.size();
        summary.flagged += r.flagged;
    }
    out.flush();
    return summary;
}

}  // namespace relaychain

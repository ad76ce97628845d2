#include "relaychain/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "relaychain/errors.hpp"
#include "relaychain/parallel.hpp"

namespace relaychain {

namespace {

__extension__ using u128 = unsigned __int128;

constexpr double two_pi = 2.0 * std::numbers::pi;

// Target bound on the per-link log-mean bias from redrawing the far field
// every slot in the dependent mode.
constexpr double far_field_bias = 1e-6;

struct LinkSetup {
    Point rx;
    double signal;    // g(tx, rx)
    double theta_n;   // theta / g(tx, rx)
    double far_inner; // every point outside the disk is at least this far from rx
    double far_mass;  // expected number of far-field blocking candidates per slot
};

struct Simulator {
    const ChainTopology& topology;
    const SystemParams& params;
    const McConfig& config;
    Point center;
    double radius = 0.0;
    std::vector<LinkSetup> links;

    Simulator(const ChainTopology& t, const SystemParams& p, const McConfig& c)
        : topology(t), params(p), config(c), center(t.centroid()) {
        radius = simulation_radius(t, p, c);
        const double alpha = p.path_loss().alpha();
        for (const Link& l : t.links()) {
            LinkSetup s;
            s.rx = l.rx;
            s.signal = p.path_loss()(l.tx, l.rx);
            s.theta_n = p.threshold() / s.signal;
            s.far_inner = radius - distance(l.rx, center);
            // Candidates form a PPP of intensity lambda p theta_n r^-alpha on
            // r > far_inner, which dominates the blocking intensity
            // lambda p theta_n g / (1 + theta_n g) because far_inner >= 1.
            s.far_mass = p.density() * p.aloha() * s.theta_n * two_pi * std::pow(s.far_inner, 2.0 - alpha) /
                         (alpha - 2.0);
            links.push_back(s);
        }
    }

    bool near_success(const LinkSetup& l, std::span<const Point> field, std::span<const double> gains,
                      Engine& rng) const {
        std::exponential_distribution<double> exp1(1.0);
        const double limit = exp1(rng) * l.signal / params.threshold();
        const double p = params.aloha();
        if (p <= 0.0) return true;
        std::bernoulli_distribution active(p);
        double interference = 0.0;
        for (std::size_t u = 0; u < field.size(); ++u) {
            if (p < 1.0 && !active(rng)) continue;
            interference += exp1(rng) * (gains.empty() ? params.path_loss().at_distance_unchecked(distance(field[u], l.rx))
                                                       : gains[u]);
            if (interference >= limit) return false;
        }
        return true;
    }

    bool far_success(const LinkSetup& l, Engine& rng) const {
        if (l.far_mass <= 0.0) return true;
        const int candidates = std::poisson_distribution<int>(l.far_mass)(rng);
        if (candidates == 0) return true;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double alpha = params.path_loss().alpha();
        for (int k = 0; k < candidates; ++k) {
            const double r = l.far_inner * std::pow(1.0 - unif(rng), -1.0 / (alpha - 2.0));
            const double a = two_pi * unif(rng);
            const double accept = unif(rng);
            const Point x = l.rx + r * Point{std::cos(a), std::sin(a)};
            if (distance(x, center) <= radius) continue;  // simulated explicitly
            const double g = std::pow(r, -alpha);
            if (accept * (1.0 + l.theta_n * g) < 1.0) return false;
        }
        return true;
    }

    TrialOutcome run(std::uint64_t trial) const {
        const std::size_t N = links.size();
        TrialOutcome out;
        out.per_link_slots.assign(N, 0);
        const bool dependent = params.mode() == InterferenceMode::dependent;
        const double lambda = params.density();

        std::vector<Point> field;
        std::vector<std::vector<double>> gains(N);
        if (dependent && lambda > 0.0) {
            Engine rng = make_stream(config.master_seed, trial, StreamPurpose::field, 0);
            field = sample_ppp(lambda, center, radius, rng);
            for (std::size_t n = 0; n < N; ++n) {
                gains[n].reserve(field.size());
                for (Point u : field)
                    gains[n].push_back(params.path_loss().at_distance_unchecked(distance(u, links[n].rx)));
            }
        }

        std::uint64_t slot = 0;
        for (std::size_t n = 0; n < N; ++n) {
            while (true) {
                if (out.total_slots >= config.slot_cap) {
                    out.censored = true;
                    out.total_slots = config.slot_cap;
                    return out;
                }
                ++out.per_link_slots[n];
                ++out.total_slots;
                if (!dependent && lambda > 0.0) {
                    Engine rng = make_stream(config.master_seed, trial, StreamPurpose::field, slot + 1);
                    field = sample_ppp(lambda, center, radius, rng);
                }
                bool ok = true;
                if (!field.empty()) {
                    Engine rng = make_stream(config.master_seed, trial, StreamPurpose::fading, slot);
                    ok = near_success(links[n], field, dependent ? std::span<const double>(gains[n])
                                                                 : std::span<const double>(), rng);
                }
                if (ok && links[n].far_mass > 0.0) {
                    Engine rng = make_stream(config.master_seed, trial, StreamPurpose::far_field, slot);
                    ok = far_success(links[n], rng);
                }
                ++slot;
                if (ok) break;
            }
        }
        return out;
    }
};

}  // namespace

void McConfig::validate(const ChainTopology& topology) const {
    if (trials < 1) throw ModelError("Monte Carlo needs at least one trial");
    if (slot_cap < static_cast<std::int64_t>(topology.size()))
        throw ModelError("slot cap must be at least the number of links");
    if (!(sampling_radius >= 0.0) || !std::isfinite(sampling_radius))
        throw ModelError("sampling radius must be finite and >= 0");
}

double McEstimate::empirical_probability(std::int64_t t) const {
    if (uncensored() == 0) return 0.0;
    const auto it = empirical_pmf.find(t);
    return it == empirical_pmf.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(uncensored());
}

std::vector<Point> sample_ppp(double lambda, Point center, double radius, Engine& rng) {
    if (!(lambda >= 0.0) || !(radius > 0.0)) throw ModelError("sample_ppp needs lambda >= 0 and radius > 0");
    std::vector<Point> pts;
    if (lambda == 0.0) return pts;
    // Arrivals of a unit-rate Poisson process in the variable lambda pi r^2.
    std::exponential_distribution<double> exp1(1.0);
    std::uniform_real_distribution<double> unif(0.0, two_pi);
    const double scale = lambda * std::numbers::pi;
    double gamma = 0.0;
    while (true) {
        gamma += exp1(rng);
        const double r = std::sqrt(gamma / scale);
        if (r > radius) break;
        const double a = unif(rng);
        pts.push_back(center + r * Point{std::cos(a), std::sin(a)});
    }
    return pts;
}

bool simulate_slot(const Link& link, std::span<const Point> interferers, const SystemParams& params, Engine& rng) {
    std::exponential_distribution<double> exp1(1.0);
    const double limit = exp1(rng) * params.path_loss()(link.tx, link.rx) / params.threshold();
    const double p = params.aloha();
    if (p <= 0.0) return true;
    std::bernoulli_distribution active(p);
    double interference = 0.0;
    for (Point u : interferers) {
        if (p < 1.0 && !active(rng)) continue;
        interference += exp1(rng) * params.path_loss().at_distance_unchecked(distance(u, link.rx));
        if (interference >= limit) return false;
    }
    return true;
}

double simulation_radius(const ChainTopology& topology, const SystemParams& params, const McConfig& config) {
    const double extent = topology.radius();
    if (config.sampling_radius > 0.0) {
        if (config.sampling_radius - extent < 1.0)
            throw ModelError("sampling radius must exceed the chain radius by at least 1");
        return config.sampling_radius;
    }
    // Bias of log E[T_n] from a per-slot far field:
    //   lambda int_far (1 - phi)^2 / phi <= lambda p^2 theta_n^2 2 pi r^(2 - 2 alpha) / (2 alpha - 2)
    // (with a factor 2 margin for 1/phi).
    double theta_max = 0.0;
    for (const Link& l : topology.links())
        theta_max = std::max(theta_max, params.threshold() / params.path_loss()(l.tx, l.rx));
    const double alpha = params.path_loss().alpha();
    const double c = 2.0 * params.density() * params.aloha() * params.aloha() * theta_max * theta_max * two_pi /
                     (2.0 * alpha - 2.0);
    double r_eff = 2.0;
    if (c > 0.0) r_eff = std::max(r_eff, std::pow(c / far_field_bias, 1.0 / (2.0 * alpha - 2.0)));
    return extent + r_eff;
}

TrialOutcome simulate_packet(const ChainTopology& topology, const SystemParams& params, const McConfig& config,
                             std::uint64_t trial) {
    config.validate(topology);
    const Simulator sim(topology, params, config);
    return sim.run(trial);
}

McEstimate estimate(const ChainTopology& topology, const SystemParams& params, const McConfig& config) {
    config.validate(topology);
    const Simulator sim(topology, params, config);
    const std::size_t N = topology.size();

    std::vector<TrialOutcome> outcomes(config.trials);
    parallel_for(config.trials, config.workers, [&](std::size_t i) { outcomes[i] = sim.run(i); });

    // Integer sums are exact, so the reduction order cannot matter.
    McEstimate est;
    est.trials = config.trials;
    est.seed = config.master_seed;
    est.sampling_radius = sim.radius;
    std::uint64_t n = 0, sum = 0;
    u128 sum_sq = 0;
    std::vector<std::uint64_t> link_sum(N, 0);
    std::vector<u128> link_sq(N, 0);
    for (const TrialOutcome& o : outcomes) {
        if (o.censored) {
            ++est.censored_count;
            continue;
        }
        ++n;
        const auto t = static_cast<std::uint64_t>(o.total_slots);
        sum += t;
        sum_sq += static_cast<u128>(t) * t;
        ++est.empirical_pmf[o.total_slots];
        for (std::size_t k = 0; k < N; ++k) {
            const auto s = static_cast<std::uint64_t>(o.per_link_slots[k]);
            link_sum[k] += s;
            link_sq[k] += static_cast<u128>(s) * s;
        }
    }
    est.usable = n > 0;
    if (est.usable) {
        auto moments = [n](std::uint64_t s, u128 sq, double& mean, double& var) {
            mean = static_cast<double>(static_cast<long double>(s) / static_cast<long double>(n));
            if (n < 2) {
                var = 0.0;
                return;
            }
            const u128 num = static_cast<u128>(n) * sq - static_cast<u128>(s) * s;
            var = static_cast<double>(static_cast<long double>(num) /
                                      (static_cast<long double>(n) * static_cast<long double>(n - 1)));
        };
        moments(sum, sum_sq, est.mean, est.variance);
        for (std::size_t k = 0; k < N; ++k) {
            double m = 0.0, v = 0.0;
            moments(link_sum[k], link_sq[k], m, v);
            est.per_link_mean.push_back(m);
            est.per_link_variance.push_back(v);
        }
        est.standard_error = std::sqrt(est.variance / static_cast<double>(n));

        // Fourth central moment for the standard error of the sample variance.
        long double m4 = 0.0L;
        const long double mu = static_cast<long double>(sum) / static_cast<long double>(n);
        for (const TrialOutcome& o : outcomes) {
            if (o.censored) continue;
            const long double d = static_cast<long double>(o.total_slots) - mu;
            m4 += d * d * d * d;
        }
        m4 /= static_cast<long double>(n);
        const long double v = est.variance;
        est.variance_standard_error =
            static_cast<double>(std::sqrt(std::max(0.0L, m4 - v * v) / static_cast<long double>(n)));
    }
    if (config.keep_outcomes) est.outcomes = std::move(outcomes);
    return est;
}

void write_trials_csv(std::ostream& out, std::span<const TrialOutcome> outcomes) {
    const std::size_t N = outcomes.empty() ? 0 : outcomes.front().per_link_slots.size();
    out << "trial_id";
    for (std::size_t k = 1; k <= N; ++k) out << ",T_" << k;
    out << ",total,censored\n";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        out << i;
        for (std::int64_t s : outcomes[i].per_link_slots) out << ',' << s;
        out << ',' << outcomes[i].total_slots << ',' << (outcomes[i].censored ? 1 : 0) << '\n';
    }
}

}  // namespace relaychain

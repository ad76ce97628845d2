#include "relaychain/moments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "relaychain/errors.hpp"
#include "relaychain/pgfl.hpp"

namespace relaychain {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

bool trivial(const SystemParams& params) { return params.density() == 0.0 || params.aloha() == 0.0; }

struct Integral {
    double value = 0.0;
    double error = 0.0;  // quadrature error plus tail bound
};

Integral integral_of(const IntegralResult& r) { return {r.value, r.error_estimate + r.tail_bound}; }

// The radial integrals a single link needs, scaled by lambda.
struct LinkTerms {
    Integral loss;      // lambda * int (1 - phi)
    Integral gain;      // lambda * int (1/phi - 1), the log of the dependent mean
    Integral curvature; // lambda * int (1 - 1/phi)^2
};

Integral scaled(double lambda, Integral i) { return {lambda * i.value, lambda * i.error}; }

LinkTerms link_terms(const LinkFactor& f, const SystemParams& params, const IntegrationSpec& spec,
                     bool need_dependent) {
    LinkTerms t;
    if (trivial(params)) return t;
    const double lambda = params.density();
    t.loss = scaled(lambda, integral_of(power_integral(f, 1.0, spec)));
    if (need_dependent) {
        if (f.diverges(-1.0)) {
            t.gain = {inf, 0.0};
            t.curvature = {inf, 0.0};
            return t;
        }
        const Integral g = integral_of(power_integral(f, -1.0, spec));
        t.gain = {-lambda * g.value, lambda * g.error};
        t.curvature = scaled(lambda, integral_of(squared_deficit_integral(f, spec)));
    }
    return t;
}

double canonical_separation(double s) {
    // Keep 40 mantissa bits so separations that differ only by rounding in
    // the node coordinates share one integral.
    int e = 0;
    const double m = std::frexp(s, &e);
    return std::ldexp(std::round(std::ldexp(m, 40)), e - 40);
}

// lambda * int (1 - 1/phi_m)(1 - 1/phi_n) for receivers `separation` apart.
Integral coupling(double theta_m, double theta_n, double separation, const SystemParams& params,
                  const IntegrationSpec& spec) {
    if (trivial(params)) return {};
    const double s = canonical_separation(separation);
    const LinkFactor fm({-s / 2.0, 0.0}, theta_m, params.aloha(), params.path_loss());
    const LinkFactor fn({s / 2.0, 0.0}, theta_n, params.aloha(), params.path_loss());
    if (fm.diverges(-1.0)) return {inf, 0.0};
    return scaled(params.density(), integral_of(coupling_integral(fm, fn, spec)));
}

double threshold_of(const ChainTopology& topology, std::size_t n, const SystemParams& params) {
    const Link& l = topology.link(n);
    return params.threshold() / params.path_loss()(l.tx, l.rx);
}

double separation_of(const ChainTopology& topology, std::size_t m, std::size_t n) {
    return distance(topology.link(m).rx, topology.link(n).rx);
}

LogMoment mean_from(const LinkTerms& t, InterferenceMode mode) {
    if (mode == InterferenceMode::dependent) return {t.gain.value, t.gain.error};
    return {t.loss.value, t.loss.error};
}

// log E[T^2] = a + log(2 e^(a + c) - 1), with c = 0 in the independent mode.
LogMoment second_from(const LinkTerms& t, InterferenceMode mode) {
    if (mode == InterferenceMode::dependent) {
        const double a = t.gain.value;
        if (!std::isfinite(a)) return {inf, 0.0};
        const double c = t.curvature.value;
        return {a + std::log1p(2.0 * std::expm1(a + c)), 3.0 * t.gain.error + 2.0 * t.curvature.error};
    }
    const double b = t.loss.value;
    return {b + std::log1p(2.0 * std::expm1(b)), 3.0 * t.loss.error};
}

struct VarianceWithError {
    double value;
    double error;
};

VarianceWithError variance_from(const LinkTerms& t, InterferenceMode mode) {
    if (mode == InterferenceMode::dependent) {
        const double a = t.gain.value;
        if (!std::isfinite(a)) return {inf, 0.0};
        const double c = t.curvature.value;
        const double ea = std::exp(a);
        const double value = 2.0 * ea * ea * std::expm1(c) + ea * std::expm1(a);
        const double d_a = 4.0 * ea * ea * std::expm1(c) + ea * (2.0 * ea - 1.0);
        const double d_c = 2.0 * ea * ea * std::exp(c);
        return {value, d_a * t.gain.error + d_c * t.curvature.error};
    }
    const double b = t.loss.value;
    const double eb = std::exp(b);
    const double value = -eb * eb * std::expm1(-b);
    return {value, eb * (2.0 * eb - 1.0) * t.loss.error};
}

}  // namespace

Divergence check_divergence(const SystemParams& params) {
    if (params.mode() == InterferenceMode::dependent && !params.path_loss().is_bounded() &&
        params.aloha() == 1.0)
        return Divergence::infinite_dependent_mean;
    return Divergence::finite;
}

Divergence check_divergence(const SystemParams& params, std::size_t) { return check_divergence(params); }

LogMoment success_probability(const ChainTopology& topology, std::size_t n, const SystemParams& params,
                              const IntegrationSpec& spec) {
    const LinkTerms t = link_terms(link_factor(topology, params, n), params, spec, false);
    return {-t.loss.value, t.loss.error};
}

LogMoment mean_link_dependent(const ChainTopology& topology, std::size_t n, const SystemParams& params,
                              const IntegrationSpec& spec) {
    const LinkTerms t = link_terms(link_factor(topology, params, n), params, spec, true);
    return mean_from(t, InterferenceMode::dependent);
}

LogMoment mean_link_independent(const ChainTopology& topology, std::size_t n, const SystemParams& params,
                                const IntegrationSpec& spec) {
    const LinkTerms t = link_terms(link_factor(topology, params, n), params, spec, false);
    return mean_from(t, InterferenceMode::independent);
}

LogMoment mean_link(const ChainTopology& topology, std::size_t n, const SystemParams& params,
                    const IntegrationSpec& spec) {
    return params.mode() == InterferenceMode::dependent ? mean_link_dependent(topology, n, params, spec)
                                                        : mean_link_independent(topology, n, params, spec);
}

LogMoment second_moment_link(const ChainTopology& topology, std::size_t n, const SystemParams& params,
                             const IntegrationSpec& spec) {
    const bool dep = params.mode() == InterferenceMode::dependent;
    const LinkTerms t = link_terms(link_factor(topology, params, n), params, spec, dep);
    return second_from(t, params.mode());
}

double variance_link(const ChainTopology& topology, std::size_t n, const SystemParams& params,
                     const IntegrationSpec& spec) {
    const bool dep = params.mode() == InterferenceMode::dependent;
    const LinkTerms t = link_terms(link_factor(topology, params, n), params, spec, dep);
    return variance_from(t, params.mode()).value;
}

LogMoment cross_moment(const ChainTopology& topology, std::size_t m, std::size_t n, const SystemParams& params,
                       const IntegrationSpec& spec) {
    if (m == n) throw ModelError("cross_moment needs two distinct links; use second_moment_link");
    const LogMoment em = mean_link(topology, m, params, spec);
    const LogMoment en = mean_link(topology, n, params, spec);
    LogMoment out{em.log_value + en.log_value, em.log_error + en.log_error};
    if (params.mode() == InterferenceMode::dependent && out.finite()) {
        const Integral j = coupling(threshold_of(topology, m, params), threshold_of(topology, n, params),
                                    separation_of(topology, m, n), params, spec);
        out.log_value += j.value;
        out.log_error += j.error;
    }
    return out;
}

double covariance(const ChainTopology& topology, std::size_t m, std::size_t n, const SystemParams& params,
                  const IntegrationSpec& spec) {
    if (m == n) throw ModelError("covariance needs two distinct links; use variance_link");
    if (params.mode() == InterferenceMode::independent) return 0.0;
    const LogMoment em = mean_link_dependent(topology, m, params, spec);
    const LogMoment en = mean_link_dependent(topology, n, params, spec);
    if (!em.finite() || !en.finite()) return inf;
    const Integral j = coupling(threshold_of(topology, m, params), threshold_of(topology, n, params),
                                separation_of(topology, m, n), params, spec);
    return std::exp(em.log_value + en.log_value) * std::expm1(j.value);
}

const MomentValues& MomentReport::get() const {
    if (!values) throw DomainError("travel-time moments diverge for these parameters");
    return *values;
}

MomentReport chain_moments(const ChainTopology& topology, const SystemParams& params,
                           const IntegrationSpec& spec) {
    MomentReport report;
    report.mode = params.mode();
    report.divergence = check_divergence(params);
    if (report.divergence != Divergence::finite) return report;

    const bool dep = params.mode() == InterferenceMode::dependent;
    const std::size_t N = topology.size();

    // Links with equal thresholds share their radial integrals, and link pairs
    // with equal thresholds and separation share the coupling integral.
    std::map<double, LinkTerms> link_cache;
    std::vector<double> theta(N);
    std::vector<LinkTerms> terms(N);
    for (std::size_t n = 0; n < N; ++n) {
        theta[n] = threshold_of(topology, n, params);
        auto it = link_cache.find(theta[n]);
        if (it == link_cache.end())
            it = link_cache.emplace(theta[n], link_terms(link_factor(topology, params, n), params, spec, dep))
                     .first;
        terms[n] = it->second;
    }

    MomentValues v;
    v.cross.assign(N, std::vector<double>(N, 0.0));
    v.covariance.assign(N, std::vector<double>(N, 0.0));
    v.log_cross.assign(N, std::vector<double>(N, 0.0));
    std::vector<double> mean_err(N);

    double var_sum = 0.0, var_err = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        const LogMoment mean = mean_from(terms[n], params.mode());
        const LogMoment second = second_from(terms[n], params.mode());
        const VarianceWithError var = variance_from(terms[n], params.mode());
        v.log_per_link_mean.push_back(mean.log_value);
        v.log_per_link_second.push_back(second.log_value);
        v.per_link_mean.push_back(mean.value());
        v.per_link_second.push_back(second.value());
        v.per_link_variance.push_back(var.value);
        mean_err[n] = mean.value() * std::expm1(mean.log_error);
        v.total_mean += mean.value();
        v.total_mean_error += mean_err[n];
        v.cross[n][n] = second.value();
        v.log_cross[n][n] = second.log_value;
        v.covariance[n][n] = var.value;
        var_sum += var.value;
        var_err += var.error;
    }

    std::map<std::tuple<double, double, double>, Integral> pair_cache;
    double cov_sum = 0.0, cov_err = 0.0;
    for (std::size_t m = 0; m < N; ++m) {
        for (std::size_t n = m + 1; n < N; ++n) {
            const double lm = v.log_per_link_mean[m], ln = v.log_per_link_mean[n];
            double log_cross = lm + ln;
            double cov = 0.0;
            if (dep) {
                const double s = separation_of(topology, m, n);
                const auto key = std::make_tuple(std::min(theta[m], theta[n]), std::max(theta[m], theta[n]),
                                                 canonical_separation(s));
                auto it = pair_cache.find(key);
                if (it == pair_cache.end())
                    it = pair_cache.emplace(key, coupling(theta[m], theta[n], s, params, spec)).first;
                const Integral j = it->second;
                log_cross += j.value;
                const double prod = std::exp(lm + ln);
                cov = prod * std::expm1(j.value);
                cov_err += std::abs(cov) * (std::expm1(terms[m].gain.error + terms[n].gain.error)) +
                           prod * std::exp(j.value) * j.error;
            }
            v.log_cross[m][n] = v.log_cross[n][m] = log_cross;
            v.cross[m][n] = v.cross[n][m] = std::exp(log_cross);
            v.covariance[m][n] = v.covariance[n][m] = cov;
            cov_sum += cov;
        }
    }
    v.total_var = var_sum + 2.0 * cov_sum;
    v.total_var_error = var_err + 2.0 * cov_err;
    report.values = std::move(v);
    return report;
}

std::vector<std::pair<double, double>> covariance_curve(double hop_length, std::span<const double> separations,
                                                        const SystemParams& params, const IntegrationSpec& spec) {
    if (!(hop_length > 0.0)) throw ModelError("hop length must be positive");
    const ChainTopology hop = uniform_chain(1, hop_length);
    const SystemParams dep = params.with_mode(InterferenceMode::dependent);
    const LogMoment mean = mean_link_dependent(hop, 0, dep, spec);
    const double theta_n = threshold_of(hop, 0, dep);

    std::vector<std::pair<double, double>> out;
    out.reserve(separations.size());
    for (double s : separations) {
        if (!(s > 0.0) || !std::isfinite(s)) throw ModelError("separations must be positive and finite");
        if (!mean.finite()) {
            out.emplace_back(s, inf);
            continue;
        }
        const Integral j = coupling(theta_n, theta_n, s, dep, spec);
        out.emplace_back(s, std::exp(2.0 * mean.log_value) * std::expm1(j.value));
    }
    return out;
}

}  // namespace relaychain

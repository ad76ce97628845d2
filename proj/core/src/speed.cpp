#include "relaychain/speed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "relaychain/errors.hpp"
#include "relaychain/moments.hpp"
#include "text.hpp"

namespace relaychain {

CovarianceTruncation truncation_lag(double hop_length, const SystemParams& params, double threshold,
                                    const IntegrationSpec& spec, int max_lag) {
    if (!(threshold > 0.0)) throw ModelError("covariance threshold must be positive");
    if (max_lag < 1) throw ModelError("max_lag must be >= 1");
    CovarianceTruncation out;
    out.threshold = threshold;
    for (int k = 1; k <= max_lag; ++k) {
        const double s = k * hop_length;
        const double cov = covariance_curve(hop_length, std::span<const double>(&s, 1), params, spec).front().second;
        if (k == 1) out.C = std::max(0.0, cov);
        if (cov < threshold) {
            out.K = k;
            return out;
        }
    }
    throw ConvergenceError("covariance stays above the threshold up to lag " + std::to_string(max_lag), out.C,
                           std::numeric_limits<double>::infinity());
}

double variance_upper_bound(int N, double var_link, const CovarianceTruncation& trunc) {
    if (N < 1) throw ModelError("variance bound needs N >= 1");
    return N * var_link + 2.0 * N * std::min(N - 1, trunc.K) * trunc.C;
}

double SpeedReport::variance_bound(int N) const {
    if (divergent) return std::numeric_limits<double>::infinity();
    if (params.mode() == InterferenceMode::independent || !truncation) {
        if (params.mode() == InterferenceMode::dependent)
            throw DomainError("dependent-mode variance bound needs the covariance truncation");
        return N * var_link;
    }
    return variance_upper_bound(N, var_link, *truncation);
}

double SpeedReport::chebyshev_bound(int N, double eps) const {
    if (N < 1 || !(eps > 0.0)) throw ModelError("chebyshev_bound needs N >= 1 and eps > 0");
    const double nl = N * hop_length;
    return variance_bound(N) / (nl * nl * eps * eps);
}

SpeedReport asymptotic_speed(double hop_length, const SystemParams& params, const IntegrationSpec& spec,
                             const SpeedOptions& options) {
    if (!(hop_length > 0.0) || !std::isfinite(hop_length)) throw ModelError("hop length must be positive");
    const ChainTopology hop = uniform_chain(1, hop_length);
    SpeedReport r{.hop_length = hop_length, .params = params, .truncation = std::nullopt};
    if (check_divergence(params) != Divergence::finite) {
        r.divergent = true;
        r.mean_link = std::numeric_limits<double>::infinity();
        r.var_link = std::numeric_limits<double>::infinity();
        r.mean_inverse_speed = std::numeric_limits<double>::infinity();
        r.asymptotic_speed = 0.0;
        return r;
    }
    r.mean_link = mean_link(hop, 0, params, spec).value();
    r.var_link = variance_link(hop, 0, params, spec);
    r.mean_inverse_speed = r.mean_link / hop_length;
    r.asymptotic_speed = hop_length / r.mean_link;
    if (options.with_truncation && params.mode() == InterferenceMode::dependent)
        r.truncation = truncation_lag(hop_length, params, options.threshold, spec, options.max_lag);
    return r;
}

std::string speed_csv_row(const SpeedReport& r) {
    using detail::format_double;
    std::string row = format_double(r.hop_length);
    for (double x : {r.params.aloha(), r.params.density(), r.params.threshold(), r.params.path_loss().alpha()})
        row += ',' + format_double(x);
    row += ',';
    row += to_string(r.params.mode());
    return row + ',' + format_double(r.asymptotic_speed);
}

void write_speed_csv(std::ostream& out, std::span<const SpeedReport> reports) {
    out << "L,p,lambda,theta,alpha,mode,speed\n";
    for (const SpeedReport& r : reports) out << speed_csv_row(r) << '\n';
}

}  // namespace relaychain

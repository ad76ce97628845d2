#include "relaychain/pgfl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relaychain/errors.hpp"

namespace relaychain {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

IntegrationSpec with_kinks(const IntegrationSpec& base, const PathLossModel& model) {
    IntegrationSpec s = base;
    for (double k : model.kink_radii())
        if (std::find(s.kink_radii.begin(), s.kink_radii.end(), k) == s.kink_radii.end())
            s.kink_radii.push_back(k);
    return s;
}

long double path_loss_ld(const PathLossModel& model, long double r) {
    if (model.is_bounded() && r <= 1.0L) return 1.0L;
    return std::pow(r, -static_cast<long double>(model.alpha()));
}

}  // namespace

LinkFactor::LinkFactor(Point receiver, double link_threshold, double aloha, PathLossModel path_loss)
    : rx_(receiver), theta_(link_threshold), p_(aloha), model_(path_loss) {
    if (!(link_threshold > 0.0) || !std::isfinite(link_threshold))
        throw ModelError("link threshold must be finite and > 0");
    if (!(aloha >= 0.0 && aloha <= 1.0)) throw ModelError("ALOHA probability must lie in [0, 1]");
}

double LinkFactor::deficit(double r) const noexcept {
    const double t = theta_ * model_.at_distance_unchecked(r);
    if (std::isinf(t)) return p_;
    return p_ * (t / (1.0 + t));
}

long double LinkFactor::deficit(long double r) const noexcept {
    const long double t = static_cast<long double>(theta_) * path_loss_ld(model_, r);
    if (std::isinf(t)) return p_;
    return static_cast<long double>(p_) * (t / (1.0L + t));
}

double LinkFactor::one_minus_power(double r, double k) const noexcept {
    const double q = deficit(r);
    if (q == 0.0) return 0.0;
    return -std::expm1(k * std::log1p(-q));
}

long double LinkFactor::one_minus_power(long double r, long double k) const noexcept {
    const long double q = deficit(r);
    if (q == 0.0L) return 0.0L;
    return -std::expm1(k * std::log1p(-q));
}

double LinkFactor::min_value() const noexcept {
    if (model_.is_bounded()) return 1.0 - p_ + p_ / (1.0 + theta_);
    return 1.0 - p_;
}

bool LinkFactor::diverges(double k) const noexcept {
    return k < 0.0 && !model_.is_bounded() && p_ == 1.0;
}

LinkFactor link_factor(const ChainTopology& topology, const SystemParams& params, std::size_t n) {
    const Link& l = topology.link(n);
    return LinkFactor(l.rx, params.threshold() / params.path_loss()(l.tx, l.rx), params.aloha(),
                      params.path_loss());
}

// Tail envelopes. Beyond unit distance g = r^-alpha under both laws and the
// deficit q = 1 - phi obeys q <= p theta g. Then for r >= R:
//   k >= 1:     1 - phi^k <= k q                      (Bernoulli)
//   0 < k < 1:  1 - phi^k <= q
//   k < 0:      phi^k - 1 <= |k| q phi(R)^(k-1)       (mean value theorem, phi increasing in r)
//   squared:    (1 - 1/phi)^2 = (q / phi)^2 <= (p theta / phi(R))^2 g^2

IntegralResult power_integral(const LinkFactor& f, double k, const IntegrationSpec& spec) {
    if (f.diverges(k)) return {-inf, 0.0, 0.0, 0.0, 0};
    const double alpha = f.path_loss().alpha();
    const double pt = f.aloha() * f.threshold();
    TailEnvelope tail;
    if (k >= 0.0)
        tail = [=](double R) { return power_tail(std::max(k, 1.0) * pt, alpha, 0.0, R); };
    else
        tail = [=](double R) {
            return power_tail(-k * pt * std::pow(f.at_distance(R), k - 1.0), alpha, 0.0, R);
        };
    return integrate_radial([&](double r) { return f.one_minus_power(r, k); }, tail,
                            with_kinks(spec, f.path_loss()));
}

ExtendedIntegralResult power_integral_extended(const LinkFactor& f, long double k,
                                               const IntegrationSpec& spec) {
    if (f.diverges(static_cast<double>(k))) return {-std::numeric_limits<long double>::infinity(), 0.0L, 0.0, 0.0, 0};
    const double alpha = f.path_loss().alpha();
    const double pt = f.aloha() * f.threshold();
    const double kd = static_cast<double>(k);
    TailEnvelope tail;
    if (k >= 0.0L)
        tail = [=](double R) { return power_tail(std::max(kd, 1.0) * pt, alpha, 0.0, R); };
    else
        tail = [=](double R) {
            return power_tail(-kd * pt * std::pow(f.at_distance(R), kd - 1.0), alpha, 0.0, R);
        };
    return integrate_radial_extended([&](long double r) { return f.one_minus_power(r, k); }, tail,
                                     with_kinks(spec, f.path_loss()));
}

IntegralResult squared_deficit_integral(const LinkFactor& f, const IntegrationSpec& spec) {
    if (f.diverges(-1.0)) return {inf, 0.0, 0.0, 0.0, 0};
    const double alpha = f.path_loss().alpha();
    const double pt = f.aloha() * f.threshold();
    auto tail = [=](double R) {
        const double c = pt / f.at_distance(R);
        return power_tail(c * c, 2.0 * alpha, 0.0, R);
    };
    auto integrand = [&](double r) {
        const double q = f.deficit(r);
        const double u = q / (1.0 - q);
        return u * u;
    };
    return integrate_radial(integrand, tail, with_kinks(spec, f.path_loss()));
}

IntegralResult coupling_integral(const LinkFactor& m, const LinkFactor& n, const IntegrationSpec& spec) {
    if (!(m.path_loss() == n.path_loss()) || m.aloha() != n.aloha())
        throw ModelError("coupled links must share the path-loss law and ALOHA probability");
    if (m.diverges(-1.0)) return {inf, 0.0, 0.0, 0.0, 0};

    IntegrationSpec s = with_kinks(spec, m.path_loss());
    s.centers = {m.receiver(), n.receiver()};
    const double d = distance(m.receiver(), n.receiver()) / 2.0;
    const double alpha = m.path_loss().alpha();
    auto tail = [&, d, alpha](double R) {
        if (R - d < 1.0) return inf;
        const double cm = m.aloha() * m.threshold() / m.at_distance(R - d);
        const double cn = n.aloha() * n.threshold() / n.at_distance(R - d);
        return power_tail(cm * cn, 2.0 * alpha, d, R);
    };
    auto integrand = [&](Point x) {
        const double qm = m.deficit(distance(x, m.receiver()));
        const double qn = n.deficit(distance(x, n.receiver()));
        return (qm / (1.0 - qm)) * (qn / (1.0 - qn));
    };
    return integrate_plane(integrand, tail, s);
}

ExtendedIntegralResult joint_residual_integral(std::span<const LinkFactor> factors,
                                               std::span<const int> exponents,
                                               const IntegrationSpec& spec) {
    if (factors.size() != exponents.size())
        throw ModelError("one exponent per link factor is required");
    for (int e : exponents)
        if (e < 0) throw ModelError("joint exponents must be non-negative");

    // Links with exponent 0 contribute a factor of 1 and drop out.
    std::vector<const LinkFactor*> active;
    std::vector<long double> powers;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (exponents[i] == 0) continue;
        active.push_back(&factors[i]);
        powers.push_back(exponents[i]);
    }
    if (active.size() < 2) return {};
    for (const LinkFactor* f : active)
        if (!(f->path_loss() == active.front()->path_loss()) || f->aloha() != active.front()->aloha())
            throw ModelError("joint factors must share the path-loss law and ALOHA probability");

    IntegrationSpec s = with_kinks(spec, active.front()->path_loss());
    s.centers.clear();
    Point centroid{0.0, 0.0};
    for (const LinkFactor* f : active) {
        s.centers.push_back(f->receiver());
        centroid = centroid + f->receiver();
    }
    centroid = (1.0 / static_cast<double>(active.size())) * centroid;
    double d = 0.0;
    for (const LinkFactor* f : active) d = std::max(d, distance(f->receiver(), centroid));

    // Bonferroni: sum a_n - (1 - prod(1 - a_n)) <= sum_{m<n} a_m a_n, with
    // a_n = 1 - phi_n^{e_n} <= e_n p theta_n g_n.
    const double p = active.front()->aloha();
    const double alpha = active.front()->path_loss().alpha();
    double K = 0.0;
    for (std::size_t i = 0; i < active.size(); ++i)
        for (std::size_t j = i + 1; j < active.size(); ++j)
            K += static_cast<double>(powers[i] * powers[j]) * p * p * active[i]->threshold() *
                 active[j]->threshold();
    auto tail = [=](double R) { return power_tail(K, 2.0 * alpha, d, R); };

    std::vector<long double> elem(active.size() + 1);
    auto integrand = [&](long double x, long double y) {
        std::fill(elem.begin(), elem.end(), 0.0L);
        elem[0] = 1.0L;
        for (std::size_t i = 0; i < active.size(); ++i) {
            const Point rx = active[i]->receiver();
            const long double r = std::hypot(x - rx.x, y - rx.y);
            const long double a = active[i]->one_minus_power(r, powers[i]);
            for (std::size_t k = i + 1; k >= 1; --k) elem[k] += elem[k - 1] * a;
        }
        // 1 - prod(1 - a) - sum a = sum_{k>=2} (-1)^(k+1) e_k(a)
        long double res = 0.0L;
        for (std::size_t k = 2; k < elem.size(); ++k) res += (k % 2 == 0 ? -elem[k] : elem[k]);
        return res;
    };
    return integrate_plane_extended(integrand, tail, s);
}

}  // namespace relaychain

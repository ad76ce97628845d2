#include "relaychain/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>

#include "relaychain/errors.hpp"
#include "relaychain/moments.hpp"
#include "relaychain/parallel.hpp"
#include "relaychain/pgfl.hpp"
#include "relaychain/quadrature.hpp"
#include "text.hpp"

namespace relaychain {

namespace {

constexpr long double ld_eps = std::numeric_limits<long double>::epsilon();

struct Piece {
    long double value = 0.0L;
    long double error = 0.0L;
};

struct Term {
    long double value;
    long double error;
};

// Signed sum in descending magnitude with Neumaier compensation. The bound
// covers the propagated term errors plus a few roundings per term.
Piece alternating_sum(std::vector<Term>& terms) {
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return std::abs(a.value) > std::abs(b.value); });
    long double s = 0.0L, c = 0.0L, err = 0.0L, mag = 0.0L;
    for (const Term& t : terms) {
        const long double x = s + t.value;
        c += std::abs(s) >= std::abs(t.value) ? (s - x) + t.value : (t.value - x) + s;
        s = x;
        err += t.error;
        mag += std::abs(t.value);
    }
    return {s + c, err + 4.0L * ld_eps * mag};
}

CertifiedProbability to_probability(Piece p) {
    const double v = std::clamp(static_cast<double>(p.value), 0.0, 1.0);
    const double err = static_cast<double>(p.error) + std::numeric_limits<double>::epsilon() * std::abs(v);
    return {v, err};
}

void check_budget(const CertifiedProbability& p, double tolerance, const std::string& what) {
    if (p.error > tolerance)
        throw PrecisionError(what + ": cancellation error bound " + detail::format_double(p.error) +
                                 " exceeds the tolerance " + detail::format_double(tolerance),
                             p.value, p.error);
}

class Binomials {
public:
    explicit Binomials(int n_max) : rows_(static_cast<std::size_t>(n_max) + 1) {
        for (int n = 0; n <= n_max; ++n) {
            auto& row = rows_[static_cast<std::size_t>(n)];
            row.assign(static_cast<std::size_t>(n) + 1, 1.0L);
            for (int k = 1; k < n; ++k)
                row[static_cast<std::size_t>(k)] =
                    rows_[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(k) - 1] +
                    rows_[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(k)];
        }
    }
    long double operator()(int n, int k) const {
        return rows_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
    }

private:
    std::vector<std::vector<long double>> rows_;
};

template <class Key, class Value>
class OnceMap {
public:
    template <class Make>
    Value get(const Key& key, Make&& make) {
        std::unique_lock lock(mutex_);
        auto it = map_.find(key);
        if (it != map_.end()) {
            auto fut = it->second;
            lock.unlock();
            return fut.get();
        }
        std::promise<Value> promise;
        map_.emplace(key, promise.get_future().share());
        lock.unlock();
        try {
            promise.set_value(make());
        } catch (...) {
            promise.set_exception(std::current_exception());
            throw;
        }
        std::lock_guard relock(mutex_);
        return map_.at(key).get();
    }
    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return map_.size();
    }

private:
    mutable std::mutex mutex_;
    std::map<Key, std::shared_future<Value>> map_;
};

bool trivial(const SystemParams& p) { return p.density() == 0.0 || p.aloha() == 0.0; }

}  // namespace

struct PmfEngine::Cache {
    OnceMap<std::pair<double, int>, Piece> radial;   // (theta_n, e) -> int (1 - phi^e)
    OnceMap<ExponentVector, Piece> residual;         // e -> joint residual integral
    // Two active links: the residual only depends on the unordered pair of
    // (theta, e) and the receiver separation.
    OnceMap<std::tuple<double, int, double, int, double>, Piece> pair_residual;
};

PmfEngine::PmfEngine(ChainTopology topology, SystemParams params, PmfOptions options)
    : topology_(std::move(topology)),
      params_(std::move(params)),
      options_(options),
      cache_(std::make_unique<Cache>()) {
    if (!(options_.mass_tolerance > 0.0)) throw ModelError("mass tolerance must be positive");
}

PmfEngine::~PmfEngine() = default;

std::size_t PmfEngine::cached_integrals() const {
    return cache_->radial.size() + cache_->residual.size() + cache_->pair_residual.size();
}

CertifiedProbability PmfEngine::joint_moment(const ExponentVector& e) {
    long double err = 0.0L;
    const long double m = extended_moment(e, err);
    return {static_cast<double>(m), static_cast<double>(err) + std::numeric_limits<double>::epsilon()};
}

long double PmfEngine::extended_moment(const ExponentVector& e, long double& m_err) {
    if (e.size() != topology_.size()) throw ModelError("exponent vector length must equal the number of links");
    for (int x : e)
        if (x < 0) throw ModelError("exponents must be non-negative");
    m_err = 0.0L;
    if (trivial(params_)) return 1.0L;

    std::vector<LinkFactor> factors;
    for (std::size_t n = 0; n < topology_.size(); ++n) factors.push_back(link_factor(topology_, params_, n));

    IntegrationSpec radial_spec;
    radial_spec.rel_tol = options_.radial_rel_tol;
    radial_spec.abs_tol = options_.radial_abs_tol;

    long double integral = 0.0L, error = 0.0L;
    int active = 0;
    for (std::size_t n = 0; n < e.size(); ++n) {
        if (e[n] == 0) continue;
        ++active;
        const LinkFactor& f = factors[n];
        const Piece r = cache_->radial.get({f.threshold(), e[n]}, [&] {
            const auto res = power_integral_extended(f, e[n], radial_spec);
            return Piece{res.value, res.error_estimate + res.tail_bound};
        });
        integral += r.value;
        error += r.error;
    }
    if (active >= 2) {
        IntegrationSpec plane_spec;
        plane_spec.rel_tol = options_.plane_rel_tol;
        plane_spec.abs_tol = options_.plane_abs_tol;
        plane_spec.max_evaluations = 400'000'000;
        auto compute = [&](std::span<const LinkFactor> fs, std::span<const int> es) {
            const auto res = joint_residual_integral(fs, es, plane_spec);
            return Piece{res.value, res.error_estimate + res.tail_bound};
        };
        Piece r;
        if (active == 2) {
            std::vector<std::pair<double, int>> pr;
            std::vector<Point> rx;
            for (std::size_t n = 0; n < e.size(); ++n)
                if (e[n] != 0) {
                    pr.emplace_back(factors[n].threshold(), e[n]);
                    rx.push_back(factors[n].receiver());
                }
            std::sort(pr.begin(), pr.end());
            const double sep = distance(rx[0], rx[1]);
            r = cache_->pair_residual.get(std::make_tuple(pr[0].first, pr[0].second, pr[1].first, pr[1].second, sep),
                                          [&] {
                                              const LinkFactor fs[2] = {
                                                  LinkFactor({-sep / 2.0, 0.0}, pr[0].first, params_.aloha(),
                                                             params_.path_loss()),
                                                  LinkFactor({sep / 2.0, 0.0}, pr[1].first, params_.aloha(),
                                                             params_.path_loss())};
                                              const int es[2] = {pr[0].second, pr[1].second};
                                              return compute(fs, es);
                                          });
        } else {
            r = cache_->residual.get(e, [&] { return compute(factors, e); });
        }
        integral += r.value;
        error += r.error;
    }
    const long double lambda = params_.density();
    const long double m = std::exp(-lambda * integral);
    const long double delta = lambda * error;
    m_err = m * std::expm1(delta) + 4.0L * ld_eps * m;
    return m;
}

CertifiedProbability PmfEngine::joint_pmf(std::span<const int> t) {
    const std::size_t N = topology_.size();
    if (t.size() != N) throw ModelError("joint_pmf needs one slot count per link");
    int t_max = 0;
    for (int x : t) {
        if (x < 1) throw ModelError("slot counts must be >= 1");
        t_max = std::max(t_max, x);
    }
    if (trivial(params_)) {
        const bool all_one = std::all_of(t.begin(), t.end(), [](int x) { return x == 1; });
        return {all_one ? 1.0 : 0.0, 0.0};
    }

    const Binomials binom(t_max);
    std::vector<Term> terms;
    ExponentVector e(N, 1);
    while (true) {
        long double coef = 1.0L;
        int flips = 0;
        for (std::size_t n = 0; n < N; ++n) {
            coef *= binom(t[n] - 1, e[n] - 1);
            flips += e[n] - 1;
        }
        if (flips % 2 == 1) coef = -coef;
        long double m_err = 0.0L;
        const long double m = extended_moment(e, m_err);
        terms.push_back({coef * m, std::abs(coef) * m_err});

        std::size_t k = 0;
        while (k < N && e[k] == t[k]) e[k++] = 1;
        if (k == N) break;
        ++e[k];
    }
    return to_probability(alternating_sum(terms));
}

CertifiedProbability PmfEngine::link_pmf(std::size_t n, int t) {
    if (n >= topology_.size()) throw ModelError("link index out of range");
    if (t < 1) throw ModelError("slot count must be >= 1");
    if (trivial(params_)) return {t == 1 ? 1.0 : 0.0, 0.0};

    const Binomials binom(t);
    std::vector<Term> terms;
    ExponentVector e(topology_.size(), 0);
    for (int k = 1; k <= t; ++k) {
        e[n] = k;
        long double m_err = 0.0L;
        const long double m = extended_moment(e, m_err);
        long double coef = binom(t - 1, k - 1);
        if ((k - 1) % 2 == 1) coef = -coef;
        terms.push_back({coef * m, std::abs(coef) * m_err});
    }
    const CertifiedProbability p = to_probability(alternating_sum(terms));
    check_budget(p, options_.mass_tolerance, "link_pmf(t=" + std::to_string(t) + ")");
    return p;
}

CertifiedProbability PmfEngine::link_survival(std::size_t n, int s) {
    if (n >= topology_.size()) throw ModelError("link index out of range");
    if (s < 0) throw ModelError("survival needs s >= 0");
    if (s == 0) return {1.0, 0.0};
    if (trivial(params_)) return {0.0, 0.0};

    const Binomials binom(s);
    std::vector<Term> terms{{1.0L, 0.0L}};
    ExponentVector e(topology_.size(), 0);
    for (int k = 1; k <= s; ++k) {
        e[n] = k;
        long double m_err = 0.0L;
        const long double m = extended_moment(e, m_err);
        long double coef = binom(s, k);
        if (k % 2 == 1) coef = -coef;
        terms.push_back({coef * m, std::abs(coef) * m_err});
    }
    return to_probability(alternating_sum(terms));
}

namespace {

// Compositions of t into n positive parts, in lexicographic order.
std::vector<std::vector<int>> compositions(int t, int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> part(static_cast<std::size_t>(n));
    auto fill = [&](auto&& self, int pos, int left) -> void {
        if (pos == n - 1) {
            part[static_cast<std::size_t>(pos)] = left;
            out.push_back(part);
            return;
        }
        for (int v = 1; v <= left - (n - 1 - pos); ++v) {
            part[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, left - v);
        }
    };
    fill(fill, 0, t);
    return out;
}

}  // namespace

double composition_count(int t, int n) {
    if (n < 1 || t < n) return 0.0;
    // C(t - 1, n - 1) via a product that stays exact for the sizes used here.
    double c = 1.0;
    const int k = std::min(n - 1, t - n);
    for (int i = 1; i <= k; ++i) c = c * (t - n + i) / i;
    return std::round(c);
}

PmfTable::PmfTable(ChainTopology topo, SystemParams prm, int first_t, int last_t)
    : mode(prm.mode()), first(first_t), t_max(last_t), topology(std::move(topo)), params(std::move(prm)) {}

double PmfTable::at(int t) const {
    if (t < first || t > t_max) return 0.0;
    return mass[static_cast<std::size_t>(t - first)];
}

double PmfTable::total_mass() const {
    long double s = 0.0L;
    for (double m : mass) s += m;
    return static_cast<double>(s);
}

double PmfTable::total_error() const {
    double s = 0.0;
    for (double e : mass_error) s += e;
    return s;
}

double PmfTable::truncated_mean() const {
    long double s = 0.0L;
    for (std::size_t i = 0; i < mass.size(); ++i) s += static_cast<long double>(first + static_cast<int>(i)) * mass[i];
    return static_cast<double>(s);
}

double PmfTable::truncated_second_moment() const {
    long double s = 0.0L;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        const long double t = first + static_cast<int>(i);
        s += t * t * mass[i];
    }
    return static_cast<double>(s);
}

void PmfTable::write_csv(std::ostream& out) const {
    out << "# tail_mass_bound = " << detail::format_double(tail_mass_bound) << '\n';
    out << "# mode = " << to_string(mode) << '\n';
    out << "t,mass\n";
    for (std::size_t i = 0; i < mass.size(); ++i)
        out << first + static_cast<int>(i) << ',' << detail::format_double(mass[i]) << '\n';
}

PmfTable PmfEngine::travel_time_pmf(int t_max) {
    const int N = static_cast<int>(topology_.size());
    if (t_max < N) throw ModelError("t_max must be at least the number of links");

    double needed = 0.0;
    for (int t = N; t <= t_max; ++t) {
        needed += composition_count(t, N);
        if (needed > static_cast<double>(options_.term_budget))
            throw BudgetError("travel-time PMF needs more than " + std::to_string(options_.term_budget) +
                              " joint terms at t = " + std::to_string(t) + ", N = " + std::to_string(N));
    }

    PmfTable table(topology_, params_.with_mode(InterferenceMode::dependent), N, t_max);
    table.mass.assign(static_cast<std::size_t>(t_max - N + 1), 0.0);
    table.mass_error.assign(table.mass.size(), 0.0);
    if (trivial(params_)) {
        table.mass[0] = 1.0;
        return table;
    }

    // Fill the memo concurrently first; the sums below then only read it.
    std::vector<ExponentVector> needed_e;
    {
        ExponentVector e(static_cast<std::size_t>(N), 1);
        while (true) {
            int total = 0;
            for (int x : e) total += x;
            if (total <= t_max) needed_e.push_back(e);
            std::size_t k = 0;
            while (k < e.size() && (e[k] == t_max - N + 1)) e[k++] = 1;
            if (k == e.size()) break;
            ++e[k];
        }
    }
    // Largest-work items first balances the pool.
    std::stable_sort(needed_e.begin(), needed_e.end(), [](const ExponentVector& a, const ExponentVector& b) {
        int sa = 0, sb = 0;
        for (int x : a) sa += x;
        for (int x : b) sb += x;
        return sa > sb;
    });
    parallel_for(needed_e.size(), options_.workers, [&](std::size_t i) { joint_moment(needed_e[i]); });
    const int s_base = t_max / N;
    parallel_for(static_cast<std::size_t>(N), options_.workers, [&](std::size_t n) {
        ExponentVector e(static_cast<std::size_t>(N), 0);
        for (int k = 1; k <= s_base + 1; ++k) {
            e[n] = k;
            joint_moment(e);
        }
    });

    for (int t = N; t <= t_max; ++t) {
        long double value = 0.0L;
        double error = 0.0;
        for (const std::vector<int>& comp : compositions(t, N)) {
            const CertifiedProbability p = joint_pmf(comp);
            value += p.value;
            error += p.error;
        }
        const std::size_t idx = static_cast<std::size_t>(t - N);
        table.mass[idx] = std::clamp(static_cast<double>(value), 0.0, 1.0);
        table.mass_error[idx] = error;
        check_budget({table.mass[idx], error}, options_.mass_tolerance,
                     "travel_time_pmf(t=" + std::to_string(t) + ")");
    }

    // P[T > t_max] <= sum_n P[T_n > s_n] whenever sum s_n = t_max.
    double union_bound = 0.0;
    for (int n = 0; n < N; ++n) {
        const int s = s_base + (n < t_max % N ? 1 : 0);
        const CertifiedProbability surv = link_survival(static_cast<std::size_t>(n), s);
        union_bound += surv.value + surv.error;
    }
    table.union_tail_bound = std::min(1.0, union_bound);
    const double complement = 1.0 - table.total_mass() + table.total_error();
    table.tail_mass_bound = std::clamp(std::min(table.union_tail_bound, complement), 0.0, 1.0);
    return table;
}

CertifiedProbability link_pmf(const ChainTopology& topology, std::size_t n, const SystemParams& params, int t,
                              const PmfOptions& options) {
    PmfEngine engine(topology, params, options);
    return engine.link_pmf(n, t);
}

CertifiedProbability joint_pmf(const ChainTopology& topology, const SystemParams& params, std::span<const int> t,
                               const PmfOptions& options) {
    PmfEngine engine(topology, params, options);
    const CertifiedProbability p = engine.joint_pmf(t);
    check_budget(p, options.mass_tolerance, "joint_pmf");
    return p;
}

PmfTable travel_time_pmf(const ChainTopology& topology, const SystemParams& params, int t_max,
                         const PmfOptions& options) {
    if (params.mode() == InterferenceMode::independent) return independent_pmf(topology, params, t_max);
    PmfEngine engine(topology, params, options);
    return engine.travel_time_pmf(t_max);
}

PmfTable independent_pmf(const ChainTopology& topology, const SystemParams& params, int t_max) {
    const int N = static_cast<int>(topology.size());
    if (t_max < N) throw ModelError("t_max must be at least the number of links");
    const SystemParams ind = params.with_mode(InterferenceMode::independent);
    PmfTable table(topology, ind, N, t_max);

    // dist[s] = P[S = s] for s = 0..t_max of the partial sum; tail = P[S > t_max].
    std::vector<double> dist(static_cast<std::size_t>(t_max) + 1, 0.0);
    dist[0] = 1.0;
    double tail = 0.0;
    std::vector<double> omega(static_cast<std::size_t>(N)), log_err(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n) {
        const LogMoment s = success_probability(topology, static_cast<std::size_t>(n), ind);
        omega[static_cast<std::size_t>(n)] = std::exp(s.log_value);
        log_err[static_cast<std::size_t>(n)] = s.log_error;
    }
    for (int n = 0; n < N; ++n) {
        const double w = omega[static_cast<std::size_t>(n)];
        const double q = -std::expm1(std::log(w));
        std::vector<double> next(dist.size(), 0.0);
        for (int t = 1; t <= t_max; ++t) {
            long double acc = 0.0L;
            for (int s = 0; s < t; ++s)
                acc += static_cast<long double>(dist[static_cast<std::size_t>(s)]) * w *
                       std::pow(static_cast<long double>(q), t - s - 1);
            next[static_cast<std::size_t>(t)] = static_cast<double>(acc);
        }
        // P[S + G > t_max] = sum_{s < t_max} P[S = s] q^(t_max - s) + P[S = t_max] + P[S > t_max]
        long double new_tail = static_cast<long double>(dist[static_cast<std::size_t>(t_max)]) + tail;
        for (int s = 0; s < t_max; ++s)
            new_tail += static_cast<long double>(dist[static_cast<std::size_t>(s)]) *
                        std::pow(static_cast<long double>(q), t_max - s);
        tail = static_cast<double>(new_tail);
        dist = std::move(next);
    }

    table.mass.assign(dist.begin() + N, dist.end());
    table.mass_error.resize(table.mass.size());
    for (std::size_t i = 0; i < table.mass.size(); ++i) {
        const int t = N + static_cast<int>(i);
        // First-order sensitivity of the mass to the success probabilities.
        double sens = 0.0;
        for (int n = 0; n < N; ++n) {
            const double w = omega[static_cast<std::size_t>(n)];
            const double q = 1.0 - w;
            sens += log_err[static_cast<std::size_t>(n)] * (1.0 + (q > 0.0 ? (t - 1) * w / q : 0.0));
        }
        table.mass_error[i] = table.mass[i] * sens + 4.0 * t * std::numeric_limits<double>::epsilon();
    }
    table.tail_mass_bound = tail;
    table.union_tail_bound = tail;
    return table;
}

}  // namespace relaychain

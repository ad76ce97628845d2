#pragma once

// Geometric and parametric model of a wireless relay chain: node positions,
// path-loss laws, per-link thresholds and the interference mode.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relaychain {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point, Point) = default;
};

inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Distance-dependent attenuation g(a, b).
///
/// Singular:  g = d^-alpha, undefined at d = 0.
/// Bounded:   g = min(1, d^-alpha), so g = 1 inside the unit disk.
///
/// Both variants coincide for d >= 1. The exponent must exceed 2 so that the
/// far-field mass of every interference integral is finite.
class PathLossModel {
public:
    enum class Kind { singular, bounded };

    static PathLossModel singular(double alpha) { return PathLossModel(Kind::singular, alpha); }
    static PathLossModel bounded(double alpha) { return PathLossModel(Kind::bounded, alpha); }

    Kind kind() const noexcept { return kind_; }
    double alpha() const noexcept { return alpha_; }
    bool is_bounded() const noexcept { return kind_ == Kind::bounded; }

    /// g at separation d. Throws DomainError for d == 0 under the singular law.
    double at_distance(double d) const;

    /// Same as at_distance but returns +inf instead of throwing at d == 0.
    /// Used inside integrands and the simulator where a coincident point has
    /// probability zero.
    double at_distance_unchecked(double d) const noexcept {
        if (kind_ == Kind::bounded && d <= 1.0) return 1.0;
        return std::pow(d, -alpha_);
    }

    double operator()(Point a, Point b) const { return at_distance(distance(a, b)); }

    /// Radii at which g has a derivative discontinuity (the unit circle for
    /// the bounded law).
    std::vector<double> kink_radii() const;

    std::string name() const;
    friend bool operator==(const PathLossModel&, const PathLossModel&) = default;

private:
    PathLossModel(Kind kind, double alpha);

    Kind kind_;
    double alpha_;
};

/// Free function form of the path-loss law.
inline double path_loss(const PathLossModel& model, Point a, Point b) { return model(a, b); }

struct Link {
    Point tx;
    Point rx;

    double length() const { return distance(tx, rx); }
};

/// Ordered chain of N >= 1 links where the receiver of hop n transmits hop n+1.
class ChainTopology {
public:
    explicit ChainTopology(std::vector<Link> links);

    std::span<const Link> links() const noexcept { return links_; }
    const Link& link(std::size_t n) const { return links_.at(n); }
    std::size_t size() const noexcept { return links_.size(); }

    /// Mean of all node positions (source, relays, destination).
    Point centroid() const noexcept { return centroid_; }
    /// Largest distance from the centroid to any node.
    double radius() const noexcept { return radius_; }

    friend bool operator==(const ChainTopology&, const ChainTopology&) = default;

private:
    std::vector<Link> links_;
    Point centroid_;
    double radius_ = 0.0;
};

/// N collinear hops of length L starting at `origin` along the unit vector
/// `direction`.
ChainTopology uniform_chain(int hops, double hop_length, Point origin = {0.0, 0.0},
                            Point direction = {1.0, 0.0});

enum class InterferenceMode {
    dependent,    ///< interferer positions frozen for the whole journey
    independent,  ///< interferer positions redrawn every slot
};

std::string_view to_string(InterferenceMode mode);
InterferenceMode parse_mode(std::string_view text);

class SystemParams {
public:
    SystemParams(double density, double aloha_p, double sir_threshold, PathLossModel path_loss,
                 InterferenceMode mode);

    double density() const noexcept { return density_; }
    double aloha() const noexcept { return aloha_; }
    double threshold() const noexcept { return threshold_; }
    const PathLossModel& path_loss() const noexcept { return path_loss_; }
    InterferenceMode mode() const noexcept { return mode_; }

    SystemParams with_mode(InterferenceMode mode) const;
    SystemParams with_density(double density) const;
    SystemParams with_aloha(double p) const;

    friend bool operator==(const SystemParams&, const SystemParams&) = default;

private:
    double density_;
    double aloha_;
    double threshold_;
    PathLossModel path_loss_;
    InterferenceMode mode_;
};

/// Effective per-link threshold theta / g(tx, rx): the SIR condition rewritten
/// against unit received signal power.
std::vector<double> link_thresholds(const ChainTopology& topology, const SystemParams& params);

}  // namespace relaychain

#include "relaychain/model.hpp"

#include <algorithm>

#include "relaychain/errors.hpp"

namespace relaychain {

PathLossModel::PathLossModel(Kind kind, double alpha) : kind_(kind), alpha_(alpha) {
    if (!(alpha > 2.0) || !std::isfinite(alpha))
        throw ModelError("path-loss exponent must be finite and > 2, got " + std::to_string(alpha));
}

double PathLossModel::at_distance(double d) const {
    if (!(d >= 0.0)) throw DomainError("path loss needs a non-negative distance");
    if (kind_ == Kind::singular && d == 0.0)
        throw DomainError("singular path loss is undefined for coincident points");
    return at_distance_unchecked(d);
}

std::vector<double> PathLossModel::kink_radii() const {
    if (kind_ == Kind::bounded) return {1.0};
    return {};
}

std::string PathLossModel::name() const {
    return kind_ == Kind::bounded ? "bounded" : "singular";
}

ChainTopology::ChainTopology(std::vector<Link> links) : links_(std::move(links)) {
    if (links_.empty()) throw ModelError("a chain needs at least one link");
    for (std::size_t n = 0; n < links_.size(); ++n) {
        const Link& l = links_[n];
        if (!std::isfinite(l.tx.x) || !std::isfinite(l.tx.y) || !std::isfinite(l.rx.x) ||
            !std::isfinite(l.rx.y))
            throw ModelError("link " + std::to_string(n + 1) + " has non-finite coordinates");
        if (l.tx == l.rx) throw ModelError("link " + std::to_string(n + 1) + " has zero length");
        if (n + 1 < links_.size() && !(l.rx == links_[n + 1].tx))
            throw ModelError("receiver of link " + std::to_string(n + 1) +
                             " must transmit link " + std::to_string(n + 2));
    }

    // Nodes: tx_1, rx_1, ..., rx_N.
    Point sum = links_.front().tx;
    for (const Link& l : links_) sum = sum + l.rx;
    const double count = static_cast<double>(links_.size() + 1);
    centroid_ = {sum.x / count, sum.y / count};
    radius_ = distance(links_.front().tx, centroid_);
    for (const Link& l : links_) radius_ = std::max(radius_, distance(l.rx, centroid_));
}

ChainTopology uniform_chain(int hops, double hop_length, Point origin, Point direction) {
    if (hops < 1) throw ModelError("uniform chain needs N >= 1 hops");
    if (!(hop_length > 0.0) || !std::isfinite(hop_length))
        throw ModelError("uniform chain needs a positive hop length");
    if (std::abs(norm(direction) - 1.0) > 1e-12)
        throw ModelError("uniform chain direction must be a unit vector");

    std::vector<Link> links;
    links.reserve(static_cast<std::size_t>(hops));
    for (int n = 0; n < hops; ++n) {
        // Positions are computed from the origin each time so that rx_n == tx_{n+1}
        // bit for bit.
        const Point tx = origin + (n * hop_length) * direction;
        const Point rx = origin + ((n + 1) * hop_length) * direction;
        links.push_back({tx, rx});
    }
    return ChainTopology(std::move(links));
}

std::string_view to_string(InterferenceMode mode) {
    return mode == InterferenceMode::dependent ? "dependent" : "independent";
}

InterferenceMode parse_mode(std::string_view text) {
    if (text == "dependent" || text == "dep") return InterferenceMode::dependent;
    if (text == "independent" || text == "ind") return InterferenceMode::independent;
    throw ModelError("unknown interference mode '" + std::string(text) + "'");
}

SystemParams::SystemParams(double density, double aloha_p, double sir_threshold,
                           PathLossModel path_loss, InterferenceMode mode)
    : density_(density),
      aloha_(aloha_p),
      threshold_(sir_threshold),
      path_loss_(path_loss),
      mode_(mode) {
    if (!(density >= 0.0) || !std::isfinite(density))
        throw ModelError("interferer density must be finite and >= 0");
    if (!(aloha_p >= 0.0 && aloha_p <= 1.0))
        throw ModelError("ALOHA probability must lie in [0, 1]");
    if (!(sir_threshold > 0.0) || !std::isfinite(sir_threshold))
        throw ModelError("SIR threshold must be finite and > 0");
}

SystemParams SystemParams::with_mode(InterferenceMode mode) const {
    return SystemParams(density_, aloha_, threshold_, path_loss_, mode);
}

SystemParams SystemParams::with_density(double density) const {
    return SystemParams(density, aloha_, threshold_, path_loss_, mode_);
}

SystemParams SystemParams::with_aloha(double p) const {
    return SystemParams(density_, p, threshold_, path_loss_, mode_);
}

std::vector<double> link_thresholds(const ChainTopology& topology, const SystemParams& params) {
    std::vector<double> out;
    out.reserve(topology.size());
    for (const Link& l : topology.links())
        out.push_back(params.threshold() / params.path_loss()(l.tx, l.rx));
    return out;
}

}  // namespace relaychain

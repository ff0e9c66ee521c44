#include "rumax/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <string>

#include "rumax/error.hpp"
#include "rumax/transport.hpp"

namespace rumax {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t value) {
    for (int byte = 0; byte < 8; ++byte) {
        h ^= (value >> (8 * byte)) & 0xffU;
        h *= kFnvPrime;
    }
}

}  // namespace

ScenarioLattice ScenarioLattice::build(int horizon, std::span<const NodeSpec> specs) {
    if (horizon < 1) {
        throw Error(ErrorCode::kInvalidSpec, "horizon must be >= 1");
    }
    if (specs.empty()) {
        throw Error(ErrorCode::kInvalidSpec, "tree has no nodes");
    }

    std::map<std::int64_t, std::size_t> by_id;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (!by_id.emplace(specs[i].id, i).second) {
            throw Error(ErrorCode::kInvalidSpec, "duplicate node id " + std::to_string(specs[i].id));
        }
        if (!(specs[i].money_market > 0.0) || !(specs[i].price > 0.0) ||
            !std::isfinite(specs[i].money_market) || !std::isfinite(specs[i].price)) {
            throw Error(ErrorCode::kNonPositivePrice,
                        "node " + std::to_string(specs[i].id) + " has non-positive m or s");
        }
    }

    std::vector<std::size_t> roots;
    std::vector<std::vector<std::size_t>> kids(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& s = specs[i];
        if (!s.parent) {
            roots.push_back(i);
            continue;
        }
        auto it = by_id.find(*s.parent);
        if (it == by_id.end()) {
            throw Error(ErrorCode::kInvalidSpec,
                        "node " + std::to_string(s.id) + " has unknown parent " + std::to_string(*s.parent));
        }
        kids[it->second].push_back(i);
    }
    if (roots.size() > 1) {
        throw Error(ErrorCode::kMultipleRoots, std::to_string(roots.size()) + " nodes without parent");
    }
    if (roots.empty()) {
        throw Error(ErrorCode::kCyclicTree, "no root: every node has a parent");
    }

    // Breadth-first renumbering; children ordered by their source id.
    for (auto& k : kids) {
        std::sort(k.begin(), k.end(), [&](std::size_t a, std::size_t b) { return specs[a].id < specs[b].id; });
    }
    ScenarioLattice lat;
    lat.horizon_ = horizon;
    std::vector<int> new_id(specs.size(), -1);
    std::deque<std::size_t> queue{roots.front()};
    if (specs[roots.front()].time != 0) {
        throw Error(ErrorCode::kTimeGap, "root must have time 0");
    }
    while (!queue.empty()) {
        const std::size_t src = queue.front();
        queue.pop_front();
        const int id = static_cast<int>(lat.nodes_.size());
        new_id[src] = id;
        Node n;
        n.id = id;
        n.time = specs[src].time;
        n.money_market = specs[src].money_market;
        n.price = specs[src].price;
        n.source_id = specs[src].id;
        if (specs[src].parent) {
            n.parent = new_id[by_id.at(*specs[src].parent)];
            const int pt = lat.nodes_[static_cast<std::size_t>(n.parent)].time;
            if (n.time != pt + 1) {
                throw Error(ErrorCode::kTimeGap, "node " + std::to_string(specs[src].id) + " has time " +
                                                     std::to_string(n.time) + " under a parent at time " +
                                                     std::to_string(pt));
            }
            lat.nodes_[static_cast<std::size_t>(n.parent)].children.push_back(id);
        }
        if (n.time > horizon) {
            throw Error(ErrorCode::kTimeGap, "node beyond the horizon");
        }
        lat.nodes_.push_back(n);
        for (std::size_t k : kids[src]) {
            queue.push_back(k);
        }
    }
    if (lat.nodes_.size() != specs.size()) {
        // Some nodes are not reachable from the root, so their parent links form a cycle.
        throw Error(ErrorCode::kCyclicTree, "nodes unreachable from the root (parent cycle)");
    }

    lat.leaf_of_node_.assign(lat.nodes_.size(), std::numeric_limits<std::size_t>::max());
    for (const auto& n : lat.nodes_) {
        if (n.children.empty()) {
            if (n.time != horizon) {
                throw Error(ErrorCode::kTimeGap,
                            "leaf " + std::to_string(n.source_id) + " ends before the horizon");
            }
            lat.leaf_of_node_[static_cast<std::size_t>(n.id)] = lat.leaves_.size();
            lat.leaves_.push_back(n.id);
        } else {
            lat.non_terminal_.push_back(n.id);
        }
    }

    const auto width = static_cast<std::size_t>(horizon + 1);
    lat.path_table_.assign(lat.leaves_.size() * width, 0);
    lat.leaves_under_.assign(lat.nodes_.size(), {});
    for (std::size_t l = 0; l < lat.leaves_.size(); ++l) {
        int cur = lat.leaves_[l];
        for (int t = horizon; t >= 0; --t) {
            lat.path_table_[l * width + static_cast<std::size_t>(t)] = cur;
            lat.leaves_under_[static_cast<std::size_t>(cur)].push_back(l);
            cur = lat.nodes_[static_cast<std::size_t>(cur)].parent;
        }
    }

    std::uint64_t h = kFnvOffset;
    fnv_mix(h, static_cast<std::uint64_t>(horizon));
    for (const auto& n : lat.nodes_) {
        fnv_mix(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(n.parent)));
        fnv_mix(h, static_cast<std::uint64_t>(n.time));
        fnv_mix(h, std::bit_cast<std::uint64_t>(n.money_market));
        fnv_mix(h, std::bit_cast<std::uint64_t>(n.price));
    }
    lat.fingerprint_ = h;
    return lat;
}

std::span<const int> ScenarioLattice::path_nodes(std::size_t leaf) const {
    if (leaf >= leaves_.size()) {
        throw Error(ErrorCode::kUnknownLeaf, "leaf " + std::to_string(leaf));
    }
    const auto width = static_cast<std::size_t>(horizon_ + 1);
    return std::span<const int>(path_table_).subspan(leaf * width, width);
}

Path ScenarioLattice::path(std::size_t leaf) const {
    Path out;
    for (int id : path_nodes(leaf)) {
        const auto& n = nodes_[static_cast<std::size_t>(id)];
        out.push_back({n.money_market, n.price});
    }
    return out;
}

double ScenarioLattice::price_increment(std::size_t leaf, int t) const {
    auto p = path_nodes(leaf);
    return nodes_[static_cast<std::size_t>(p[static_cast<std::size_t>(t)])].price -
           nodes_[static_cast<std::size_t>(p[static_cast<std::size_t>(t - 1)])].price;
}

std::span<const std::size_t> ScenarioLattice::leaves_under(int id) const {
    return leaves_under_.at(static_cast<std::size_t>(id));
}

std::size_t ScenarioLattice::leaf_index(int node_id) const {
    if (node_id < 0 || static_cast<std::size_t>(node_id) >= leaf_of_node_.size() ||
        leaf_of_node_[static_cast<std::size_t>(node_id)] == std::numeric_limits<std::size_t>::max()) {
        throw Error(ErrorCode::kUnknownLeaf, "node " + std::to_string(node_id) + " is not a leaf");
    }
    return leaf_of_node_[static_cast<std::size_t>(node_id)];
}

std::vector<NodeSpec> ScenarioLattice::to_specs() const {
    std::vector<NodeSpec> out;
    out.reserve(nodes_.size());
    for (const auto& n : nodes_) {
        NodeSpec s;
        s.id = n.id;
        if (n.parent >= 0) {
            s.parent = n.parent;
        }
        s.time = n.time;
        s.money_market = n.money_market;
        s.price = n.price;
        out.push_back(s);
    }
    return out;
}

Measure::Measure(const ScenarioLattice& lattice, std::vector<double> weights)
    : weights_(std::move(weights)), lattice_id_(lattice.fingerprint()) {
    if (weights_.size() != lattice.num_leaves()) {
        throw Error(ErrorCode::kLatticeMismatch, "measure has " + std::to_string(weights_.size()) +
                                                     " weights for " + std::to_string(lattice.num_leaves()) +
                                                     " leaves");
    }
    double sum = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw Error(ErrorCode::kInvalidMeasure, "negative or non-finite weight");
        }
        sum += w;
    }
    const double tol = 1e-12 * std::max<double>(1.0, static_cast<double>(weights_.size()) / 8.0);
    if (std::abs(sum - 1.0) > tol) {
        throw Error(ErrorCode::kInvalidMeasure, "weights sum to " + std::to_string(sum));
    }
}

Measure Measure::uniform(const ScenarioLattice& lattice) {
    const auto n = lattice.num_leaves();
    return Measure(lattice, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Measure Measure::dirac(const ScenarioLattice& lattice, std::size_t leaf) {
    if (leaf >= lattice.num_leaves()) {
        throw Error(ErrorCode::kUnknownLeaf, "leaf " + std::to_string(leaf));
    }
    std::vector<double> w(lattice.num_leaves(), 0.0);
    w[leaf] = 1.0;
    return Measure(lattice, std::move(w));
}

std::vector<std::size_t> Measure::support() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (weights_[i] > 0.0) {
            out.push_back(i);
        }
    }
    return out;
}

Claim::Claim(const ScenarioLattice& lattice, std::vector<double> values)
    : values_(std::move(values)), lattice_id_(lattice.fingerprint()) {
    if (values_.size() != lattice.num_leaves()) {
        throw Error(ErrorCode::kLatticeMismatch, "claim size does not match leaf count");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::kInvalidSpec, "claim values must be finite");
        }
    }
}

Claim Claim::constant(const ScenarioLattice& lattice, double value) {
    return Claim(lattice, std::vector<double>(lattice.num_leaves(), value));
}

double wealth(const ScenarioLattice& lattice, const Strategy& strategy, std::size_t leaf) {
    if (leaf >= lattice.num_leaves()) {
        throw Error(ErrorCode::kUnknownLeaf, "leaf " + std::to_string(leaf));
    }
    auto path = lattice.path_nodes(leaf);
    double total = 0.0;
    for (int t = 1; t <= lattice.horizon(); ++t) {
        const int prev = path[static_cast<std::size_t>(t - 1)];
        if (static_cast<std::size_t>(prev) >= strategy.holdings.size() ||
            std::isnan(strategy.holdings[static_cast<std::size_t>(prev)])) {
            throw Error(ErrorCode::kMissingHolding, "no holding at node " + std::to_string(prev));
        }
        total += strategy.holdings[static_cast<std::size_t>(prev)] * lattice.price_increment(leaf, t);
    }
    return total;
}

std::vector<double> wealth_vector(const ScenarioLattice& lattice, const Strategy& strategy) {
    std::vector<double> out(lattice.num_leaves());
    for (std::size_t l = 0; l < out.size(); ++l) {
        out[l] = wealth(lattice, strategy, l);
    }
    return out;
}

double expectation(const Measure& measure, const Claim& claim) {
    if (measure.lattice_id() != claim.lattice_id()) {
        throw Error(ErrorCode::kLatticeMismatch, "measure and claim live on different lattices");
    }
    return expectation(measure, claim.values());
}

double expectation(const Measure& measure, std::span<const double> values) {
    if (values.size() != measure.size()) {
        throw Error(ErrorCode::kLatticeMismatch, "size mismatch in expectation");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (measure[i] > 0.0) {
            total += measure[i] * values[i];
        }
    }
    return total;
}

Claim z_weight(const ScenarioLattice& lattice, ZWeightKind kind, const MetricParams* metric) {
    const int horizon = lattice.horizon();
    std::vector<double> z(lattice.num_leaves());
    Path anchor;
    if (kind == ZWeightKind::kTransportAnchored) {
        if (metric == nullptr) {
            throw Error(ErrorCode::kInvalidMetricParams, "transport-anchored Z needs metric parameters");
        }
        metric->validate();
        anchor = metric->anchor.empty() ? default_anchor(lattice) : metric->anchor;
        if (anchor.size() != static_cast<std::size_t>(horizon + 1)) {
            throw Error(ErrorCode::kInvalidMetricParams, "anchor length does not match the horizon");
        }
    }
    for (std::size_t l = 0; l < z.size(); ++l) {
        const Path p = lattice.path(l);
        double abs_sum = 0.0;
        for (const auto& pt : p) {
            abs_sum += std::abs(pt.price);
        }
        if (kind == ZWeightKind::kSumPriceInverse) {
            double s = 0.0;
            for (const auto& pt : p) {
                s += std::max(pt.price, 1.0 / pt.price);
            }
            z[l] = s;
        } else {
            const double t = static_cast<double>(horizon);
            z[l] = anchor.front().price + t +
                   std::exp(metric->rho * t) * std::pow(t, 1.0 - 1.0 / metric->kappa) *
                       path_distance(*metric, p, anchor);
        }
        const double floor = std::max(1.0, abs_sum);
        if (z[l] < floor * (1.0 - 1e-12)) {
            throw Error(ErrorCode::kInvalidMetricParams,
                        "Z(" + std::to_string(l) + ") = " + std::to_string(z[l]) + " below 1 v sum|S_t|");
        }
    }
    return Claim(lattice, std::move(z));
}

}  // namespace rumax

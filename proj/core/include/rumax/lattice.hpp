#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rumax {

/// One record of a tree description as it appears in a problem file.
/// Ids are arbitrary; the lattice renumbers nodes breadth-first.
struct NodeSpec {
    std::int64_t id = 0;
    std::optional<std::int64_t> parent;
    int time = 0;
    double money_market = 1.0;
    double price = 1.0;
};

struct Node {
    int id = 0;
    int parent = -1;  // -1 at the root
    int time = 0;
    double money_market = 1.0;
    double price = 1.0;
    std::vector<int> children;
    std::int64_t source_id = 0;
};

/// One coordinate (M_t, S_t) of a scenario path.
struct PathPoint {
    double money_market = 1.0;
    double price = 1.0;
};

using Path = std::vector<PathPoint>;

/// Finite event tree. Every root-to-leaf path is one scenario; leaves are
/// indexed 0..num_leaves()-1 in canonical (breadth-first) order and every
/// per-scenario vector in the library uses that order.
///
/// Immutable after construction.
class ScenarioLattice {
public:
    /// Validates and builds the tree. Throws Error with kCyclicTree,
    /// kMultipleRoots, kNonPositivePrice, kTimeGap or kInvalidSpec.
    static ScenarioLattice build(int horizon, std::span<const NodeSpec> nodes);

    [[nodiscard]] int horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t num_nodes() const noexcept { return nodes_.size(); }
    [[nodiscard]] std::size_t num_leaves() const noexcept { return leaves_.size(); }
    [[nodiscard]] const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    [[nodiscard]] std::span<const Node> nodes() const noexcept { return nodes_; }

    /// Node id of each leaf, canonical order.
    [[nodiscard]] std::span<const int> leaves() const noexcept { return leaves_; }
    /// Node ids with time < horizon, in id order.
    [[nodiscard]] std::span<const int> non_terminal_nodes() const noexcept { return non_terminal_; }
    /// Node ids along the path to `leaf`, index t = 0..T.
    [[nodiscard]] std::span<const int> path_nodes(std::size_t leaf) const;
    [[nodiscard]] Path path(std::size_t leaf) const;

    /// S_t - S_{t-1} along the path to `leaf`, t = 1..T.
    [[nodiscard]] double price_increment(std::size_t leaf, int t) const;

    /// Leaf indices whose path passes through node `id`.
    [[nodiscard]] std::span<const std::size_t> leaves_under(int id) const;

    /// Canonical leaf index of a leaf node id.
    [[nodiscard]] std::size_t leaf_index(int node_id) const;

    /// FNV-1a hash over the canonical node table; identifies the lattice in
    /// measures, claims and problem files.
    [[nodiscard]] std::uint64_t fingerprint() const noexcept { return fingerprint_; }

    /// The tree as node records with canonical ids.
    [[nodiscard]] std::vector<NodeSpec> to_specs() const;

private:
    int horizon_ = 0;
    std::vector<Node> nodes_;
    std::vector<int> leaves_;
    std::vector<int> non_terminal_;
    std::vector<int> path_table_;  // num_leaves x (T+1)
    std::vector<std::vector<std::size_t>> leaves_under_;
    std::vector<std::size_t> leaf_of_node_;
    std::uint64_t fingerprint_ = 0;
};

/// Probability weights over the leaves of one lattice.
class Measure {
public:
    Measure() = default;
    /// Throws kInvalidMeasure unless weights are >= 0 and sum to one within 1e-12
    /// (sum tolerance scales with the number of leaves).
    Measure(const ScenarioLattice& lattice, std::vector<double> weights);

    static Measure uniform(const ScenarioLattice& lattice);
    static Measure dirac(const ScenarioLattice& lattice, std::size_t leaf);

    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
    [[nodiscard]] double operator[](std::size_t leaf) const { return weights_[leaf]; }
    [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
    [[nodiscard]] std::uint64_t lattice_id() const noexcept { return lattice_id_; }

    /// Leaves with strictly positive weight.
    [[nodiscard]] std::vector<std::size_t> support() const;

private:
    std::vector<double> weights_;
    std::uint64_t lattice_id_ = 0;
};

/// Payoff per leaf, in units of the terminal money market.
class Claim {
public:
    Claim() = default;
    Claim(const ScenarioLattice& lattice, std::vector<double> values);
    static Claim constant(const ScenarioLattice& lattice, double value);

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t leaf) const { return values_[leaf]; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::uint64_t lattice_id() const noexcept { return lattice_id_; }

private:
    std::vector<double> values_;
    std::uint64_t lattice_id_ = 0;
};

/// Asset holdings indexed by node id. The holding stored at a node of time
/// t-1 is theta_t on every scenario through that node, which is exactly the
/// predictability constraint. Entries at terminal nodes are ignored.
struct Strategy {
    std::vector<double> holdings;

    static Strategy zero(const ScenarioLattice& lattice) {
        return Strategy{std::vector<double>(lattice.num_nodes(), 0.0)};
    }
};

/// sum_t theta_t (S_t - S_{t-1}) along the path to `leaf`.
/// Throws kUnknownLeaf or kMissingHolding.
[[nodiscard]] double wealth(const ScenarioLattice& lattice, const Strategy& strategy, std::size_t leaf);

/// Gains of `strategy` on every leaf.
[[nodiscard]] std::vector<double> wealth_vector(const ScenarioLattice& lattice, const Strategy& strategy);

/// Throws kLatticeMismatch when the two objects live on different lattices.
[[nodiscard]] double expectation(const Measure& measure, const Claim& claim);
[[nodiscard]] double expectation(const Measure& measure, std::span<const double> values);

enum class ZWeightKind { kSumPriceInverse, kTransportAnchored };

struct MetricParams;

/// The weight function Z per leaf. The transport-anchored variant needs the
/// metric parameters; kInvalidMetricParams is thrown when they are missing,
/// invalid, or yield Z < 1 v sum_t |S_t| somewhere.
[[nodiscard]] Claim z_weight(const ScenarioLattice& lattice, ZWeightKind kind,
                             const MetricParams* metric = nullptr);

}  // namespace rumax

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "rumax/lattice.hpp"

namespace rumax::fixture {

inline ScenarioLattice binomial(double s0 = 1.0, double up = 2.0, double down = 0.5) {
    const std::vector<NodeSpec> specs{
        {0, std::nullopt, 0, 1.0, s0}, {1, 0, 1, 1.0, up}, {2, 0, 1, 1.0, down}};
    return ScenarioLattice::build(1, specs);
}

/// One-period lattice with the given child prices.
inline ScenarioLattice one_period(double s0, const std::vector<double>& children) {
    std::vector<NodeSpec> specs{{0, std::nullopt, 0, 1.0, s0}};
    for (std::size_t k = 0; k < children.size(); ++k) {
        specs.push_back({static_cast<std::int64_t>(k + 1), 0, 1, 1.0, children[k]});
    }
    return ScenarioLattice::build(1, specs);
}

/// Random tree with 1..max_branching children per node. Log-moves are drawn
/// from [-spread, spread]; nothing forces them to straddle zero, so the tree
/// itself may admit arbitrage.
inline ScenarioLattice random_lattice(std::mt19937_64& rng, int horizon, int max_branching, double spread = 0.4) {
    std::uniform_int_distribution<int> nb(1, max_branching);
    std::uniform_real_distribution<double> mv(-spread, spread);
    std::vector<NodeSpec> specs{{0, std::nullopt, 0, 1.0, 1.0}};
    std::vector<std::pair<std::int64_t, double>> level{{0, 1.0}};
    std::int64_t next = 1;
    for (int t = 1; t <= horizon; ++t) {
        std::vector<std::pair<std::int64_t, double>> nxt;
        for (const auto& [id, s] : level) {
            const int b = nb(rng);
            for (int k = 0; k < b; ++k) {
                const double price = s * std::exp(mv(rng));
                specs.push_back({next, id, t, 1.0, price});
                nxt.emplace_back(next++, price);
            }
        }
        level = std::move(nxt);
    }
    return ScenarioLattice::build(horizon, specs);
}

/// Dirichlet(1) weights, with each leaf zeroed with probability `holes`
/// (at least one leaf is kept).
inline Measure random_measure(std::mt19937_64& rng, const ScenarioLattice& lattice, double holes = 0.0) {
    std::exponential_distribution<double> ex(1.0);
    std::bernoulli_distribution drop(holes);
    std::vector<double> w(lattice.num_leaves());
    double total = 0.0;
    for (auto& x : w) {
        x = drop(rng) ? 0.0 : ex(rng);
        total += x;
    }
    if (total == 0.0) {
        w[0] = 1.0;
        total = 1.0;
    }
    for (auto& x : w) {
        x /= total;
    }
    return Measure(lattice, std::move(w));
}

}  // namespace rumax::fixture

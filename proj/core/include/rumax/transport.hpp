#pragma once

#include <cstddef>
#include <vector>

#include "rumax/lattice.hpp"

namespace rumax {

/// Parameters of the discounted path metric
///   d(w, w') = ( sum_{t=1}^T e^{-rho kappa t} (|m_t - m'_t|^kappa + |phi(s_t) - phi(s'_t)|^kappa) )^{1/kappa}
/// and of the Wasserstein order p.
struct MetricParams {
    double rho = 0.0;
    double kappa = 1.0;
    double p = 2.0;
    /// Anchor path w* = ((a_0, s_0), (a_1, 1), ..., (a_T, 1)). Empty means
    /// "derive from the lattice" (see default_anchor).
    Path anchor;

    /// Throws kInvalidMetricParams unless rho >= 0, kappa >= 1, p > 1.
    void validate() const;
};

/// x - 1 for x > 1, log x for x <= 1. Throws kNonPositiveInput for x <= 0.
[[nodiscard]] double phi(double x);

/// Throws kHorizonMismatch when the paths differ in length.
[[nodiscard]] double path_distance(const MetricParams& params, const Path& a, const Path& b);

/// ((m_root, s_root), (m_t, 1), ...) with m_t taken from the first node at time t.
[[nodiscard]] Path default_anchor(const ScenarioLattice& lattice);

/// Dense leaf-by-leaf table of d and d^p for one (lattice, params) pair.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(const ScenarioLattice& lattice, const MetricParams& params);

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] double distance(std::size_t i, std::size_t j) const { return distance_[i * n_ + j]; }
    [[nodiscard]] double cost(std::size_t i, std::size_t j) const { return cost_[i * n_ + j]; }
    [[nodiscard]] double order() const noexcept { return p_; }

private:
    std::size_t n_ = 0;
    double p_ = 2.0;
    std::vector<double> distance_;
    std::vector<double> cost_;  // d^p
};

/// Joint weights over leaf pairs, row-major (first measure = rows).
struct TransportPlan {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> weights;

    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return weights[i * cols + j]; }
};

struct WassersteinResult {
    double distance = 0.0;  // W_p
    double cost = 0.0;      // W_p^p = min_pi sum d^p pi
    TransportPlan plan;
    /// Kantorovich potentials with f_i + g_j <= d_ij^p.
    std::vector<double> potential_first;
    std::vector<double> potential_second;
    /// sum_i P_i f_i + sum_j P*_j g_j; equals `cost` at optimality.
    double dual_value = 0.0;
};

/// Exact p-Wasserstein distance by linear programming over transport plans.
/// Throws kLatticeMismatch or kLpFailure.
[[nodiscard]] WassersteinResult wasserstein_p(const CostMatrix& costs, const Measure& first,
                                              const Measure& second);
[[nodiscard]] WassersteinResult wasserstein_p(const ScenarioLattice& lattice, const MetricParams& params,
                                              const Measure& first, const Measure& second);

}  // namespace rumax

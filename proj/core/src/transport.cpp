#include "rumax/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rumax/error.hpp"
#include "rumax/lp.hpp"

namespace rumax {

void MetricParams::validate() const {
    if (!(rho >= 0.0) || !std::isfinite(rho)) {
        throw Error(ErrorCode::kInvalidMetricParams, "rho must be >= 0");
    }
    if (!(kappa >= 1.0) || !std::isfinite(kappa)) {
        throw Error(ErrorCode::kInvalidMetricParams, "kappa must be >= 1");
    }
    if (!(p > 1.0) || !std::isfinite(p)) {
        throw Error(ErrorCode::kInvalidMetricParams, "p must be > 1");
    }
}

double phi(double x) {
    if (!(x > 0.0)) {
        throw Error(ErrorCode::kNonPositiveInput, "phi needs x > 0, got " + std::to_string(x));
    }
    return x > 1.0 ? x - 1.0 : std::log(x);
}

double path_distance(const MetricParams& params, const Path& a, const Path& b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::kHorizonMismatch, "paths of different horizon");
    }
    double total = 0.0;
    for (std::size_t t = 1; t < a.size(); ++t) {
        const double w = std::exp(-params.rho * params.kappa * static_cast<double>(t));
        const double dm = std::abs(a[t].money_market - b[t].money_market);
        const double ds = std::abs(phi(a[t].price) - phi(b[t].price));
        total += w * (std::pow(dm, params.kappa) + std::pow(ds, params.kappa));
    }
    return std::pow(total, 1.0 / params.kappa);
}

Path default_anchor(const ScenarioLattice& lattice) {
    Path anchor(static_cast<std::size_t>(lattice.horizon() + 1));
    const auto& root = lattice.node(0);
    anchor[0] = {root.money_market, root.price};
    for (int t = 1; t <= lattice.horizon(); ++t) {
        for (const auto& n : lattice.nodes()) {
            if (n.time == t) {
                anchor[static_cast<std::size_t>(t)] = {n.money_market, 1.0};
                break;
            }
        }
    }
    return anchor;
}

CostMatrix::CostMatrix(const ScenarioLattice& lattice, const MetricParams& params)
    : n_(lattice.num_leaves()), p_(params.p) {
    params.validate();
    std::vector<Path> paths;
    paths.reserve(n_);
    for (std::size_t l = 0; l < n_; ++l) {
        paths.push_back(lattice.path(l));
    }
    distance_.assign(n_ * n_, 0.0);
    cost_.assign(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double d = path_distance(params, paths[i], paths[j]);
            distance_[i * n_ + j] = distance_[j * n_ + i] = d;
            cost_[i * n_ + j] = cost_[j * n_ + i] = std::pow(d, p_);
        }
    }
}

WassersteinResult wasserstein_p(const CostMatrix& costs, const Measure& first, const Measure& second) {
    const std::size_t n = costs.size();
    if (first.size() != n || second.size() != n) {
        throw Error(ErrorCode::kLatticeMismatch, "measures do not match the cost matrix");
    }
    if (first.lattice_id() != second.lattice_id()) {
        throw Error(ErrorCode::kLatticeMismatch, "measures live on different lattices");
    }
    // Identical measures: the diagonal plan costs exactly zero and f = g = 0 certifies it.
    if (std::equal(first.weights().begin(), first.weights().end(), second.weights().begin())) {
        WassersteinResult out;
        out.plan.rows = n;
        out.plan.cols = n;
        out.plan.weights.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            out.plan.weights[i * n + i] = first[i];
        }
        out.potential_first.assign(n, 0.0);
        out.potential_second.assign(n, 0.0);
        return out;
    }
    const auto rows = first.support();
    const auto cols = second.support();

    lp::Model model;
    std::vector<int> row_con(rows.size());
    std::vector<int> col_con(cols.size());
    for (std::size_t a = 0; a < rows.size(); ++a) {
        row_con[a] = model.add_row(lp::RowSense::kEqual, first[rows[a]]);
    }
    for (std::size_t b = 0; b < cols.size(); ++b) {
        col_con[b] = model.add_row(lp::RowSense::kEqual, second[cols[b]]);
    }
    std::vector<int> var(rows.size() * cols.size());
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < cols.size(); ++b) {
            const int v = model.add_variable(costs.cost(rows[a], cols[b]));
            model.add_coefficient(row_con[a], v, 1.0);
            model.add_coefficient(col_con[b], v, 1.0);
            var[a * cols.size() + b] = v;
        }
    }
    const lp::Solution sol = lp::solve(model);
    if (!sol.optimal()) {
        throw Error(ErrorCode::kLpFailure, "transport LP did not reach optimality");
    }

    WassersteinResult out;
    out.plan.rows = n;
    out.plan.cols = n;
    out.plan.weights.assign(n * n, 0.0);
    double cost = 0.0;
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < cols.size(); ++b) {
            const double w = std::max(0.0, sol.x[static_cast<std::size_t>(var[a * cols.size() + b])]);
            out.plan.weights[rows[a] * n + cols[b]] = w;
            cost += w * costs.cost(rows[a], cols[b]);
        }
    }
    out.cost = cost;
    out.distance = std::pow(std::max(0.0, cost), 1.0 / costs.order());

    out.potential_first.assign(n, 0.0);
    out.potential_second.assign(n, 0.0);
    for (std::size_t b = 0; b < cols.size(); ++b) {
        out.potential_second[cols[b]] = sol.row_duals[static_cast<std::size_t>(col_con[b])];
    }
    for (std::size_t a = 0; a < rows.size(); ++a) {
        out.potential_first[rows[a]] = sol.row_duals[static_cast<std::size_t>(row_con[a])];
    }
    // Off-support potentials by c-transform so that f_i + g_j <= c_ij everywhere.
    for (std::size_t i = 0; i < n; ++i) {
        if (first[i] > 0.0) {
            continue;
        }
        double best = lp::kInfinity;
        for (std::size_t j : cols) {
            best = std::min(best, costs.cost(i, j) - out.potential_second[j]);
        }
        out.potential_first[i] = best;
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (second[j] > 0.0) {
            continue;
        }
        double best = lp::kInfinity;
        for (std::size_t i = 0; i < n; ++i) {
            best = std::min(best, costs.cost(i, j) - out.potential_first[i]);
        }
        out.potential_second[j] = best;
    }
    double dual = 0.0;
    for (std::size_t i : rows) {
        dual += first[i] * out.potential_first[i];
    }
    for (std::size_t j : cols) {
        dual += second[j] * out.potential_second[j];
    }
    out.dual_value = dual;
    return out;
}

WassersteinResult wasserstein_p(const ScenarioLattice& lattice, const MetricParams& params, const Measure& first,
                                const Measure& second) {
    if (first.lattice_id() != lattice.fingerprint() || second.lattice_id() != lattice.fingerprint()) {
        throw Error(ErrorCode::kLatticeMismatch, "measures do not live on this lattice");
    }
    return wasserstein_p(CostMatrix(lattice, params), first, second);
}

}  // namespace rumax

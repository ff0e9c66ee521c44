#pragma once

// Brute-force references used by the tests. None of them call into the
// library's optimisation code; they only share the data types.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "rumax/lattice.hpp"

namespace rumax::oracle {

/// Maximum of a unimodal f on [a, b] by golden section.
inline double golden_max(const std::function<double(double)>& f, double a, double b, double* argmax = nullptr,
                         int iters = 200) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    const double x = fc >= fd ? c : d;
    if (argmax) {
        *argmax = x;
    }
    return std::max(fc, fd);
}

/// sup_x { u(x) - x y } by a coarse grid over [lo, hi] followed by golden
/// section on the best cell.
inline double grid_conjugate(const std::function<double(double)>& u, double y, double lo, double hi,
                             int points = 20001) {
    const double h = (hi - lo) / (points - 1);
    int best = 0;
    double bv = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
        const double x = lo + i * h;
        const double v = u(x) - x * y;
        if (v > bv) {
            bv = v;
            best = i;
        }
    }
    const double a = lo + std::max(0, best - 1) * h;
    const double b = lo + std::min(points - 1, best + 1) * h;
    return std::max(bv, golden_max([&](double x) { return u(x) - x * y; }, a, b));
}

/// min sum c_ij pi_ij over transport plans with marginals (a, b), by
/// enumerating every basic solution (m + n - 1 cells) of the transport polytope.
inline double transport_vertex_min(const std::vector<double>& a, const std::vector<double>& b,
                                   const std::vector<std::vector<double>>& c) {
    const int m = static_cast<int>(a.size()), n = static_cast<int>(b.size());
    const int cells = m * n, k = m + n - 1;
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> pick(static_cast<std::size_t>(k));
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == k) {
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + n, k);
            Eigen::VectorXd rhs(m + n);
            for (int i = 0; i < m; ++i) rhs(i) = a[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) rhs(m + j) = b[static_cast<std::size_t>(j)];
            for (int q = 0; q < k; ++q) {
                const int cell = pick[static_cast<std::size_t>(q)];
                A(cell / n, q) = 1.0;
                A(m + cell % n, q) = 1.0;
            }
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
            if (qr.rank() < k) {
                return;
            }
            const Eigen::VectorXd x = qr.solve(rhs);
            if ((A * x - rhs).norm() > 1e-10 || x.minCoeff() < -1e-12) {
                return;
            }
            double cost = 0.0;
            for (int q = 0; q < k; ++q) {
                const int cell = pick[static_cast<std::size_t>(q)];
                cost += c[static_cast<std::size_t>(cell / n)][static_cast<std::size_t>(cell % n)] * std::max(0.0, x(q));
            }
            best = std::min(best, cost);
            return;
        }
        for (int cell = start; cell < cells; ++cell) {
            pick[static_cast<std::size_t>(depth)] = cell;
            rec(cell + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

/// min f.p over {p in simplex, G p <= h} by enumerating vertices: every
/// choice of n-1 active constraints among {p_i >= 0} and the rows of G.
inline double polytope_vertex_min(const std::vector<double>& f, const std::vector<std::vector<double>>& G,
                                  const std::vector<double>& h, std::vector<double>* argmin = nullptr) {
    const int n = static_cast<int>(f.size());
    std::vector<std::vector<double>> rows;  // r.p <= s
    std::vector<double> rhs;
    for (int i = 0; i < n; ++i) {
        std::vector<double> e(static_cast<std::size_t>(n), 0.0);
        e[static_cast<std::size_t>(i)] = -1.0;
        rows.push_back(e);
        rhs.push_back(0.0);
    }
    for (std::size_t r = 0; r < G.size(); ++r) {
        rows.push_back(G[r]);
        rhs.push_back(h[r]);
    }
    const int total = static_cast<int>(rows.size());
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> pick(static_cast<std::size_t>(n - 1));
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == n - 1) {
            Eigen::MatrixXd A(n, n);
            Eigen::VectorXd b(n);
            A.row(0).setOnes();
            b(0) = 1.0;
            for (int q = 0; q < n - 1; ++q) {
                for (int j = 0; j < n; ++j) {
                    A(q + 1, j) = rows[static_cast<std::size_t>(pick[static_cast<std::size_t>(q)])][static_cast<std::size_t>(j)];
                }
                b(q + 1) = rhs[static_cast<std::size_t>(pick[static_cast<std::size_t>(q)])];
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
            if (!lu.isInvertible()) {
                return;
            }
            const Eigen::VectorXd p = lu.solve(b);
            for (int r = 0; r < total; ++r) {
                double lhs = 0.0;
                for (int j = 0; j < n; ++j) lhs += rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] * p(j);
                if (lhs > rhs[static_cast<std::size_t>(r)] + 1e-10 * std::max(1.0, std::abs(rhs[static_cast<std::size_t>(r)]))) {
                    return;
                }
            }
            double v = 0.0;
            for (int j = 0; j < n; ++j) v += f[static_cast<std::size_t>(j)] * p(j);
            if (v < best) {
                best = v;
                if (argmin) {
                    argmin->assign(p.data(), p.data() + n);
                }
            }
            return;
        }
        for (int r = start; r < total; ++r) {
            pick[static_cast<std::size_t>(depth)] = r;
            rec(r + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

/// Wealth of a holding vector (indexed by node id) on one leaf.
inline double wealth(const ScenarioLattice& lattice, const std::vector<double>& theta, std::size_t leaf) {
    const auto nodes = lattice.path_nodes(leaf);
    double w = 0.0;
    for (std::size_t t = 1; t < nodes.size(); ++t) {
        w += theta[static_cast<std::size_t>(nodes[t - 1])] *
             (lattice.node(nodes[t]).price - lattice.node(nodes[t - 1]).price);
    }
    return w;
}

/// max over node residuals |sum_children w (S_child - S_node)| of leaf weights w.
inline double martingale_gap(const ScenarioLattice& lattice, const std::vector<double>& w) {
    double worst = 0.0;
    for (int id : lattice.non_terminal_nodes()) {
        double r = 0.0;
        for (std::size_t l : lattice.leaves_under(id)) {
            const auto nodes = lattice.path_nodes(l);
            const int child = nodes[static_cast<std::size_t>(lattice.node(id).time) + 1];
            r += w[l] * (lattice.node(child).price - lattice.node(id).price);
        }
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

}  // namespace rumax::oracle

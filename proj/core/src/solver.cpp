#include "rumax/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>

#include "rumax/arbitrage.hpp"
#include "rumax/divergence.hpp"
#include "rumax/error.hpp"
#include "rumax/lp.hpp"

namespace rumax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Leaf l's price steps, as (martingale row, dS) for t = 1..T.
struct LeafSteps {
    std::vector<std::vector<std::pair<int, double>>> steps;
    std::vector<int> row_node;  // martingale row -> node id
};

LeafSteps leaf_steps(const ScenarioLattice& lattice) {
    LeafSteps out;
    std::map<int, int> row_of;
    for (int n : lattice.non_terminal_nodes()) {
        row_of[n] = static_cast<int>(out.row_node.size());
        out.row_node.push_back(n);
    }
    out.steps.resize(lattice.num_leaves());
    for (std::size_t l = 0; l < lattice.num_leaves(); ++l) {
        const auto nodes = lattice.path_nodes(l);
        for (int t = 1; t <= lattice.horizon(); ++t) {
            const double ds = lattice.price_increment(l, t);
            if (ds != 0.0) {
                out.steps[l].emplace_back(row_of.at(nodes[static_cast<std::size_t>(t - 1)]), ds);
            }
        }
    }
    return out;
}

std::vector<double> wealth_of(const LeafSteps& ls, const std::vector<double>& theta_by_row) {
    std::vector<double> w(ls.steps.size(), 0.0);
    for (std::size_t l = 0; l < w.size(); ++l) {
        for (const auto& [row, ds] : ls.steps[l]) {
            w[l] += theta_by_row[static_cast<std::size_t>(row)] * ds;
        }
    }
    return w;
}

Strategy strategy_of(const ScenarioLattice& lattice, const LeafSteps& ls, const std::vector<double>& theta_by_row) {
    Strategy s = Strategy::zero(lattice);
    for (std::size_t r = 0; r < ls.row_node.size(); ++r) {
        s.holdings[static_cast<std::size_t>(ls.row_node[r])] = theta_by_row[r];
    }
    return s;
}

double box_radius(const ScenarioLattice& lattice, const Claim& claim) {
    double xmax = 0.0;
    for (double x : claim.values()) {
        xmax = std::max(xmax, std::abs(x));
    }
    double dmin = kInf;
    for (std::size_t l = 0; l < lattice.num_leaves(); ++l) {
        for (int t = 1; t <= lattice.horizon(); ++t) {
            const double d = std::abs(lattice.price_increment(l, t));
            if (d > 0.0) {
                dmin = std::min(dmin, d);
            }
        }
    }
    return std::isfinite(dmin) ? 10.0 * (xmax + 1.0) / dmin : 0.0;
}

}  // namespace

void validate(const Problem& problem) {
    const auto id = problem.lattice.fingerprint();
    if (problem.claim.lattice_id() != id || problem.claim.size() != problem.lattice.num_leaves()) {
        throw Error(ErrorCode::kValidationError, "claim does not live on the problem lattice");
    }
    for (double x : problem.claim.values()) {
        if (!std::isfinite(x)) {
            throw Error(ErrorCode::kValidationError, "claim values must be finite");
        }
    }
    const auto& scales = problem.utility.leaf_scales();
    if (!scales.empty() && scales.size() != problem.lattice.num_leaves()) {
        throw Error(ErrorCode::kValidationError, "utility leaf scales do not match the lattice");
    }
    const auto& tol = problem.tolerances;
    if (!(tol.primal_tol > 0.0) || !(tol.dual_tol > 0.0) || tol.max_iters <= 0) {
        throw Error(ErrorCode::kValidationError, "tolerances must be positive");
    }
    auto check = [&](const Measure& m, const char* what) {
        if (m.lattice_id() != id || m.size() != problem.lattice.num_leaves()) {
            throw Error(ErrorCode::kValidationError, std::string(what) + " lives on a different lattice");
        }
    };
    std::visit(
        [&](const auto& spec) {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, FiniteHull>) {
                for (const auto& g : spec.generators) {
                    check(g, "hull generator");
                }
            } else if constexpr (std::is_same_v<T, WassersteinBall> || std::is_same_v<T, WassersteinPenalty>) {
                check(spec.reference, "ambiguity reference");
            }
        },
        problem.ambiguity);
}

InnerResult evaluate_strategy(const Problem& problem, const AmbiguitySet& set, const Strategy& theta) {
    const auto w = wealth_vector(problem.lattice, theta);
    std::vector<double> cost(w.size());
    for (std::size_t l = 0; l < w.size(); ++l) {
        cost[l] = problem.utility.value(l, problem.claim[l] + w[l]);
    }
    return set.inner_min(cost);
}

DualCertificate make_certificate(const Problem& problem, const AmbiguitySet& set, std::span<const double> r,
                                 const Measure& P) {
    DualCertificate c;
    double q = 0.0;
    for (double v : r) {
        if (v < 0.0) {
            throw Error(ErrorCode::kInvalidMeasure, "certificate density must be nonnegative");
        }
        q += v;
    }
    c.q = q;
    if (q > 0.0) {
        std::vector<double> w(r.begin(), r.end());
        for (double& v : w) {
            v /= q;
        }
        c.Q = Measure(problem.lattice, std::move(w));
    } else {
        c.Q = set.anchor();
    }
    c.P = P;
    c.martingale_residual = martingale_residual(problem.lattice, r);
    c.expectation = expectation(c.Q, problem.claim);
    c.divergence = divergence_dv(Conjugate(problem.utility), q, c.Q, P);
    c.alpha = set.alpha(P);
    c.value = q * c.expectation + c.divergence + c.alpha;
    return c;
}

bool certificate_valid(const Problem& problem, const DualCertificate& cert, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why != nullptr) {
            *why = msg;
        }
        return false;
    };
    if (!(cert.q >= 0.0) || !std::isfinite(cert.value)) {
        return fail("q must be >= 0 and the value finite");
    }
    if (cert.Q.lattice_id() != problem.lattice.fingerprint() || cert.P.lattice_id() != problem.lattice.fingerprint()) {
        return fail("certificate measures live on a different lattice");
    }
    if (cert.q > 0.0 && martingale_residual(problem.lattice, cert.Q.weights()) > 1e-9) {
        return fail("Q is not a martingale measure");
    }
    const AmbiguitySet set(problem.lattice, problem.ambiguity);
    const double alpha = set.alpha(cert.P);
    if (!std::isfinite(alpha)) {
        return fail("P is outside the ambiguity set");
    }
    const double div = divergence_dv(Conjugate(problem.utility), cert.q, cert.Q, cert.P);
    const double value = cert.q * expectation(cert.Q, problem.claim) + div + alpha;
    if (std::abs(value - cert.value) > 1e-8 * std::max(1.0, std::abs(value))) {
        return fail("value does not match q E^Q X + D_v(qQ || P) + alpha(P)");
    }
    return true;
}

namespace {

class ColumnGeneration {
public:
    ColumnGeneration(const Problem& problem, const AmbiguitySet& set)
        : problem_(problem), set_(set), conj_(problem.utility), ls_(leaf_steps(problem.lattice)) {
        const std::size_t n = problem.lattice.num_leaves();
        block_ = set_.install(model_);
        link_.resize(n);
        for (std::size_t l = 0; l < n; ++l) {
            link_[l] = model_.add_row(lp::RowSense::kEqual, 0.0);
            for (const auto& [var, coef] : block_.leaf_weight[l]) {
                model_.add_coefficient(link_[l], var, -coef);
            }
        }
        for (std::size_t r = 0; r < ls_.row_node.size(); ++r) {
            mart_.push_back(model_.add_row(lp::RowSense::kEqual, 0.0));
        }
        max_y_.assign(n, 0.0);
        seed_columns();
    }

    SolveResult run(const SolverOptions& options) {
        const std::size_t n = problem_.lattice.num_leaves();
        const auto& tol = problem_.tolerances;
        SolveResult out;
        out.box_radius = box_radius(problem_.lattice, problem_.claim);
        double lower = -kInf;
        double upper = kInf;
        std::vector<double> best_theta(ls_.row_node.size(), 0.0);
        std::vector<double> best_r(n, 0.0);
        Measure best_P = set_.anchor();
        InnerResult best_inner;
        lp::Basis basis;
        int iter = 0;
        for (; iter < tol.max_iters; ++iter) {
            const auto sol = lp::solve(model_, {}, basis.entries.empty() ? nullptr : &basis);
            if (sol.status == lp::Status::kUnbounded) {
                throw Error(ErrorCode::kUnboundedBelow, "dual master is unbounded below");
            }
            if (sol.status == lp::Status::kInfeasible) {
                throw Error(ErrorCode::kInfeasibleAmbiguity, "ambiguity set is empty");
            }
            if (!sol.optimal()) {
                throw Error(ErrorCode::kLpFailure, "dual master LP failed");
            }
            basis = sol.basis;

            std::vector<double> theta(ls_.row_node.size());
            for (std::size_t r = 0; r < theta.size(); ++r) {
                theta[r] = -sol.row_duals[static_cast<std::size_t>(mart_[r])];
            }
            const Measure P = set_.extract(block_, sol.x);
            const double alpha = AmbiguitySet::modelled_alpha(block_, sol.x);

            std::vector<std::vector<double>> candidates{theta};
            if (problem_.utility.smooth()) {
                candidates.push_back(newton(P, theta));
            }
            // primal side: exact F at each candidate strategy
            for (const auto& th : candidates) {
                const auto inner = evaluate_strategy(problem_, set_, strategy_of(problem_.lattice, ls_, th));
                if (inner.value > lower) {
                    lower = inner.value;
                    best_theta = th;
                    best_inner = inner;
                }
            }
            // dual side: the master's own (r, P) and, for smooth u, r = P u'(X + wealth)
            std::vector<std::vector<double>> densities{master_density(sol.x)};
            if (problem_.utility.smooth()) {
                const auto z = wealth_of(ls_, candidates.back());
                std::vector<double> r(n);
                for (std::size_t l = 0; l < n; ++l) {
                    r[l] = P[l] > 0.0 ? P[l] * problem_.utility.derivative(l, problem_.claim[l] + z[l]) : 0.0;
                }
                densities.push_back(std::move(r));
            }
            for (auto& raw : densities) {
                auto cleaned = martingale_clean(raw, P);
                if (!cleaned) {
                    continue;
                }
                auto& r = *cleaned;
                const double v = bound_value(r, P, alpha);
                if (v < upper) {
                    upper = v;
                    best_r = r;
                    best_P = P;
                }
            }
            out.trace.push_back({iter, lower, upper, static_cast<int>(col_leaf_.size())});
            if (upper - lower <= tol.primal_tol) {
                ++iter;
                break;
            }
            int added = 0;
            for (const auto& th : candidates) {
                added += price(th, sol.row_duals);
            }
            if (added == 0) {
                ++iter;
                break;
            }
        }
        out.iterations = iter;

        out.strategy = strategy_of(problem_.lattice, ls_, best_theta);
        out.primal_value = best_inner.value;
        out.worst_case = best_inner.measure;
        if (options.inject_sign_fault) {
            out.primal_value = -out.primal_value;
        }
        out.certificate = make_certificate(problem_, set_, best_r, best_P);
        out.gap = out.certificate.value - out.primal_value;
        out.converged = out.gap <= tol.primal_tol;
        out.weak_duality_ok = out.primal_value <= out.certificate.value + 1e-9;
        for (const auto& rec : out.trace) {
            out.weak_duality_ok = out.weak_duality_ok && rec.lower <= rec.upper + 1e-9;
        }
        for (double th : best_theta) {
            out.beyond_box = out.beyond_box || std::abs(th) > out.box_radius;
        }
        return out;
    }

private:
    void add_column(std::size_t l, double y) {
        for (std::size_t k = 0; k < col_leaf_.size(); ++k) {
            if (col_leaf_[k] == l && std::abs(col_y_[k] - y) <= 1e-12 * std::max(1.0, y)) {
                return;
            }
        }
        const double cost = conj_.value(l, y) + y * problem_.claim[l];
        if (!std::isfinite(cost)) {
            return;
        }
        const int var = model_.add_variable(cost);
        model_.add_coefficient(link_[l], var, 1.0);
        for (const auto& [row, ds] : ls_.steps[l]) {
            if (y != 0.0) {
                model_.add_coefficient(mart_[static_cast<std::size_t>(row)], var, y * ds);
            }
        }
        col_leaf_.push_back(l);
        col_y_.push_back(y);
        col_var_.push_back(var);
        max_y_[l] = std::max(max_y_[l], y);
    }

    void seed_columns() {
        const auto& u = problem_.utility;
        const double h = u.natural_scale();
        for (std::size_t l = 0; l < problem_.lattice.num_leaves(); ++l) {
            const double x = problem_.claim[l];
            add_column(l, 0.0);
            for (int k = -4; k <= 4; ++k) {
                add_column(l, u.derivative(l, x + k * h));
            }
            if (const auto* t = std::get_if<TabulatedUtility>(&u.base())) {
                const double a = u.scale(l);
                for (const auto& knot : t->knots) {
                    add_column(l, u.derivative(l, knot.x / a));
                }
                add_column(l, u.derivative(l, (t->knots.front().x - 1.0) / a));
            }
        }
    }

    // One new slope column per leaf whose reduced cost is negative.
    int price(const std::vector<double>& theta, const std::vector<double>& duals) {
        const auto w = wealth_of(ls_, theta);
        int added = 0;
        for (std::size_t l = 0; l < w.size(); ++l) {
            const double z = problem_.claim[l] + w[l];
            double y = problem_.utility.derivative(l, z);
            if (max_y_[l] > 0.0) {
                y = std::min(y, 100.0 * max_y_[l]);
            }
            const double pi = duals[static_cast<std::size_t>(link_[l])];
            const double rc = conj_.value(l, y) + y * z - pi;
            if (rc < -1e-11 * std::max(1.0, std::abs(pi))) {
                const std::size_t before = col_leaf_.size();
                add_column(l, y);
                added += col_leaf_.size() > before ? 1 : 0;
            }
        }
        return added;
    }

    std::vector<double> master_density(const std::vector<double>& x) const {
        std::vector<double> r(problem_.lattice.num_leaves(), 0.0);
        for (std::size_t k = 0; k < col_var_.size(); ++k) {
            r[col_leaf_[k]] += std::max(0.0, x[static_cast<std::size_t>(col_var_[k])]) * col_y_[k];
        }
        return r;
    }

    // Drops LP noise off supp(P), then projects onto the martingale equations.
    // Candidates the projection pushes negative are not dual feasible.
    std::optional<std::vector<double>> martingale_clean(std::vector<double> r, const Measure& P) const {
        const double floor = 1e-13 * std::max(1.0, *std::max_element(r.begin(), r.end()));
        for (std::size_t l = 0; l < r.size(); ++l) {
            if (!(P[l] > 0.0) || r[l] < floor) {
                r[l] = 0.0;
            }
        }
        auto proj = project_martingale(problem_.lattice, r);
        for (double v : proj) {
            if (v < 0.0) {
                return std::nullopt;
            }
        }
        if (martingale_residual(problem_.lattice, proj) > 1e-9 * (1.0 + std::accumulate(proj.begin(), proj.end(), 0.0))) {
            return std::nullopt;
        }
        return proj;
    }

    double bound_value(const std::vector<double>& r, const Measure& P, double alpha) const {
        double v = alpha;
        for (std::size_t l = 0; l < r.size(); ++l) {
            v += r[l] * problem_.claim[l] + conj_.perspective(l, r[l], P[l]);
        }
        return v;
    }

    // Maximises E^P u(X + wealth(theta)) over theta by damped Newton.
    std::vector<double> newton(const Measure& P, std::vector<double> theta) const {
        const std::size_t n = problem_.lattice.num_leaves();
        std::vector<int> index(theta.size(), -1);
        std::vector<std::size_t> rows;
        for (std::size_t l = 0; l < n; ++l) {
            if (!(P[l] > 0.0)) {
                continue;
            }
            for (const auto& [row, ds] : ls_.steps[l]) {
                if (index[static_cast<std::size_t>(row)] < 0) {
                    index[static_cast<std::size_t>(row)] = static_cast<int>(rows.size());
                    rows.push_back(static_cast<std::size_t>(row));
                }
            }
        }
        if (rows.empty()) {
            return theta;
        }
        const auto m = static_cast<Eigen::Index>(rows.size());
        auto objective = [&](const std::vector<double>& th) {
            const auto w = wealth_of(ls_, th);
            double g = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                if (P[l] > 0.0) {
                    g += P[l] * problem_.utility.value(l, problem_.claim[l] + w[l]);
                }
            }
            return g;
        };
        double G = objective(theta);
        for (int it = 0; it < 100; ++it) {
            const auto w = wealth_of(ls_, theta);
            Eigen::VectorXd grad = Eigen::VectorXd::Zero(m);
            Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m, m);
            for (std::size_t l = 0; l < n; ++l) {
                if (!(P[l] > 0.0)) {
                    continue;
                }
                const double z = problem_.claim[l] + w[l];
                const double d1 = P[l] * problem_.utility.derivative(l, z);
                const double d2 = -P[l] * problem_.utility.second_derivative(l, z);
                for (const auto& [ra, da] : ls_.steps[l]) {
                    const int a = index[static_cast<std::size_t>(ra)];
                    grad(a) += d1 * da;
                    for (const auto& [rb, db] : ls_.steps[l]) {
                        hess(a, index[static_cast<std::size_t>(rb)]) += d2 * da * db;
                    }
                }
            }
            if (!grad.allFinite() || !hess.allFinite()) {
                break;
            }
            Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
            if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
                break;
            }
            const Eigen::VectorXd step = ldlt.solve(grad);
            const double slope = grad.dot(step);
            if (!(slope > 0.0) || !step.allFinite()) {
                break;
            }
            double t = 1.0;
            std::vector<double> trial(theta);
            double Gt = G;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                for (std::size_t k = 0; k < rows.size(); ++k) {
                    trial[rows[k]] = theta[rows[k]] + t * step(static_cast<Eigen::Index>(k));
                }
                Gt = objective(trial);
                if (std::isfinite(Gt) && Gt >= G + 1e-4 * t * slope) {
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if (!moved) {
                break;
            }
            const double change = t * step.lpNorm<Eigen::Infinity>();
            theta = trial;
            G = Gt;
            if (change <= 1e-15 * (1.0 + Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size())).lpNorm<Eigen::Infinity>())) {
                break;
            }
        }
        return theta;
    }

    const Problem& problem_;
    const AmbiguitySet& set_;
    Conjugate conj_;
    LeafSteps ls_;
    lp::Model model_;
    AmbiguitySet::Installed block_;
    std::vector<int> link_;
    std::vector<int> mart_;
    std::vector<std::size_t> col_leaf_;
    std::vector<double> col_y_;
    std::vector<int> col_var_;
    std::vector<double> max_y_;
};

}  // namespace

SolveResult solve(const Problem& problem, const SolverOptions& options) {
    validate(problem);
    const auto report = check_conditions(problem.utility, problem.lattice.num_leaves());
    for (const auto& c : report.checks) {
        if (!c.passed) {
            throw Error(ErrorCode::kInvalidSpec, "utility fails " + c.name + ": " + c.witness);
        }
    }
    const AmbiguitySet set(problem.lattice, problem.ambiguity);
    ColumnGeneration cg(problem, set);
    return cg.run(options);
}

EntropicResult entropic_value(const Problem& problem) {
    const auto lambda = problem.utility.uniform_lambda();
    if (!lambda) {
        throw Error(ErrorCode::kNotExponential, "entropic value needs an exponential utility with one lambda");
    }
    if (std::holds_alternative<WassersteinPenalty>(problem.ambiguity)) {
        throw Error(ErrorCode::kInvalidSpec, "entropic value needs alpha = 0 (hull, moment or ball)");
    }
    EntropicResult out;
    out.lambda = *lambda;
    out.solve = solve(problem);
    out.primal = -std::log(-out.solve.primal_value) / out.lambda;
    const AmbiguitySet set(problem.lattice, problem.ambiguity);
    out.Q = out.solve.certificate.q > 0.0 ? out.solve.certificate.Q : set.anchor();
    const auto h = robust_relative_entropy(out.Q, set);
    out.entropy = h.value;
    out.P = h.measure;
    out.dual = expectation(out.Q, problem.claim) + out.entropy / out.lambda;
    return out;
}

GapReport duality_gap(const Problem& problem, const SolverOptions& options) {
    GapReport out;
    out.solve = solve(problem, options);
    out.primal = out.solve.primal_value;
    out.dual = out.solve.certificate.value;
    out.absolute_gap = out.dual - out.primal;
    out.relative_gap = std::abs(out.absolute_gap) / (1.0 + std::abs(out.primal));
    out.converged = out.solve.converged;
    out.weak_duality_ok = out.solve.weak_duality_ok && out.primal <= out.dual + 1e-9;
    return out;
}

BiconjugateReport biconjugate_check(const Problem& problem, int samples, std::uint64_t seed) {
    const std::size_t n = problem.lattice.num_leaves();
    struct Point {
        std::vector<double> x;
        double phi = 0.0;
        std::vector<double> mu;
        double conj = 0.0;  // certificate bound on phi*(mu)
    };
    auto evaluate = [&](std::vector<double> x) {
        Problem p = problem;
        std::vector<double> neg(x);
        for (double& v : neg) {
            v = -v;
        }
        p.claim = Claim(problem.lattice, neg);
        const auto s = solve(p);
        Point pt;
        pt.x = std::move(x);
        pt.phi = -s.primal_value;
        const auto& c = s.certificate;
        pt.mu.assign(n, 0.0);
        for (std::size_t l = 0; l < n; ++l) {
            pt.mu[l] = c.q * c.Q[l];
        }
        pt.conj = c.divergence + c.alpha;
        return pt;
    };
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            s += a[l] * b[l];
        }
        return s;
    };

    BiconjugateReport out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Point> pts;
    for (int i = 0; i < samples; ++i) {
        std::vector<double> x(n);
        std::vector<double> bump(n);
        for (std::size_t l = 0; l < n; ++l) {
            x[l] = normal(rng);
            bump[l] = std::abs(normal(rng));
        }
        std::vector<double> hi(x);
        for (std::size_t l = 0; l < n; ++l) {
            hi[l] += bump[l];
        }
        const Point a = evaluate(x);
        const Point b = evaluate(hi);
        out.monotone = out.monotone && a.phi <= b.phi + 1e-9;
        if (!pts.empty()) {
            const Point& prev = pts.back();
            std::vector<double> mid(n);
            for (std::size_t l = 0; l < n; ++l) {
                mid[l] = 0.5 * (prev.x[l] + a.x[l]);
            }
            const Point m = evaluate(mid);
            out.convex = out.convex && m.phi <= 0.5 * (prev.phi + a.phi) + 1e-9;
            pts.push_back(m);
        }
        pts.push_back(a);
        pts.push_back(b);
    }
    out.claims = static_cast<int>(pts.size());
    out.tightest = kInf;
    for (const auto& p : pts) {
        for (const auto& q : pts) {
            const double slack = p.phi - (dot(p.x, q.mu) - q.conj);
            out.worst_fenchel = std::min(out.worst_fenchel, slack);
        }
        out.tightest = std::min(out.tightest, p.phi - (dot(p.x, p.mu) - p.conj));
    }
    out.fenchel = out.worst_fenchel >= -1e-7;
    if (pts.empty()) {
        out.tightest = 0.0;
    }
    for (int k = -4; k <= 4; ++k) {
        out.constant_slice.push_back(evaluate(std::vector<double>(n, 0.5 * k)).phi);
    }
    for (std::size_t k = 1; k < out.constant_slice.size(); ++k) {
        out.monotone = out.monotone && out.constant_slice[k - 1] <= out.constant_slice[k] + 1e-9;
        if (k + 1 < out.constant_slice.size()) {
            out.convex = out.convex && out.constant_slice[k] <=
                                           0.5 * (out.constant_slice[k - 1] + out.constant_slice[k + 1]) + 1e-9;
        }
    }
    return out;
}

}  // namespace rumax

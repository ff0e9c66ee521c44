#include "rumax/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rumax/error.hpp"
#include "rumax/utility.hpp"

namespace rumax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_lattice(const ScenarioLattice& lattice, const Measure& m, const char* what) {
    if (m.lattice_id() != lattice.fingerprint() || m.size() != lattice.num_leaves()) {
        throw Error(ErrorCode::kLatticeMismatch, std::string(what) + " does not live on the ambiguity lattice");
    }
}

double expr_value(const AmbiguitySet::LeafExpr& e, const std::vector<double>& x) {
    double v = 0.0;
    for (const auto& [var, coef] : e) {
        v += coef * x[static_cast<std::size_t>(var)];
    }
    return v;
}

}  // namespace

std::string kind_name(const AmbiguitySpec& spec) {
    switch (spec.index()) {
        case 0: return "hull";
        case 1: return "moment";
        case 2: return "wasserstein_ball";
        default: return "wasserstein_penalty";
    }
}

AmbiguitySet::AmbiguitySet(const ScenarioLattice& lattice, AmbiguitySpec spec)
    : lattice_(lattice), spec_(std::move(spec)) {
    const int T = lattice_.horizon();
    if (auto* hull = std::get_if<FiniteHull>(&spec_)) {
        if (hull->generators.empty()) {
            throw Error(ErrorCode::kInvalidSpec, "hull needs at least one generator");
        }
        for (const auto& g : hull->generators) {
            require_same_lattice(lattice_, g, "hull generator");
        }
        anchor_ = hull->generators.front();
        return;
    }
    if (auto* ms = std::get_if<MomentSet>(&spec_)) {
        if (ms->constraints.empty()) {
            throw Error(ErrorCode::kInvalidSpec, "moment set needs at least one constraint");
        }
        double cmin = kInf;
        double dmax = -kInf;
        for (std::size_t i = 0; i < ms->constraints.size(); ++i) {
            const auto& c = ms->constraints[i];
            if (!(c.c_exponent < 0.0) || !(c.d_exponent > 0.0)) {
                throw Error(ErrorCode::kInvalidSpec, "moment exponents need c < 0 < d");
            }
            if (c.c_bounds.size() != static_cast<std::size_t>(T) || c.d_bounds.size() != static_cast<std::size_t>(T)) {
                throw Error(ErrorCode::kInvalidSpec, "moment bounds need one entry per t = 1..T");
            }
            for (int t = 0; t < T; ++t) {
                if (!(c.c_bounds[static_cast<std::size_t>(t)] > 0.0) || !(c.d_bounds[static_cast<std::size_t>(t)] > 0.0)) {
                    throw Error(ErrorCode::kInvalidSpec, "moment bounds must be positive");
                }
            }
            cmin = std::min(cmin, c.c_exponent);
            dmax = std::max(dmax, c.d_exponent);
        }
        if (!(cmin < -1.0) || !(dmax > 1.0)) {
            throw Error(ErrorCode::kInvalidSpec, "moment set needs min c < -1 and max d > 1");
        }
        const std::size_t n = lattice_.num_leaves();
        for (std::size_t i = 0; i < ms->constraints.size(); ++i) {
            const auto& c = ms->constraints[i];
            for (int t = 1; t <= T; ++t) {
                std::vector<double> lo(n);
                std::vector<double> hi(n);
                for (std::size_t l = 0; l < n; ++l) {
                    const auto& node = lattice_.node(lattice_.path_nodes(l)[static_cast<std::size_t>(t)]);
                    const double s = ms->undiscounted ? node.money_market * node.price : node.price;
                    lo[l] = std::pow(s, c.c_exponent);
                    hi[l] = std::pow(s, c.d_exponent);
                }
                moment_rows_.push_back(std::move(lo));
                moment_rhs_.push_back(c.c_bounds[static_cast<std::size_t>(t - 1)]);
                moment_names_.push_back("E[S_" + std::to_string(t) + "^c] <= C (constraint " + std::to_string(i) + ")");
                moment_rows_.push_back(std::move(hi));
                moment_rhs_.push_back(c.d_bounds[static_cast<std::size_t>(t - 1)]);
                moment_names_.push_back("E[S_" + std::to_string(t) + "^d] <= D (constraint " + std::to_string(i) + ")");
            }
        }
        // Phase-1: the set must be non-empty.
        lp::Model model;
        const auto block = install(model);
        const auto sol = lp::solve(model);
        if (sol.status == lp::Status::kInfeasible) {
            throw Error(ErrorCode::kInfeasibleAmbiguity, "moment constraints admit no probability measure");
        }
        if (!sol.optimal()) {
            throw Error(ErrorCode::kLpFailure, "moment feasibility LP failed");
        }
        anchor_ = extract(block, sol.x);
        return;
    }
    if (auto* ball = std::get_if<WassersteinBall>(&spec_)) {
        require_same_lattice(lattice_, ball->reference, "ball reference");
        if (!(ball->radius > 0.0) || !std::isfinite(ball->radius)) {
            throw Error(ErrorCode::kInvalidSpec, "ball radius must be > 0");
        }
        costs_.emplace(lattice_, ball->metric);
        anchor_ = ball->reference;
        return;
    }
    auto& pen = std::get<WassersteinPenalty>(spec_);
    require_same_lattice(lattice_, pen.reference, "penalty reference");
    if (!(pen.weight > 0.0) || !std::isfinite(pen.weight)) {
        throw Error(ErrorCode::kInvalidSpec, "penalty weight must be > 0");
    }
    costs_.emplace(lattice_, pen.metric);
    anchor_ = pen.reference;
}

AmbiguitySet::Installed AmbiguitySet::install(lp::Model& model, std::span<const double> leaf_cost) const {
    const std::size_t n = lattice_.num_leaves();
    auto charge = [&](std::size_t l) { return leaf_cost.empty() ? 0.0 : leaf_cost[l]; };
    Installed out;
    out.leaf_weight.assign(n, {});

    if (const auto* hull = std::get_if<FiniteHull>(&spec_)) {
        const int sum = model.add_row(lp::RowSense::kEqual, 1.0);
        for (const auto& g : hull->generators) {
            double c = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                c += charge(l) * g[l];
            }
            const int v = model.add_variable(c);
            model.add_coefficient(sum, v, 1.0);
            out.vars.push_back(v);
            for (std::size_t l = 0; l < n; ++l) {
                if (g[l] != 0.0) {
                    out.leaf_weight[l].emplace_back(v, g[l]);
                }
            }
        }
        return out;
    }
    if (std::holds_alternative<MomentSet>(spec_)) {
        const int sum = model.add_row(lp::RowSense::kEqual, 1.0);
        std::vector<int> rows;
        for (double rhs : moment_rhs_) {
            rows.push_back(model.add_row(lp::RowSense::kLessEqual, rhs));
        }
        for (std::size_t l = 0; l < n; ++l) {
            const int v = model.add_variable(charge(l));
            model.add_coefficient(sum, v, 1.0);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                model.add_coefficient(rows[r], v, moment_rows_[r][l]);
            }
            out.vars.push_back(v);
            out.leaf_weight[l].emplace_back(v, 1.0);
        }
        return out;
    }

    // Transport plans pi(i, l) from the reference support i to every leaf l.
    const bool is_ball = std::holds_alternative<WassersteinBall>(spec_);
    const Measure& ref = is_ball ? std::get<WassersteinBall>(spec_).reference
                                 : std::get<WassersteinPenalty>(spec_).reference;
    const auto supp = ref.support();
    std::vector<int> marg(supp.size());
    for (std::size_t a = 0; a < supp.size(); ++a) {
        marg[a] = model.add_row(lp::RowSense::kEqual, ref[supp[a]]);
    }
    int budget = -1;
    double weight = 0.0;
    if (is_ball) {
        const auto& ball = std::get<WassersteinBall>(spec_);
        budget = model.add_row(lp::RowSense::kLessEqual, std::pow(ball.radius, costs_->order()));
    } else {
        weight = std::get<WassersteinPenalty>(spec_).weight;
    }
    for (std::size_t a = 0; a < supp.size(); ++a) {
        for (std::size_t l = 0; l < n; ++l) {
            const double c = costs_->cost(supp[a], l);
            const int v = model.add_variable(charge(l) + weight * c);
            model.add_coefficient(marg[a], v, 1.0);
            if (budget >= 0 && c != 0.0) {
                model.add_coefficient(budget, v, c);
            }
            if (weight > 0.0 && c != 0.0) {
                out.alpha_terms.emplace_back(v, weight * c);
            }
            out.vars.push_back(v);
            out.leaf_weight[l].emplace_back(v, 1.0);
        }
    }
    return out;
}

Measure AmbiguitySet::extract(const Installed& block, const std::vector<double>& x) const {
    std::vector<double> w(block.leaf_weight.size());
    double total = 0.0;
    for (std::size_t l = 0; l < w.size(); ++l) {
        w[l] = std::max(0.0, expr_value(block.leaf_weight[l], x));
        total += w[l];
    }
    if (!(total > 0.0)) {
        throw Error(ErrorCode::kLpFailure, "LP returned a zero measure");
    }
    for (double& v : w) {
        v /= total;
    }
    return Measure(lattice_, std::move(w));
}

double AmbiguitySet::modelled_alpha(const Installed& block, const std::vector<double>& x) {
    double a = 0.0;
    for (const auto& [var, coef] : block.alpha_terms) {
        a += coef * std::max(0.0, x[static_cast<std::size_t>(var)]);
    }
    return a;
}

Membership AmbiguitySet::contains(const Measure& measure, double tol) const {
    require_same_lattice(lattice_, measure, "measure");
    Membership out;
    const std::size_t n = lattice_.num_leaves();
    if (const auto* hull = std::get_if<FiniteHull>(&spec_)) {
        for (std::size_t k = 0; k < hull->generators.size(); ++k) {
            const auto& g = hull->generators[k];
            bool same = true;
            for (std::size_t l = 0; l < n && same; ++l) {
                same = std::abs(g[l] - measure[l]) <= tol;
            }
            if (same) {
                out.member = true;
                out.mixture.assign(hull->generators.size(), 0.0);
                out.mixture[k] = 1.0;
                return out;
            }
        }
        // min sum |sum_k lambda_k G_k - P| over the simplex
        lp::Model model;
        const int sum = model.add_row(lp::RowSense::kEqual, 1.0);
        std::vector<int> rows(n);
        for (std::size_t l = 0; l < n; ++l) {
            rows[l] = model.add_row(lp::RowSense::kEqual, measure[l]);
        }
        std::vector<int> lam;
        for (const auto& g : hull->generators) {
            const int v = model.add_variable(0.0);
            model.add_coefficient(sum, v, 1.0);
            for (std::size_t l = 0; l < n; ++l) {
                if (g[l] != 0.0) {
                    model.add_coefficient(rows[l], v, g[l]);
                }
            }
            lam.push_back(v);
        }
        for (std::size_t l = 0; l < n; ++l) {
            model.add_coefficient(rows[l], model.add_variable(1.0), 1.0);
            model.add_coefficient(rows[l], model.add_variable(1.0), -1.0);
        }
        const auto sol = lp::solve(model);
        if (!sol.optimal()) {
            throw Error(ErrorCode::kLpFailure, "hull membership LP failed");
        }
        out.member = sol.objective <= tol * static_cast<double>(std::max<std::size_t>(n, 1));
        if (out.member) {
            for (int v : lam) {
                out.mixture.push_back(std::max(0.0, sol.x[static_cast<std::size_t>(v)]));
            }
        } else {
            std::ostringstream os;
            os << "L1 distance to hull " << sol.objective;
            out.witness = os.str();
        }
        return out;
    }
    if (std::holds_alternative<MomentSet>(spec_)) {
        for (std::size_t r = 0; r < moment_rows_.size(); ++r) {
            double lhs = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                lhs += measure[l] * moment_rows_[r][l];
            }
            if (lhs > moment_rhs_[r] + tol * std::max(1.0, moment_rhs_[r])) {
                std::ostringstream os;
                os << moment_names_[r] << ": " << lhs << " > " << moment_rhs_[r];
                out.witness = os.str();
                return out;
            }
        }
        out.member = true;
        return out;
    }
    if (const auto* ball = std::get_if<WassersteinBall>(&spec_)) {
        const double w = wasserstein_p(*costs_, measure, ball->reference).distance;
        out.member = w <= ball->radius + tol;
        if (!out.member) {
            std::ostringstream os;
            os << "W_p = " << w << " > radius " << ball->radius;
            out.witness = os.str();
        }
        return out;
    }
    out.member = true;
    return out;
}

double AmbiguitySet::alpha(const Measure& measure) const {
    require_same_lattice(lattice_, measure, "measure");
    if (const auto* pen = std::get_if<WassersteinPenalty>(&spec_)) {
        return pen->weight * wasserstein_p(*costs_, measure, pen->reference).cost;
    }
    return contains(measure).member ? 0.0 : kInf;
}

InnerResult AmbiguitySet::inner_min(std::span<const double> cost) const {
    const std::size_t n = lattice_.num_leaves();
    if (cost.size() != n) {
        throw Error(ErrorCode::kLatticeMismatch, "cost vector does not match the lattice");
    }
    for (double c : cost) {
        if (!std::isfinite(c)) {
            throw Error(ErrorCode::kInvalidSpec, "inner_min needs a finite cost");
        }
    }
    if (const auto* hull = std::get_if<FiniteHull>(&spec_)) {
        std::size_t best = 0;
        double value = kInf;
        for (std::size_t k = 0; k < hull->generators.size(); ++k) {
            const double e = expectation(hull->generators[k], cost);
            if (e < value) {
                value = e;
                best = k;
            }
        }
        return {value, hull->generators[best], 0.0};
    }
    lp::Model model;
    const auto block = install(model, cost);
    const auto sol = lp::solve(model);
    if (sol.status == lp::Status::kInfeasible) {
        throw Error(ErrorCode::kInfeasibleAmbiguity, "ambiguity set is empty");
    }
    if (!sol.optimal()) {
        throw Error(ErrorCode::kLpFailure, "inner LP failed");
    }
    return {sol.objective, extract(block, sol.x), modelled_alpha(block, sol.x)};
}

InnerResult AmbiguitySet::inner_min(const Claim& cost) const {
    if (cost.lattice_id() != lattice_.fingerprint()) {
        throw Error(ErrorCode::kLatticeMismatch, "cost claim does not live on the ambiguity lattice");
    }
    return inner_min(cost.values());
}

ConvexInnerResult AmbiguitySet::convex_inner_min(const SeparableConvex& f, const ConvexInnerOptions& options) const {
    const std::size_t n = lattice_.num_leaves();
    auto is_linear = [&](std::size_t l) { return l < f.linear.size() && f.linear[l]; };
    auto evaluate = [&](const Measure& P, double alpha) {
        double total = alpha;
        for (std::size_t l = 0; l < n; ++l) {
            total += f.value(l, P[l]);
        }
        return total;
    };

    ConvexInnerResult out;
    if (const auto* hull = std::get_if<FiniteHull>(&spec_); hull != nullptr && hull->generators.size() == 1) {
        out.measure = hull->generators.front();
        out.value = out.lower_bound = evaluate(out.measure, 0.0);
        out.converged = true;
        out.trace.push_back(out.value);
        return out;
    }

    lp::Model model;
    const auto block = install(model);
    double offset = 0.0;
    std::vector<int> epi(n, -1);
    auto add_cut = [&](std::size_t l, double p) {
        const LeafCut c = f.cut(l, p);
        const int row = model.add_row(lp::RowSense::kGreaterEqual, c.intercept);
        model.add_coefficient(row, epi[l], 1.0);
        for (const auto& [var, coef] : block.leaf_weight[l]) {
            model.add_coefficient(row, var, -c.slope * coef);
        }
        ++out.cuts;
    };
    for (std::size_t l = 0; l < n; ++l) {
        if (is_linear(l)) {
            const LeafCut c = f.cut(l, anchor_[l]);
            offset += c.intercept;
            for (const auto& [var, coef] : block.leaf_weight[l]) {
                model.set_cost(var, model.cost(var) + c.slope * coef);
            }
            continue;
        }
        epi[l] = model.add_variable(1.0, -lp::kInfinity);
        add_cut(l, anchor_[l]);
    }

    out.value = kInf;
    out.lower_bound = -kInf;
    lp::Basis basis;
    for (;;) {
        const auto sol = lp::solve(model, {}, basis.entries.empty() ? nullptr : &basis);
        if (sol.status == lp::Status::kInfeasible) {
            throw Error(ErrorCode::kInfeasibleAmbiguity, "ambiguity set is empty");
        }
        if (!sol.optimal()) {
            throw Error(ErrorCode::kLpFailure, "Kelley master LP failed");
        }
        basis = sol.basis;
        out.lower_bound = std::max(out.lower_bound, sol.objective + offset);
        const Measure P = extract(block, sol.x);
        const double ub = evaluate(P, modelled_alpha(block, sol.x));
        if (ub < out.value) {
            out.value = ub;
            out.measure = P;
        }
        out.trace.push_back(out.value);
        const double gap = out.value - out.lower_bound;
        if (gap <= options.gap_tol * std::max(1.0, std::abs(out.value))) {
            out.converged = true;
            break;
        }
        if (out.cuts >= options.max_cuts) {
            break;
        }
        const std::size_t rows_before = static_cast<std::size_t>(model.num_rows());
        for (std::size_t l = 0; l < n && out.cuts < options.max_cuts; ++l) {
            if (epi[l] < 0) {
                continue;
            }
            const double p = std::max(0.0, expr_value(block.leaf_weight[l], sol.x));
            const double t = sol.x[static_cast<std::size_t>(epi[l])];
            const double fp = f.value(l, p);
            if (fp - t > 1e-3 * options.gap_tol * std::max(1.0, std::abs(fp))) {
                add_cut(l, p);
            }
        }
        if (static_cast<std::size_t>(model.num_rows()) == rows_before) {
            // every leaf model is tight; what remains is renormalisation round-off
            out.converged = true;
            break;
        }
        for (std::size_t r = rows_before; r < static_cast<std::size_t>(model.num_rows()); ++r) {
            basis.entries.push_back({lp::BasisEntry::Kind::kSlack, static_cast<int>(r)});
        }
    }
    if (!std::isfinite(out.value)) {
        throw Error(ErrorCode::kNoConvergence, "no finite upper bound found");
    }
    return out;
}

GrowthReport AmbiguitySet::growth_report(const Utility& utility, std::span<const Measure> samples) const {
    GrowthReport out;
    const auto* pen = std::get_if<WassersteinPenalty>(&spec_);
    if (pen == nullptr) {
        return out;
    }
    MetricParams growth = pen->metric;
    growth.p = 0.5 * (pen->metric.p + 1.0);
    const CostMatrix gcost(lattice_, growth);
    const Claim Z = z_weight(lattice_, ZWeightKind::kTransportAnchored, &pen->metric);
    for (const auto& P : samples) {
        GrowthSample s;
        s.distance = wasserstein_p(gcost, P, pen->reference).distance;
        for (std::size_t l = 0; l < P.size(); ++l) {
            if (P[l] > 0.0) {
                s.expectation += P[l] * utility.value(l, -std::pow(Z[l], growth.p));
            }
        }
        s.ratio = -s.expectation / (1.0 + std::pow(s.distance, growth.p));
        out.constant = std::max(out.constant, s.ratio);
        out.samples.push_back(s);
    }
    return out;
}

}  // namespace rumax

#include "rumax/arbitrage.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "rumax/error.hpp"
#include "rumax/lp.hpp"

namespace rumax {

std::vector<MartingaleRow> martingale_rows(const ScenarioLattice& lattice) {
    std::vector<MartingaleRow> rows;
    for (int n : lattice.non_terminal_nodes()) {
        const auto& node = lattice.node(n);
        MartingaleRow row{n, {}};
        for (std::size_t l : lattice.leaves_under(n)) {
            const int child = lattice.path_nodes(l)[static_cast<std::size_t>(node.time + 1)];
            row.terms.emplace_back(l, lattice.node(child).price - node.price);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

double martingale_residual(const ScenarioLattice& lattice, std::span<const double> weights) {
    double worst = 0.0;
    for (const auto& row : martingale_rows(lattice)) {
        double s = 0.0;
        for (const auto& [l, ds] : row.terms) {
            s += weights[l] * ds;
        }
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

std::vector<double> project_martingale(const ScenarioLattice& lattice, std::span<const double> weights) {
    std::vector<std::size_t> supp;
    std::vector<int> col(weights.size(), -1);
    double total = 0.0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l] > 0.0) {
            col[l] = static_cast<int>(supp.size());
            supp.push_back(l);
            total += weights[l];
        }
    }
    std::vector<double> out(weights.begin(), weights.end());
    if (supp.empty()) {
        return out;
    }
    std::vector<Eigen::VectorXd> rows;
    for (const auto& row : martingale_rows(lattice)) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(supp.size()));
        bool any = false;
        for (const auto& [l, ds] : row.terms) {
            if (col[l] >= 0 && ds != 0.0) {
                a(col[l]) = ds;
                any = true;
            }
        }
        if (any) {
            rows.push_back(std::move(a));
        }
    }
    const auto m = static_cast<Eigen::Index>(rows.size() + 1);
    Eigen::MatrixXd A(m, static_cast<Eigen::Index>(supp.size()));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        A.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    A.row(m - 1).setOnes();
    b(m - 1) = total;
    Eigen::VectorXd w(static_cast<Eigen::Index>(supp.size()));
    for (std::size_t k = 0; k < supp.size(); ++k) {
        w(static_cast<Eigen::Index>(k)) = weights[supp[k]];
    }
    const Eigen::VectorXd residual = A * w - b;
    const Eigen::VectorXd delta = A.completeOrthogonalDecomposition().solve(residual);
    for (std::size_t k = 0; k < supp.size(); ++k) {
        out[supp[k]] = w(static_cast<Eigen::Index>(k)) - delta(static_cast<Eigen::Index>(k));
    }
    return out;
}

ArbitrageResult admits_arbitrage(const ScenarioLattice& lattice, const Measure& measure) {
    if (measure.lattice_id() != lattice.fingerprint()) {
        throw Error(ErrorCode::kLatticeMismatch, "measure does not live on this lattice");
    }
    const auto supp = measure.support();
    const int T = lattice.horizon();
    lp::Model model;
    std::vector<int> var(lattice.num_nodes(), -1);
    double scale = 0.0;
    for (std::size_t l : supp) {
        const auto nodes = lattice.path_nodes(l);
        const int row = model.add_row(lp::RowSense::kGreaterEqual, 0.0);
        for (int t = 1; t <= T; ++t) {
            const int prev = nodes[static_cast<std::size_t>(t - 1)];
            const double ds = lattice.price_increment(l, t);
            scale = std::max(scale, std::abs(ds));
            if (ds == 0.0) {
                continue;
            }
            if (var[static_cast<std::size_t>(prev)] < 0) {
                var[static_cast<std::size_t>(prev)] = model.add_variable(0.0, -1.0, 1.0);
            }
            const int v = var[static_cast<std::size_t>(prev)];
            model.add_coefficient(row, v, ds);
            model.set_cost(v, model.cost(v) - ds);
        }
    }
    ArbitrageResult out;
    out.witness = Strategy::zero(lattice);
    if (model.num_variables() == 0) {
        return out;
    }
    const auto sol = lp::solve(model);
    if (!sol.optimal()) {
        throw Error(ErrorCode::kLpFailure, "arbitrage LP failed");
    }
    out.gain = -sol.objective;
    out.arbitrage = out.gain > 1e-9 * std::max(1.0, scale) * static_cast<double>(supp.size());
    if (out.arbitrage) {
        for (std::size_t n = 0; n < var.size(); ++n) {
            if (var[n] >= 0) {
                out.witness.holdings[n] = sol.x[static_cast<std::size_t>(var[n])];
            }
        }
    }
    return out;
}

std::optional<Measure> find_emm(const ScenarioLattice& lattice, const Measure& measure) {
    if (measure.lattice_id() != lattice.fingerprint()) {
        throw Error(ErrorCode::kLatticeMismatch, "measure does not live on this lattice");
    }
    if (martingale_residual(lattice, measure.weights()) <= 1e-12) {
        return measure;
    }
    const auto supp = measure.support();
    std::vector<int> var(lattice.num_leaves(), -1);
    lp::Model model;
    const int s = model.add_variable(-1.0, -lp::kInfinity, 1.0);
    const int sum = model.add_row(lp::RowSense::kEqual, 1.0);
    for (std::size_t l : supp) {
        var[l] = model.add_variable(0.0);
        model.add_coefficient(sum, var[l], 1.0);
        const int floor = model.add_row(lp::RowSense::kGreaterEqual, 0.0);
        model.add_coefficient(floor, var[l], 1.0);
        model.add_coefficient(floor, s, -1.0);
    }
    for (const auto& row : martingale_rows(lattice)) {
        int r = -1;
        for (const auto& [l, ds] : row.terms) {
            if (var[l] < 0 || ds == 0.0) {
                continue;
            }
            if (r < 0) {
                r = model.add_row(lp::RowSense::kEqual, 0.0);
            }
            model.add_coefficient(r, var[l], ds);
        }
    }
    const auto sol = lp::solve(model);
    if (sol.status == lp::Status::kInfeasible) {
        return std::nullopt;
    }
    if (!sol.optimal()) {
        throw Error(ErrorCode::kLpFailure, "martingale measure LP failed");
    }
    if (!(sol.x[static_cast<std::size_t>(s)] > 1e-10)) {
        return std::nullopt;
    }
    std::vector<double> w(lattice.num_leaves(), 0.0);
    for (std::size_t l : supp) {
        w[l] = std::max(0.0, sol.x[static_cast<std::size_t>(var[l])]);
    }
    w = project_martingale(lattice, w);
    double total = 0.0;
    for (std::size_t l : supp) {
        if (!(w[l] > 0.0)) {
            return std::nullopt;
        }
        total += w[l];
    }
    for (double& v : w) {
        v /= total;
    }
    return Measure(lattice, std::move(w));
}

namespace {

std::vector<double> node_mass(const ScenarioLattice& lattice, const Measure& measure) {
    std::vector<double> mass(lattice.num_nodes(), 0.0);
    for (std::size_t n = 0; n < lattice.num_nodes(); ++n) {
        for (std::size_t l : lattice.leaves_under(static_cast<int>(n))) {
            mass[n] += measure[l];
        }
    }
    return mass;
}

bool same_point(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

}  // namespace

Perturbation perturb_na(const ScenarioLattice& lattice, const Measure& measure, double eps, const Measure* base) {
    if (!(eps > 0.0) || !(eps < 1.0)) {
        throw Error(ErrorCode::kInvalidEpsilon, "epsilon must lie in (0, 1)");
    }
    if (measure.lattice_id() != lattice.fingerprint() || (base != nullptr && base->lattice_id() != lattice.fingerprint())) {
        throw Error(ErrorCode::kLatticeMismatch, "measure does not live on this lattice");
    }
    const int T = lattice.horizon();
    const auto mass = node_mass(lattice, measure);
    const auto base_mass = base != nullptr ? node_mass(lattice, *base) : std::vector<double>{};

    struct Item {
        int orig;
        double price;
        double money;
        int time;
        std::int64_t parent;
        double weight;
    };
    std::vector<NodeSpec> specs;
    std::vector<int> origin;
    std::vector<double> leaf_weight;  // by new spec id
    std::vector<Item> stack{{0, lattice.node(0).price, lattice.node(0).money_market, 0, -1, 1.0}};

    struct Kid {
        int orig;
        double price;
        double money;
        double prob;
    };
    // depth-first with an explicit stack; ids follow creation order
    while (!stack.empty()) {
        const Item it = stack.back();
        stack.pop_back();
        const auto id = static_cast<std::int64_t>(specs.size());
        NodeSpec spec;
        spec.id = id;
        if (it.parent >= 0) {
            spec.parent = it.parent;
        }
        spec.time = it.time;
        spec.money_market = it.money;
        spec.price = it.price;
        specs.push_back(spec);
        origin.push_back(it.orig);
        leaf_weight.push_back(it.time == T ? it.weight : 0.0);
        if (it.time == T) {
            continue;
        }

        std::vector<Kid> kids;
        double own = 0.0;
        double sym = 1.0;
        if (it.orig >= 0) {
            const auto& node = lattice.node(it.orig);
            own = mass[static_cast<std::size_t>(it.orig)] > 0.0 ? eps : 0.0;
            double lean = 0.0;
            if (base != nullptr && base_mass[static_cast<std::size_t>(it.orig)] > 0.0) {
                lean = (1.0 - eps);  // weight of the base conditional inside the base kernel
            }
            sym = (1.0 - own) * (1.0 - lean);
            for (int c : node.children) {
                double p = 0.0;
                if (own > 0.0) {
                    p += own * mass[static_cast<std::size_t>(c)] / mass[static_cast<std::size_t>(it.orig)];
                }
                if (lean > 0.0) {
                    p += (1.0 - own) * lean * base_mass[static_cast<std::size_t>(c)] /
                         base_mass[static_cast<std::size_t>(it.orig)];
                }
                kids.push_back({c, lattice.node(c).price, lattice.node(c).money_market, p});
            }
        }
        const double child_money = kids.empty() ? it.money : kids.front().money;
        for (double f : {1.0 - eps, 1.0 + eps}) {
            const double price = f * it.price;
            bool merged = false;
            for (auto& k : kids) {
                if (same_point(k.price, price) && same_point(k.money, child_money)) {
                    k.prob += 0.5 * sym;
                    merged = true;
                    break;
                }
            }
            if (!merged) {
                kids.push_back({-1, price, child_money, 0.5 * sym});
            }
        }
        // push in reverse so children are created in list order
        for (auto k = kids.rbegin(); k != kids.rend(); ++k) {
            stack.push_back({k->orig, k->price, k->money, it.time + 1, id, it.weight * k->prob});
        }
    }

    Perturbation out{ScenarioLattice::build(T, specs), {}, {}};
    std::vector<double> w(out.lattice.num_leaves(), 0.0);
    std::map<std::int64_t, std::size_t> leaf_of_spec;
    for (const auto& node : out.lattice.nodes()) {
        if (node.time == T) {
            leaf_of_spec[node.source_id] = out.lattice.leaf_index(node.id);
        }
    }
    out.leaf_map.assign(lattice.num_leaves(), 0);
    for (std::size_t k = 0; k < specs.size(); ++k) {
        if (specs[k].time != T) {
            continue;
        }
        const std::size_t leaf = leaf_of_spec.at(specs[k].id);
        w[leaf] = leaf_weight[k];
        if (origin[k] >= 0) {
            out.leaf_map[lattice.leaf_index(origin[k])] = leaf;
        }
    }
    double total = 0.0;
    for (double v : w) {
        total += v;
    }
    for (double& v : w) {
        v /= total;
    }
    out.measure = Measure(out.lattice, std::move(w));
    return out;
}

Measure embed(const Perturbation& perturbation, const Measure& measure) {
    if (measure.size() != perturbation.leaf_map.size()) {
        throw Error(ErrorCode::kLatticeMismatch, "measure does not match the perturbed lattice's source");
    }
    std::vector<double> w(perturbation.lattice.num_leaves(), 0.0);
    for (std::size_t l = 0; l < measure.size(); ++l) {
        w[perturbation.leaf_map[l]] += measure[l];
    }
    return Measure(perturbation.lattice, std::move(w));
}

bool NaReport::holds() const {
    return std::all_of(entries.begin(), entries.end(), [](const NaEntry& e) { return e.status == "holds"; });
}

std::vector<double> epsilon_grid() { return {0.5, 0.1, 0.05, 0.01, 0.005, 0.001, 5e-4, 1e-4, 5e-5, 1e-5}; }

namespace {

// Leaves of `within` that carry mass under some martingale measure supported there.
std::vector<bool> martingale_support(const ScenarioLattice& lattice, const std::vector<bool>& within) {
    const std::size_t n = lattice.num_leaves();
    lp::Model model;
    std::vector<int> r(n, -1);
    std::vector<int> z(n, -1);
    for (std::size_t l = 0; l < n; ++l) {
        if (!within[l]) {
            continue;
        }
        r[l] = model.add_variable(0.0);
        z[l] = model.add_variable(-1.0, 0.0, 1.0);
        const int row = model.add_row(lp::RowSense::kGreaterEqual, 0.0);
        model.add_coefficient(row, r[l], 1.0);
        model.add_coefficient(row, z[l], -1.0);
    }
    for (const auto& row : martingale_rows(lattice)) {
        int k = -1;
        for (const auto& [l, ds] : row.terms) {
            if (r[l] < 0 || ds == 0.0) {
                continue;
            }
            if (k < 0) {
                k = model.add_row(lp::RowSense::kEqual, 0.0);
            }
            model.add_coefficient(k, r[l], ds);
        }
    }
    std::vector<bool> out(n, false);
    if (model.num_variables() == 0) {
        return out;
    }
    const auto sol = lp::solve(model);
    if (!sol.optimal()) {
        throw Error(ErrorCode::kLpFailure, "martingale support LP failed");
    }
    for (std::size_t l = 0; l < n; ++l) {
        out[l] = z[l] >= 0 && sol.x[static_cast<std::size_t>(z[l])] > 0.5;
    }
    return out;
}

NaReport check_hull(const ScenarioLattice& lattice, const FiniteHull& hull) {
    const std::size_t K = hull.generators.size();
    const std::size_t n = lattice.num_leaves();
    std::vector<bool> alive(K, true);
    for (;;) {
        std::vector<bool> within(n, false);
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t l = 0; l < n && alive[k]; ++l) {
                within[l] = within[l] || hull.generators[k][l] > 0.0;
            }
        }
        const auto good = martingale_support(lattice, within);
        bool changed = false;
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t l = 0; l < n && alive[k]; ++l) {
                if (hull.generators[k][l] > 0.0 && !good[l]) {
                    alive[k] = false;
                    changed = true;
                }
            }
        }
        if (!changed) {
            break;
        }
    }
    std::size_t live = 0;
    for (bool a : alive) {
        live += a ? 1 : 0;
    }
    NaReport report;
    for (std::size_t k = 0; k < K; ++k) {
        NaEntry e;
        e.label = "generator " + std::to_string(k);
        if (!alive[k]) {
            e.status = "fails";
            e.detail = "no arbitrage-free mixture of generators dominates it";
            report.entries.push_back(std::move(e));
            continue;
        }
        std::vector<double> mix(K, 0.0);
        if (!admits_arbitrage(lattice, hull.generators[k]).arbitrage) {
            mix[k] = 1.0;
            e.detail = "arbitrage-free itself";
        } else {
            for (std::size_t j = 0; j < K; ++j) {
                mix[j] = alive[j] ? 1.0 / static_cast<double>(live) : 0.0;
            }
            e.detail = "dominated by the uniform mixture of " + std::to_string(live) + " generators";
        }
        std::vector<double> w(n, 0.0);
        for (std::size_t j = 0; j < K; ++j) {
            for (std::size_t l = 0; l < n; ++l) {
                w[l] += mix[j] * hull.generators[j][l];
            }
        }
        const Measure dominating(lattice, std::move(w));
        if (admits_arbitrage(lattice, dominating).arbitrage) {
            e.status = "undetermined";
            e.detail = "mixture re-check found arbitrage";
        } else {
            e.status = "holds";
            e.mixture = std::move(mix);
        }
        report.entries.push_back(std::move(e));
    }
    return report;
}

NaEntry perturbation_entry(const AmbiguitySet& set, const std::string& label, const Measure& P) {
    const auto& lattice = set.lattice();
    const auto& spec = set.spec();
    NaEntry e;
    e.label = label;
    const Measure* base = nullptr;
    if (const auto* ball = std::get_if<WassersteinBall>(&spec)) {
        base = &ball->reference;
    }
    for (double eps : epsilon_grid()) {
        const Perturbation pert = perturb_na(lattice, P, eps, base);
        bool member = true;
        if (const auto* ball = std::get_if<WassersteinBall>(&spec)) {
            const AmbiguitySet moved(pert.lattice, WassersteinBall{embed(pert, ball->reference), ball->radius, ball->metric});
            member = moved.contains(pert.measure).member;
        } else if (const auto* ms = std::get_if<MomentSet>(&spec)) {
            const AmbiguitySet moved(pert.lattice, *ms);
            member = moved.contains(pert.measure).member;
        }
        if (member && !admits_arbitrage(pert.lattice, pert.measure).arbitrage) {
            e.status = "holds";
            e.epsilon = eps;
            e.detail = "perturbed measure is arbitrage-free and in the set (" +
                       std::to_string(pert.lattice.num_leaves()) + " leaves)";
            return e;
        }
    }
    e.status = "undetermined";
    e.detail = "no epsilon in the grid gave an arbitrage-free member";
    return e;
}

}  // namespace

NaReport check_na(const AmbiguitySet& set) {
    const auto& lattice = set.lattice();
    if (const auto* hull = std::get_if<FiniteHull>(&set.spec())) {
        return check_hull(lattice, *hull);
    }
    NaReport report;
    const std::size_t n = lattice.num_leaves();
    const int T = lattice.horizon();
    std::vector<double> up(n);
    for (std::size_t l = 0; l < n; ++l) {
        up[l] = lattice.node(lattice.path_nodes(l)[static_cast<std::size_t>(T)]).price;
    }
    std::vector<double> down(up);
    for (double& v : down) {
        v = -v;
    }
    report.entries.push_back(perturbation_entry(set, "anchor", set.anchor()));
    if (!set.penalised()) {
        report.entries.push_back(perturbation_entry(set, "argmin E[S_T]", set.inner_min(up).measure));
        report.entries.push_back(perturbation_entry(set, "argmax E[S_T]", set.inner_min(down).measure));
    }
    return report;
}

}  // namespace rumax

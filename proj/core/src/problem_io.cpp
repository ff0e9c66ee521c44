#include "rumax/problem_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace rumax {

using nlohmann::json;

namespace {

const json& field(const json& obj, const std::string& key, const std::string& ptr) {
    if (!obj.is_object()) {
        throw SchemaError(ptr, "expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError(ptr + "/" + key, "missing field");
    }
    return *it;
}

double number(const json& j, const std::string& ptr) {
    if (!j.is_number()) {
        throw SchemaError(ptr, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw SchemaError(ptr, "expected a finite number");
    }
    return v;
}

double number_or(const json& obj, const std::string& key, const std::string& ptr, double fallback) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : number(*it, ptr + "/" + key);
}

double positive(const json& obj, const std::string& key, const std::string& ptr) {
    const double v = number(field(obj, key, ptr), ptr + "/" + key);
    if (!(v > 0.0)) {
        throw SchemaError(ptr + "/" + key, key + " must be > 0");
    }
    return v;
}

std::int64_t integer(const json& j, const std::string& ptr) {
    if (!j.is_number_integer()) {
        throw SchemaError(ptr, "expected an integer");
    }
    return j.get<std::int64_t>();
}

std::vector<double> numbers(const json& j, const std::string& ptr) {
    if (!j.is_array()) {
        throw SchemaError(ptr, "expected an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(number(j[i], ptr + "/" + std::to_string(i)));
    }
    return out;
}

// Leaf index by the node id used in the file.
std::map<std::int64_t, std::size_t> leaf_ids(const ScenarioLattice& lattice) {
    std::map<std::int64_t, std::size_t> out;
    for (const auto& n : lattice.nodes()) {
        if (n.time == lattice.horizon()) {
            out[n.source_id] = lattice.leaf_index(n.id);
        }
    }
    return out;
}

std::vector<double> leaf_values(const ScenarioLattice& lattice, const json& j, const std::string& ptr) {
    const std::size_t n = lattice.num_leaves();
    if (j.is_array()) {
        auto v = numbers(j, ptr);
        if (v.size() != n) {
            throw Error(ErrorCode::kValidationError, ptr + ": " + std::to_string(v.size()) + " values for " +
                                                         std::to_string(n) + " leaves (different lattice?)");
        }
        return v;
    }
    if (!j.is_object()) {
        throw SchemaError(ptr, "expected an array or an object keyed by leaf id");
    }
    const auto ids = leaf_ids(lattice);
    std::vector<double> v(n, 0.0);
    for (const auto& [key, val] : j.items()) {
        std::int64_t id = 0;
        try {
            std::size_t used = 0;
            id = std::stoll(key, &used);
            if (used != key.size()) {
                throw std::invalid_argument(key);
            }
        } catch (const std::exception&) {
            throw SchemaError(ptr + "/" + key, "keys must be leaf ids");
        }
        auto it = ids.find(id);
        if (it == ids.end()) {
            throw Error(ErrorCode::kValidationError, ptr + "/" + key + ": no such leaf on this lattice");
        }
        v[it->second] = number(val, ptr + "/" + key);
    }
    return v;
}

Utility parse_utility(const ScenarioLattice& lattice, const json& j, const std::string& ptr) {
    const json& type = field(j, "type", ptr);
    if (!type.is_string()) {
        throw SchemaError(ptr + "/type", "expected a string");
    }
    std::vector<double> scales;
    if (auto it = j.find("leaf_scales"); it != j.end()) {
        scales = leaf_values(lattice, *it, ptr + "/leaf_scales");
        for (std::size_t l = 0; l < scales.size(); ++l) {
            if (!(scales[l] > 0.0)) {
                throw SchemaError(ptr + "/leaf_scales", "scales must be > 0");
            }
        }
    } else if (j.value("scale_by_money_market", false)) {
        for (std::size_t l = 0; l < lattice.num_leaves(); ++l) {
            scales.push_back(lattice.path(l).back().money_market);
        }
    }
    const auto kind = type.get<std::string>();
    if (kind == "exponential") {
        return Utility(ExponentialUtility{positive(j, "lambda", ptr)}, scales);
    }
    if (kind == "tabulated") {
        TabulatedUtility t;
        const json& knots = field(j, "knots", ptr);
        if (!knots.is_array() || knots.empty()) {
            throw SchemaError(ptr + "/knots", "expected a non-empty array");
        }
        for (std::size_t i = 0; i < knots.size(); ++i) {
            const std::string kp = ptr + "/knots/" + std::to_string(i);
            const auto pair = numbers(knots[i], kp);
            if (pair.size() != 2) {
                throw SchemaError(kp, "expected [x, u]");
            }
            if (i > 0 && !(pair[0] > t.knots.back().x)) {
                throw SchemaError(kp, "knot x values must increase");
            }
            t.knots.push_back({pair[0], pair[1]});
        }
        t.right_slope = number_or(j, "right_slope", ptr, 0.0);
        if (t.right_slope < 0.0) {
            throw SchemaError(ptr + "/right_slope", "right_slope must be >= 0");
        }
        if (auto it = j.find("left_tail"); it != j.end()) {
            t.left_tail.slope = number_or(*it, "slope", ptr + "/left_tail", t.left_tail.slope);
            t.left_tail.curvature = number_or(*it, "curvature", ptr + "/left_tail", t.left_tail.curvature);
            if (t.left_tail.curvature < 0.0) {
                throw SchemaError(ptr + "/left_tail/curvature", "curvature must be >= 0");
            }
        }
        return Utility(t, scales);
    }
    throw SchemaError(ptr + "/type", "unknown utility type '" + kind + "'");
}

MetricParams parse_metric(const json& j, const std::string& ptr) {
    MetricParams m;
    m.rho = number_or(j, "rho", ptr, m.rho);
    m.kappa = number_or(j, "kappa", ptr, m.kappa);
    m.p = number_or(j, "p", ptr, m.p);
    if (m.rho < 0.0) {
        throw SchemaError(ptr + "/rho", "rho must be >= 0");
    }
    if (m.kappa < 1.0) {
        throw SchemaError(ptr + "/kappa", "kappa must be >= 1");
    }
    if (!(m.p > 1.0)) {
        throw SchemaError(ptr + "/p", "p must be > 1");
    }
    return m;
}

AmbiguitySpec parse_ambiguity(const ScenarioLattice& lattice, const json& j, const std::string& ptr) {
    const json& type = field(j, "type", ptr);
    if (!type.is_string()) {
        throw SchemaError(ptr + "/type", "expected a string");
    }
    const auto kind = type.get<std::string>();
    if (kind == "hull") {
        const json& gens = field(j, "generators", ptr);
        if (!gens.is_array() || gens.empty()) {
            throw SchemaError(ptr + "/generators", "expected a non-empty array");
        }
        FiniteHull hull;
        for (std::size_t i = 0; i < gens.size(); ++i) {
            hull.generators.push_back(measure_from_json(lattice, gens[i], ptr + "/generators/" + std::to_string(i)));
        }
        return hull;
    }
    if (kind == "moment") {
        MomentSet ms;
        ms.undiscounted = j.value("undiscounted", false);
        const json& cons = field(j, "constraints", ptr);
        if (!cons.is_array() || cons.empty()) {
            throw SchemaError(ptr + "/constraints", "expected a non-empty array");
        }
        for (std::size_t i = 0; i < cons.size(); ++i) {
            const std::string cp = ptr + "/constraints/" + std::to_string(i);
            MomentConstraint c;
            c.c_exponent = number(field(cons[i], "c", cp), cp + "/c");
            c.d_exponent = number(field(cons[i], "d", cp), cp + "/d");
            if (!(c.c_exponent < 0.0)) {
                throw SchemaError(cp + "/c", "c must be < 0");
            }
            if (!(c.d_exponent > 0.0)) {
                throw SchemaError(cp + "/d", "d must be > 0");
            }
            c.c_bounds = numbers(field(cons[i], "C", cp), cp + "/C");
            c.d_bounds = numbers(field(cons[i], "D", cp), cp + "/D");
            ms.constraints.push_back(std::move(c));
        }
        return ms;
    }
    if (kind == "wasserstein_ball") {
        WassersteinBall b;
        b.radius = positive(j, "radius", ptr);
        b.metric = parse_metric(j, ptr);
        b.reference = measure_from_json(lattice, field(j, "reference", ptr), ptr + "/reference");
        return b;
    }
    if (kind == "wasserstein_penalty") {
        WassersteinPenalty p;
        p.weight = positive(j, "weight", ptr);
        p.metric = parse_metric(j, ptr);
        p.reference = measure_from_json(lattice, field(j, "reference", ptr), ptr + "/reference");
        return p;
    }
    throw SchemaError(ptr + "/type", "unknown ambiguity type '" + kind + "'");
}

json metric_json(const MetricParams& m) { return {{"rho", m.rho}, {"kappa", m.kappa}, {"p", m.p}}; }

}  // namespace

Measure measure_from_json(const ScenarioLattice& lattice, const json& j, const std::string& pointer) {
    auto w = leaf_values(lattice, j, pointer);
    try {
        return Measure(lattice, std::move(w));
    } catch (const Error& e) {
        throw SchemaError(pointer, e.what());
    }
}

json measure_to_json(const Measure& measure) {
    return json(std::vector<double>(measure.weights().begin(), measure.weights().end()));
}

Problem parse_problem(const json& doc) {
    if (!doc.is_object()) {
        throw SchemaError("", "expected an object");
    }
    const int T = static_cast<int>(integer(field(doc, "horizon", ""), "/horizon"));
    const json& nodes = field(doc, "nodes", "");
    if (!nodes.is_array()) {
        throw SchemaError("/nodes", "expected an array");
    }
    std::vector<NodeSpec> specs;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string np = "/nodes/" + std::to_string(i);
        NodeSpec s;
        s.id = integer(field(nodes[i], "id", np), np + "/id");
        if (auto it = nodes[i].find("parent"); it != nodes[i].end() && !it->is_null()) {
            s.parent = integer(*it, np + "/parent");
        }
        s.time = static_cast<int>(integer(field(nodes[i], "t", np), np + "/t"));
        s.money_market = number(field(nodes[i], "m", np), np + "/m");
        s.price = number(field(nodes[i], "s", np), np + "/s");
        specs.push_back(s);
    }
    ScenarioLattice lattice;
    try {
        lattice = ScenarioLattice::build(T, specs);
    } catch (const Error& e) {
        throw Error(ErrorCode::kValidationError, std::string("/nodes: ") + e.what());
    }

    Claim claim = Claim::constant(lattice, 0.0);
    if (auto it = doc.find("claim"); it != doc.end()) {
        if (it->is_object() && it->contains("constant")) {
            claim = Claim::constant(lattice, number((*it)["constant"], "/claim/constant"));
        } else {
            claim = Claim(lattice, leaf_values(lattice, *it, "/claim"));
        }
    }
    Utility utility = parse_utility(lattice, field(doc, "utility", ""), "/utility");
    AmbiguitySpec amb = parse_ambiguity(lattice, field(doc, "ambiguity", ""), "/ambiguity");

    SolverTolerances tol;
    if (auto it = doc.find("tolerances"); it != doc.end()) {
        tol.primal_tol = number_or(*it, "primal_tol", "/tolerances", tol.primal_tol);
        tol.dual_tol = number_or(*it, "dual_tol", "/tolerances", tol.dual_tol);
        if (auto m = it->find("max_iters"); m != it->end()) {
            tol.max_iters = static_cast<int>(integer(*m, "/tolerances/max_iters"));
        }
    }
    Problem problem{std::move(lattice), std::move(claim), std::move(utility), std::move(amb), tol};
    validate(problem);
    try {
        const AmbiguitySet set(problem.lattice, problem.ambiguity);
    } catch (const Error& e) {
        throw Error(ErrorCode::kValidationError, std::string("/ambiguity: ") + e.what());
    }
    return problem;
}

Problem load_problem(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("", "cannot read " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError("", std::string("not valid JSON: ") + e.what());
    }
    return parse_problem(doc);
}

json to_json(const Problem& problem) {
    json doc;
    doc["horizon"] = problem.lattice.horizon();
    json nodes = json::array();
    for (const auto& s : problem.lattice.to_specs()) {
        json n{{"id", s.id}, {"t", s.time}, {"m", s.money_market}, {"s", s.price}};
        n["parent"] = s.parent ? json(*s.parent) : json(nullptr);
        nodes.push_back(std::move(n));
    }
    doc["nodes"] = std::move(nodes);
    doc["claim"] = std::vector<double>(problem.claim.values().begin(), problem.claim.values().end());

    const auto& u = problem.utility;
    json uj;
    if (const auto* e = std::get_if<ExponentialUtility>(&u.base())) {
        uj = {{"type", "exponential"}, {"lambda", e->lambda}};
    } else {
        const auto& t = std::get<TabulatedUtility>(u.base());
        json knots = json::array();
        for (const auto& k : t.knots) {
            knots.push_back({k.x, k.u});
        }
        uj = {{"type", "tabulated"},
              {"knots", knots},
              {"right_slope", t.right_slope},
              {"left_tail", {{"slope", t.left_tail.slope}, {"curvature", t.left_tail.curvature}}}};
    }
    if (!u.leaf_scales().empty()) {
        uj["leaf_scales"] = u.leaf_scales();
    }
    doc["utility"] = std::move(uj);

    json aj;
    if (const auto* hull = std::get_if<FiniteHull>(&problem.ambiguity)) {
        json gens = json::array();
        for (const auto& g : hull->generators) {
            gens.push_back(measure_to_json(g));
        }
        aj = {{"type", "hull"}, {"generators", gens}};
    } else if (const auto* ms = std::get_if<MomentSet>(&problem.ambiguity)) {
        json cons = json::array();
        for (const auto& c : ms->constraints) {
            cons.push_back({{"c", c.c_exponent}, {"d", c.d_exponent}, {"C", c.c_bounds}, {"D", c.d_bounds}});
        }
        aj = {{"type", "moment"}, {"constraints", cons}, {"undiscounted", ms->undiscounted}};
    } else if (const auto* b = std::get_if<WassersteinBall>(&problem.ambiguity)) {
        aj = metric_json(b->metric);
        aj["type"] = "wasserstein_ball";
        aj["radius"] = b->radius;
        aj["reference"] = measure_to_json(b->reference);
    } else {
        const auto& p = std::get<WassersteinPenalty>(problem.ambiguity);
        aj = metric_json(p.metric);
        aj["type"] = "wasserstein_penalty";
        aj["weight"] = p.weight;
        aj["reference"] = measure_to_json(p.reference);
    }
    doc["ambiguity"] = std::move(aj);
    doc["tolerances"] = {{"primal_tol", problem.tolerances.primal_tol},
                         {"dual_tol", problem.tolerances.dual_tol},
                         {"max_iters", problem.tolerances.max_iters}};
    return doc;
}

json to_json(const DualCertificate& cert) {
    return {{"q", cert.q},
            {"Q", measure_to_json(cert.Q)},
            {"P", measure_to_json(cert.P)},
            {"value", cert.value},
            {"expectation", cert.expectation},
            {"divergence", cert.divergence},
            {"alpha", cert.alpha},
            {"martingale_residual", cert.martingale_residual}};
}

DualCertificate certificate_from_json(const ScenarioLattice& lattice, const json& j) {
    DualCertificate c;
    c.q = number(field(j, "q", ""), "/q");
    c.Q = measure_from_json(lattice, field(j, "Q", ""), "/Q");
    c.P = measure_from_json(lattice, field(j, "P", ""), "/P");
    c.value = number(field(j, "value", ""), "/value");
    c.expectation = number_or(j, "expectation", "", 0.0);
    c.divergence = number_or(j, "divergence", "", 0.0);
    c.alpha = number_or(j, "alpha", "", 0.0);
    c.martingale_residual = number_or(j, "martingale_residual", "", 0.0);
    return c;
}

json to_json(const ScenarioLattice& lattice, const SolveResult& result) {
    json strategy = json::array();
    for (int n : lattice.non_terminal_nodes()) {
        strategy.push_back({{"node", n}, {"theta", result.strategy.holdings[static_cast<std::size_t>(n)]}});
    }
    return {{"primal_value", result.primal_value},
            {"dual_value", result.certificate.value},
            {"gap", result.gap},
            {"converged", result.converged},
            {"weak_duality_ok", result.weak_duality_ok},
            {"iterations", result.iterations},
            {"box_radius", result.box_radius},
            {"beyond_box", result.beyond_box},
            {"strategy", strategy},
            {"worst_case", measure_to_json(result.worst_case)},
            {"certificate", to_json(result.certificate)}};
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trace_csv(const SolveResult& result) {
    std::ostringstream os;
    os << "iteration,lower,upper,gap,columns\n";
    for (const auto& r : result.trace) {
        os << r.iteration << ',' << format_double(r.lower) << ',' << format_double(r.upper) << ','
           << format_double(r.upper - r.lower) << ',' << r.columns << '\n';
    }
    return os.str();
}

}  // namespace rumax

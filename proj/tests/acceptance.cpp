// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rumax/arbitrage.hpp"
#include "rumax/generator.hpp"
#include "rumax/problem_io.hpp"
#include "rumax/solver.hpp"
#include "rumax/transport.hpp"
#include "rumax/utility.hpp"
#include "rumax_cli/cli.hpp"

namespace fs = std::filesystem;
using namespace rumax;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---- criteria 1 and 2 share one sweep --------------------------------------

Shape sweep_shape(int i) {
    Shape s;
    s.horizon = 1 + i % 3;
    s.branching = 2 + (i / 3) % 3;
    s.ambiguity = static_cast<AmbiguityKind>(i % 4);
    s.utility = (i / 12) % 2 ? UtilityKind::kTabulated : UtilityKind::kExponential;
    return s;
}

struct SweepRow {
    bool weak_ok = true;
    bool converged = false;
    double rel_gap = 0.0;
    std::string note;
};

struct Sweep {
    std::vector<SweepRow> rows;
    double seconds = 0.0;
    std::string error;
};

SweepRow audit_instance(const Problem& p) {
    SweepRow row;
    const AmbiguitySet set(p.lattice, p.ambiguity);
    const SolveResult r = solve(p);

    // every primal value we can produce ...
    std::vector<double> primal{r.primal_value, evaluate_strategy(p, set, Strategy::zero(p.lattice)).value};
    for (const auto& rec : r.trace) {
        primal.push_back(rec.lower);
    }
    // ... against every feasible certificate we can produce
    std::vector<DualCertificate> certs{r.certificate};
    const std::vector<double> zero(p.lattice.num_leaves(), 0.0);
    certs.push_back(make_certificate(p, set, zero, set.anchor()));
    if (const auto emm = find_emm(p.lattice, set.anchor())) {
        for (double q : {0.5, 1.0, 2.0}) {
            std::vector<double> rq(emm->weights().begin(), emm->weights().end());
            for (auto& v : rq) v *= q;
            certs.push_back(make_certificate(p, set, rq, set.anchor()));
        }
    }
    double upper = std::numeric_limits<double>::infinity();
    for (const auto& c : certs) {
        std::string why;
        if (!certificate_valid(p, c, &why)) {
            if (&c == &certs.front()) {
                row.weak_ok = false;
                row.note = "solver certificate invalid: " + why;
            }
            continue;
        }
        upper = std::min(upper, c.value);
    }
    for (const auto& rec : r.trace) {
        upper = std::min(upper, rec.upper);
    }
    for (double v : primal) {
        if (v > upper + 1e-9) {
            row.weak_ok = false;
            row.note = "primal " + fmt("%.12g", v) + " > dual " + fmt("%.12g", upper);
        }
    }
    row.converged = r.converged;
    row.rel_gap = std::abs(r.certificate.value - r.primal_value) / (1.0 + std::abs(r.primal_value));
    return row;
}

const Sweep& sweep() {
    static const Sweep s = [] {
        Sweep out;
        const auto t0 = Clock::now();
        for (int i = 0; i < 200; ++i) {
            try {
                const auto g = generate_instance(static_cast<std::uint64_t>(1000 + i), sweep_shape(i));
                out.rows.push_back(audit_instance(g.problem));
            } catch (const std::exception& e) {
                out.error = "instance " + std::to_string(i) + ": " + e.what();
                out.rows.push_back({false, false, 0.0, e.what()});
            }
        }
        out.seconds = seconds_since(t0);
        return out;
    }();
    return s;
}

Outcome weak_duality() {
    const Sweep& s = sweep();
    int bad = 0;
    std::string first;
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        if (!s.rows[i].weak_ok) {
            if (bad++ == 0) first = " first: #" + std::to_string(i) + " " + s.rows[i].note;
        }
    }
    const bool pass = bad == 0 && s.seconds <= 300.0;
    return {pass, std::to_string(s.rows.size()) + " instances, " + std::to_string(bad) + " violations, " +
                      fmt("%.1fs", s.seconds) + first};
}

Outcome strong_duality() {
    const Sweep& s = sweep();
    int conv = 0, wide = 0;
    double worst = 0.0;
    for (const auto& r : s.rows) {
        if (r.converged) {
            ++conv;
            worst = std::max(worst, r.rel_gap);
            wide += r.rel_gap > 1e-3;
        }
    }
    const double frac = static_cast<double>(conv) / static_cast<double>(s.rows.size());
    const bool pass = frac >= 0.95 && wide == 0 && s.seconds <= 900.0;
    return {pass, std::to_string(conv) + "/" + std::to_string(s.rows.size()) + " converged, worst relative gap " +
                      fmt("%.2e", worst)};
}

// ---- criterion 3 ------------------------------------------------------------

Outcome entropic_binomial() {
    const auto t0 = Clock::now();
    const Problem p = load_problem(fs::path(RUMAX_SOURCE_DIR) / "problems" / "binomial_entropic.json");
    const EntropicResult e = entropic_value(p);
    const double dt = seconds_since(t0);
    // closed forms: first-order condition e^{-theta}/2 = e^{theta/2}/4
    const double theta_star = 2.0 / 3.0 * std::log(2.0);
    const double u_star = -0.5 * std::exp(-theta_star) - 0.5 * std::exp(0.5 * theta_star);
    const double w_star = -std::log(-u_star);
    const double theta = e.solve.strategy.holdings[0];
    const double err = std::max({std::abs(theta - theta_star), std::abs(e.solve.primal_value - u_star),
                                 std::abs(e.primal - w_star), std::abs(e.dual - w_star), std::abs(e.Q[0] - 1.0 / 3.0),
                                 std::abs(e.Q[1] - 2.0 / 3.0)});
    const bool pass = err <= 1e-6 && std::abs(u_star + 0.944940) <= 1e-6 && std::abs(w_star - 0.056633) <= 1e-6 &&
                      dt <= 1.0;
    return {pass, "max deviation " + fmt("%.2e", err) + ", theta " + fmt("%.9f", theta) + ", U " +
                      fmt("%.9f", e.solve.primal_value) + ", " + fmt("%.3fs", dt)};
}

// ---- criterion 4 ------------------------------------------------------------

Outcome leafwise_identity() {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> nl(2, 8);
    std::uniform_real_distribution<double> qd(0.05, 5.0);
    const double lambdas[] = {0.5, 1.0, 2.0};
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const int n = nl(rng);
        std::vector<double> kids;
        for (int i = 0; i < n; ++i) kids.push_back(0.5 + 1.5 * i / (n - 1));
        const auto lat = fixture::one_period(1.0, kids);
        const Measure Q = fixture::random_measure(rng, lat);
        const Measure P = fixture::random_measure(rng, lat);
        const double q = qd(rng);
        const double lam = lambdas[k % 3];
        const Utility u = Utility::exponential(lam);
        // leafwise sup_x { P u(x) - q Q x } by golden section
        double lhs = 0.0;
        for (std::size_t l = 0; l < lat.num_leaves(); ++l) {
            lhs += oracle::golden_max([&](double x) { return P[l] * u.value(l, x) - q * Q[l] * x; }, -80.0, 80.0);
        }
        const double rhs = divergence_dv(Conjugate(u), q, Q, P);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return {worst <= 1e-7, "50 tuples, worst |difference| " + fmt("%.2e", worst)};
}

// ---- criterion 5 ------------------------------------------------------------

Outcome ftap_agreement() {
    std::mt19937_64 rng(5);
    int disagree = 0, arb = 0;
    for (int k = 0; k < 100; ++k) {
        const auto lat = fixture::random_lattice(rng, 1 + k % 2, 3, 0.3);
        const Measure P = fixture::random_measure(rng, lat, 0.3);
        const auto a = admits_arbitrage(lat, P);
        const auto q = find_emm(lat, P);
        arb += a.arbitrage;
        bool ok = a.arbitrage == !q.has_value();
        if (a.arbitrage) {
            // witness: nonnegative wealth on supp(P), positive somewhere
            const std::vector<double> th(a.witness.holdings.begin(), a.witness.holdings.end());
            double gain = 0.0;
            for (std::size_t l : P.support()) {
                const double w = oracle::wealth(lat, th, l);
                ok = ok && w >= -1e-9;
                gain += w;
            }
            ok = ok && gain > 1e-9;
        } else if (q) {
            const std::vector<double> w(q->weights().begin(), q->weights().end());
            ok = ok && oracle::martingale_gap(lat, w) <= 1e-9;
            for (std::size_t l = 0; l < lat.num_leaves(); ++l) {
                ok = ok && ((P[l] > 0.0) == (w[l] > 0.0));
            }
        }
        disagree += !ok;
    }
    return {disagree == 0, "100 cases (" + std::to_string(arb) + " with arbitrage), " + std::to_string(disagree) +
                               " disagreements"};
}

// ---- criterion 6 ------------------------------------------------------------

Outcome perturbation() {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> mag(0.3, 0.6);
    int bad = 0;
    std::string first;
    for (int k = 0; k < 20; ++k) {
        // root children on both sides; the measure only charges one side
        const bool up = k % 2 == 0;
        const int b = 2 + k % 3;
        std::vector<double> kids;
        for (int i = 0; i < b; ++i) kids.push_back(std::exp((i % 2 ? 1.0 : -1.0) * mag(rng)));
        const auto lat = fixture::one_period(1.0, kids);
        std::vector<double> w(lat.num_leaves(), 0.0);
        double total = 0.0;
        for (std::size_t l = 0; l < w.size(); ++l) {
            const double s = lat.node(lat.leaves()[l]).price;
            if ((s > 1.0) == up) {
                w[l] = 1.0 + static_cast<double>(l);
                total += w[l];
            }
        }
        for (auto& v : w) v /= total;
        const Measure P(lat, w);
        bool ok = admits_arbitrage(lat, P).arbitrage;
        for (double eps : {0.1, 0.01}) {
            const auto pert = perturb_na(lat, P, eps);
            const Measure old = embed(pert, P);
            for (std::size_t l = 0; l < old.size(); ++l) {
                ok = ok && (old[l] == 0.0 || pert.measure[l] > 0.0);
            }
            ok = ok && !admits_arbitrage(pert.lattice, pert.measure).arbitrage;
        }
        for (double m : {-2.0, 2.0}) {
            double prev = std::numeric_limits<double>::infinity();
            for (double eps : {0.1, 0.01, 0.001}) {
                const auto pert = perturb_na(lat, P, eps);
                double e = 0.0;
                for (std::size_t l = 0; l < pert.lattice.num_leaves(); ++l) {
                    e += pert.measure[l] * std::pow(pert.lattice.node(pert.lattice.path_nodes(l)[1]).price, m);
                }
                const double dev = std::abs(e - 1.0);
                ok = ok && dev < prev;
                prev = dev;
            }
        }
        if (!ok && bad++ == 0) first = " first failure: #" + std::to_string(k);
    }
    return {bad == 0, "20 planted measures, " + std::to_string(bad) + " failures" + first};
}

// ---- criterion 7 ------------------------------------------------------------

Outcome transport() {
    std::mt19937_64 rng(7);
    MetricParams mp;
    mp.rho = 1.0;
    mp.kappa = 2.0;
    mp.p = 2.0;
    // a 9-leaf lattice; every instance uses three leaves on each side
    std::vector<NodeSpec> specs{{0, std::nullopt, 0, 1.0, 1.0}};
    std::int64_t id = 1;
    for (int a = 0; a < 3; ++a) {
        const std::int64_t mid = id++;
        specs.push_back({mid, 0, 1, 1.0, 0.8 + 0.2 * a});
        for (int c = 0; c < 3; ++c) specs.push_back({id++, mid, 2, 1.0, (0.8 + 0.2 * a) * (0.85 + 0.15 * c)});
    }
    const auto lat = ScenarioLattice::build(2, specs);
    const CostMatrix cm(lat, mp);
    double worst = 0.0;
    std::uniform_int_distribution<std::size_t> pick(0, 8);
    std::exponential_distribution<double> ex(1.0);
    for (int k = 0; k < 200; ++k) {
        std::vector<std::size_t> A, B;
        while (A.size() < 3) { auto l = pick(rng); if (std::find(A.begin(), A.end(), l) == A.end()) A.push_back(l); }
        while (B.size() < 3) { auto l = pick(rng); if (std::find(B.begin(), B.end(), l) == B.end()) B.push_back(l); }
        std::vector<double> wa(9, 0.0), wb(9, 0.0), ma(3), mb(3);
        double ta = 0.0, tb = 0.0;
        for (int i = 0; i < 3; ++i) { ma[i] = ex(rng); ta += ma[i]; mb[i] = ex(rng); tb += mb[i]; }
        for (int i = 0; i < 3; ++i) { ma[i] /= ta; mb[i] /= tb; wa[A[i]] += ma[i]; wb[B[i]] += mb[i]; }
        std::vector<std::vector<double>> c(3, std::vector<double>(3));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) c[i][j] = std::pow(path_distance(mp, lat.path(A[i]), lat.path(B[j])), mp.p);
        const double brute = std::pow(oracle::transport_vertex_min(ma, mb, c), 1.0 / mp.p);
        const auto w = wasserstein_p(lat, mp, Measure(lat, wa), Measure(lat, wb));
        worst = std::max(worst, std::abs(w.distance - brute));
    }
    // metric axioms on random paths
    std::uniform_real_distribution<double> pr(0.2, 3.0), mm(0.9, 1.2);
    bool symmetric = true;
    double slack = 0.0;
    auto random_path = [&] {
        Path p(4);
        for (auto& pt : p) { pt.money_market = mm(rng); pt.price = pr(rng); }
        return p;
    };
    for (int k = 0; k < 1000; ++k) {
        const Path a = random_path(), b = random_path(), c = random_path();
        symmetric = symmetric && path_distance(mp, a, b) == path_distance(mp, b, a);
        slack = std::max(slack, path_distance(mp, a, c) - path_distance(mp, a, b) - path_distance(mp, b, c));
    }
    bool exact = true;
    for (int k = 0; k < 20; ++k) {
        const Measure P = fixture::random_measure(rng, lat);
        exact = exact && wasserstein_p(lat, mp, P, P).distance == 0.0;
        const std::size_t i = pick(rng), j = pick(rng);
        exact = exact && wasserstein_p(lat, mp, Measure::dirac(lat, i), Measure::dirac(lat, j)).distance == cm.distance(i, j);
    }
    const bool pass = worst <= 1e-5 && symmetric && slack <= 1e-12 && exact;
    return {pass, "3x3 worst " + fmt("%.2e", worst) + ", symmetric " + (symmetric ? "yes" : "no") +
                      ", triangle slack " + fmt("%.2e", std::max(0.0, slack)) + ", exact cases " + (exact ? "yes" : "no")};
}

// ---- criterion 8 ------------------------------------------------------------

Outcome conjugate() {
    double worst = 0.0;
    for (double lam : {0.5, 1.0, 2.0}) {
        const Utility u = Utility::exponential(lam);
        const Conjugate v(u);
        for (int k = 0; k < 25; ++k) {
            const double y = std::pow(10.0, -3.0 + 6.0 * k / 24.0);
            const double grid = oracle::grid_conjugate([&](double x) { return u.value(0, x); }, y, -40.0, 40.0);
            const double closed = (y / lam) * (std::log(y / lam) - 1.0);
            worst = std::max({worst, std::abs(grid - closed), std::abs(v.value(0, y) - closed)});
        }
    }
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> xs(-10.0, 10.0), ly(-3.0, 3.0);
    double fy = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const double lam = (k % 3 == 0) ? 0.5 : (k % 3 == 1 ? 1.0 : 2.0);
        const Utility u = Utility::exponential(lam);
        const double x = xs(rng), y = std::pow(10.0, ly(rng));
        fy = std::max(fy, u.value(0, x) - Conjugate(u).value(0, y) - x * y);
    }
    return {worst <= 1e-6 && fy <= 1e-9,
            "grid worst " + fmt("%.2e", worst) + ", worst Fenchel-Young excess " + fmt("%.2e", std::max(0.0, fy))};
}

// ---- criterion 9 ------------------------------------------------------------

Problem with_claim(const Problem& p, std::vector<double> x) {
    Problem q = p;
    q.claim = Claim(p.lattice, std::move(x));
    return q;
}

Outcome monotone_concave() {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ud(-1.0, 1.0), cd(0.01, 0.5);
    int bad = 0;
    std::string first;
    for (int i = 0; i < 50; ++i) {
        Shape s;
        s.horizon = 1 + i % 2;
        s.branching = 2 + i % 3;
        s.ambiguity = static_cast<AmbiguityKind>(i % 4);
        s.utility = (i / 4) % 2 ? UtilityKind::kTabulated : UtilityKind::kExponential;
        const auto g = generate_instance(static_cast<std::uint64_t>(9000 + i), s);
        const Problem& p = g.problem;
        const std::size_t n = p.lattice.num_leaves();
        std::vector<double> X(p.claim.values().begin(), p.claim.values().end()), Y(n), Xc(n), M(n), H(n);
        const double c = cd(rng);
        for (std::size_t l = 0; l < n; ++l) {
            Y[l] = ud(rng);
            Xc[l] = X[l] + c;
            M[l] = std::max(X[l], Y[l]);
            H[l] = 0.5 * (X[l] + Y[l]);
        }
        const auto rX = solve(p), rY = solve(with_claim(p, Y)), rXc = solve(with_claim(p, Xc)),
                   rM = solve(with_claim(p, M)), rH = solve(with_claim(p, H));
        const double LX = rX.primal_value, LY = rY.primal_value;
        bool ok = rXc.certificate.value >= LX - 1e-9 && rM.certificate.value >= std::max(LX, LY) - 1e-9 &&
                  rH.certificate.value >= 0.5 * (LX + LY) - 1e-9;
        // L(X + c) >= U(X + c) - gap(X + c) >= U(X) - gap(X + c) >= L(X) - gap(X + c)
        ok = ok && rXc.primal_value >= LX - (rXc.certificate.value - rXc.primal_value) - 1e-9;

        // q = 0 branch: sum_l P_l sup u_l + alpha(P)
        const AmbiguitySet set(p.lattice, p.ambiguity);
        const Measure& P = set.anchor();
        const auto cert = make_certificate(p, set, std::vector<double>(n, 0.0), P);
        double sup_u = 0.0;
        if (const auto* t = std::get_if<TabulatedUtility>(&p.utility.base())) {
            sup_u = t->knots.back().u;  // flat to the right of the last knot
        }
        const double expected = sup_u + set.alpha(P);
        ok = ok && std::abs(cert.value - expected) <= 1e-9 && cert.q == 0.0 && certificate_valid(p, cert) &&
             cert.value >= LX - 1e-9;
        if (!ok && bad++ == 0) first = " first failure: #" + std::to_string(i);
    }
    return {bad == 0, "50 instances, " + std::to_string(bad) + " failures" + first};
}

// ---- criterion 10 -----------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

// Generates a small batch through the CLI and solves it; returns every
// artifact's bytes keyed by relative path.
std::vector<std::pair<std::string, std::string>> artifact_run(const fs::path& root) {
    fs::remove_all(root);
    auto cli = [](std::vector<std::string> args) {
        std::vector<const char*> argv{"rumax"};
        for (auto& a : args) argv.push_back(a.c_str());
        std::ostringstream o, e;
        return cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
    };
    const char* kinds[] = {"hull", "moment", "ball", "penalty"};
    std::vector<std::string> files;
    for (int k = 0; k < 8; ++k) {
        const std::string seed = std::to_string(100 + k);
        cli({"--out", (root / "gen").string(), "--seed", seed, "--quiet", "gen", "-T", "2", "-b", "3", "--kind",
             kinds[k % 4], "--utility", k % 2 ? "tabulated" : "exponential"});
        files.push_back((root / "gen" / ("instance_" + seed + ".json")).string());
    }
    std::vector<std::string> args{"--out", (root / "solve").string(), "--quiet", "solve"};
    args.insert(args.end(), files.begin(), files.end());
    cli(args);
    cli({"--out", (root / "na").string(), "--quiet", "na-check", files[1]});
    cli({"--out", (root / "biconj").string(), "--seed", "3", "--quiet", "biconj", files[0], "--samples", "5"});
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            out.emplace_back(fs::relative(e.path(), root).string(), slurp(e.path()));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Outcome determinism() {
    const fs::path base = fs::temp_directory_path() / ("rumax_acceptance_" + std::to_string(::getpid()));
    const auto a = artifact_run(base / "a");
    const auto b = artifact_run(base / "b");
    bool same = a.size() == b.size() && !a.empty();
    for (std::size_t i = 0; same && i < a.size(); ++i) {
        same = a[i] == b[i];
    }
    // and the in-memory sweep: regenerate three instances and compare documents
    for (int i = 0; i < 3 && same; ++i) {
        same = generate_instance(1000 + i, sweep_shape(i)).document.dump() ==
               generate_instance(1000 + i, sweep_shape(i)).document.dump();
    }
    fs::remove_all(base);
    return {same, std::to_string(a.size()) + " artifacts compared byte for byte"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"weak duality on 200 instances", weak_duality},
        {"strong duality on converged instances", strong_duality},
        {"entropic binomial fixture", entropic_binomial},
        {"leafwise conjugate identity", leafwise_identity},
        {"arbitrage / martingale measure agreement", ftap_agreement},
        {"perturbation removes planted arbitrage", perturbation},
        {"transport LP and metric axioms", transport},
        {"exponential conjugate closed form", conjugate},
        {"monotonicity, concavity, q = 0 branch", monotone_concave},
        {"byte-identical artifacts", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}

#include "rumax_cli/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "rumax/arbitrage.hpp"
#include "rumax/generator.hpp"
#include "rumax/problem_io.hpp"
#include "rumax/solver.hpp"
#include "rumax/transport.hpp"
#include "rumax/utility.hpp"

namespace rumax::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::vector<std::string> files;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    double tol = 0.0;  // 0 keeps the file's tolerances
    int max_iters = 0;
    bool quiet = false;
    bool sign_fault = false;
    // gen
    int horizon = 2;
    int branching = 2;
    std::string kind = "hull";
    std::string utility = "exponential";
    // biconj
    int samples = 20;
    // wasserstein
    std::string first;
    std::string second;
    // conjugate
    std::size_t leaf = 0;
};

void write_file(const fs::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text) || !f.flush()) {
        throw IoError("cannot write " + path.string());
    }
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

Problem load(const RunConfig& cfg, const std::string& file) {
    if (!fs::is_regular_file(file)) {
        throw IoError("cannot read " + file);
    }
    Problem p = load_problem(file);
    if (cfg.tol > 0.0) {
        p.tolerances.primal_tol = cfg.tol;
        p.tolerances.dual_tol = cfg.tol;
    }
    if (cfg.max_iters > 0) {
        p.tolerances.max_iters = cfg.max_iters;
    }
    return p;
}

std::string gap_plot_csv(const SolveResult& r) {
    std::ostringstream os;
    os << "iteration,gap\n";
    for (const auto& rec : r.trace) {
        os << rec.iteration << ',' << format_double(rec.upper - rec.lower) << '\n';
    }
    return os.str();
}

int status_of(const SolveResult& r) {
    if (!r.weak_duality_ok) {
        return kDualityBreach;
    }
    return r.converged ? kOk : kNotConverged;
}

void write_solve_artifacts(const fs::path& dir, const Problem& p, const SolveResult& r) {
    write_json(dir / "result.json", to_json(p.lattice, r));
    write_json(dir / "certificate.json", to_json(r.certificate));
    write_file(dir / "trace.csv", trace_csv(r));
    write_file(dir / "gap_plot.csv", gap_plot_csv(r));
}

int solve_one(const RunConfig& cfg, const std::string& file, const fs::path& dir, std::ostream& out) {
    const Problem p = load(cfg, file);
    const SolveResult r = solve(p, {cfg.sign_fault});
    write_solve_artifacts(dir, p, r);
    if (!cfg.quiet) {
        out << file << ": U = " << format_double(r.primal_value) << "  D = " << format_double(r.certificate.value)
            << "  gap = " << format_double(r.gap) << "  iterations = " << r.iterations
            << (r.converged ? "" : "  (not converged)") << (r.weak_duality_ok ? "" : "  WEAK DUALITY BREACH") << '\n';
    }
    return status_of(r);
}

unsigned worker_count(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RUMAX_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) {
            n = static_cast<unsigned>(v);
        }
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, jobs));
}

// Exit codes ranked so a breach dominates, then I/O failure, then non-convergence.
int worse(int a, int b) {
    auto rank = [](int c) { return c == kDualityBreach ? 3 : c == kIoError ? 2 : c == kNotConverged ? 1 : 0; };
    return rank(a) >= rank(b) ? a : b;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto& files = cfg.files;
    if (files.size() == 1) {
        return solve_one(cfg, files[0], cfg.out_dir, out);
    }
    // Batch: one output directory per problem, summaries printed in input order.
    std::vector<std::string> logs(files.size());
    std::vector<int> codes(files.size(), kOk);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
            std::ostringstream o;
            try {
                codes[i] = solve_one(cfg, files[i], fs::path(cfg.out_dir) / fs::path(files[i]).stem(), o);
            } catch (const std::exception& e) {
                o << "error: " << files[i] << ": " << e.what() << '\n';
                codes[i] = kIoError;
            }
            logs[i] = o.str();
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = worker_count(files.size());
    for (unsigned t = 0; t < n; ++t) {
        pool.emplace_back(work);
    }
    for (auto& t : pool) {
        t.join();
    }
    int code = kOk;
    for (std::size_t i = 0; i < files.size(); ++i) {
        (codes[i] == kIoError ? err : out) << logs[i];
        code = worse(code, codes[i]);
    }
    return code;
}

int cmd_dual(const RunConfig& cfg, std::ostream& out) {
    const Problem p = load(cfg, cfg.files.at(0));
    const SolveResult r = solve(p, {cfg.sign_fault});
    write_json(fs::path(cfg.out_dir) / "certificate.json", to_json(r.certificate));
    if (!cfg.quiet) {
        out << "D = " << format_double(r.certificate.value) << "  q = " << format_double(r.certificate.q) << '\n';
    }
    return status_of(r);
}

int cmd_gap(const RunConfig& cfg, std::ostream& out) {
    const Problem p = load(cfg, cfg.files.at(0));
    const GapReport g = duality_gap(p, {cfg.sign_fault});
    const json j{{"primal", g.primal},
                 {"dual", g.dual},
                 {"absolute_gap", g.absolute_gap},
                 {"relative_gap", g.relative_gap},
                 {"converged", g.converged},
                 {"weak_duality_ok", g.weak_duality_ok},
                 {"iterations", g.solve.iterations}};
    const fs::path dir = cfg.out_dir;
    write_json(dir / "gap.json", j);
    write_json(dir / "certificate.json", to_json(g.solve.certificate));
    write_file(dir / "trace.csv", trace_csv(g.solve));
    write_file(dir / "gap_plot.csv", gap_plot_csv(g.solve));
    if (!cfg.quiet) {
        out << "U = " << format_double(g.primal) << "  D = " << format_double(g.dual)
            << "  gap = " << format_double(g.absolute_gap) << "  relative = " << format_double(g.relative_gap) << '\n';
    }
    if (!g.weak_duality_ok) {
        return kDualityBreach;
    }
    return g.converged ? kOk : kNotConverged;
}

int cmd_entropic(const RunConfig& cfg, std::ostream& out) {
    const Problem p = load(cfg, cfg.files.at(0));
    const EntropicResult e = entropic_value(p);
    json theta = json::array();
    for (int n : p.lattice.non_terminal_nodes()) {
        theta.push_back({{"node", n}, {"theta", e.solve.strategy.holdings[static_cast<std::size_t>(n)]}});
    }
    const json j{{"lambda", e.lambda},
                 {"primal", e.primal},
                 {"dual", e.dual},
                 {"robust_entropy", e.entropy},
                 {"U", e.solve.primal_value},
                 {"strategy", theta},
                 {"Q", measure_to_json(e.Q)},
                 {"P", measure_to_json(e.P)}};
    write_json(fs::path(cfg.out_dir) / "entropic.json", j);
    if (!cfg.quiet) {
        out << "W primal = " << format_double(e.primal) << "  W dual = " << format_double(e.dual) << '\n';
    }
    return status_of(e.solve);
}

int cmd_na(const RunConfig& cfg, std::ostream& out) {
    const Problem p = load(cfg, cfg.files.at(0));
    const AmbiguitySet set(p.lattice, p.ambiguity);
    const NaReport rep = check_na(set);
    std::ostringstream csv;
    csv << "index,label,status,epsilon,witness\n";
    for (std::size_t k = 0; k < rep.entries.size(); ++k) {
        const auto& e = rep.entries[k];
        const std::string witness = "na_witness_" + std::to_string(k) + ".json";
        write_json(fs::path(cfg.out_dir) / witness,
                   {{"label", e.label}, {"status", e.status}, {"epsilon", e.epsilon}, {"detail", e.detail},
                    {"mixture", e.mixture}});
        csv << k << ",\"" << e.label << "\"," << e.status << ',' << format_double(e.epsilon) << ',' << witness << '\n';
        if (!cfg.quiet) {
            out << e.label << ": " << e.status << " (eps = " << e.epsilon << ") " << e.detail << '\n';
        }
    }
    write_file(fs::path(cfg.out_dir) / "na.csv", csv.str());
    return kOk;
}

MetricParams metric_of(const AmbiguitySpec& spec) {
    if (const auto* b = std::get_if<WassersteinBall>(&spec)) {
        return b->metric;
    }
    if (const auto* q = std::get_if<WassersteinPenalty>(&spec)) {
        return q->metric;
    }
    return {};
}

Measure load_measure(const ScenarioLattice& lattice, const std::string& file) {
    std::ifstream in(file);
    if (!in) {
        throw IoError("cannot read " + file);
    }
    return measure_from_json(lattice, json::parse(in), "");
}

int cmd_wasserstein(const RunConfig& cfg, std::ostream& out) {
    const Problem p = load(cfg, cfg.files.at(0));
    const AmbiguitySet set(p.lattice, p.ambiguity);
    const Measure a = cfg.first.empty() ? set.anchor() : load_measure(p.lattice, cfg.first);
    const Measure b = cfg.second.empty() ? Measure::uniform(p.lattice) : load_measure(p.lattice, cfg.second);
    const auto w = wasserstein_p(p.lattice, metric_of(p.ambiguity), a, b);
    write_json(fs::path(cfg.out_dir) / "wasserstein.json",
               {{"distance", w.distance}, {"cost", w.cost}, {"dual_value", w.dual_value}});
    std::ostringstream csv;
    csv << "from,to,weight\n";
    for (std::size_t i = 0; i < w.plan.rows; ++i) {
        for (std::size_t j = 0; j < w.plan.cols; ++j) {
            if (w.plan(i, j) > 0.0) {
                csv << i << ',' << j << ',' << format_double(w.plan(i, j)) << '\n';
            }
        }
    }
    write_file(fs::path(cfg.out_dir) / "plan.csv", csv.str());
    if (!cfg.quiet) {
        out << "W_p = " << format_double(w.distance) << '\n';
    }
    return kOk;
}

int cmd_conjugate(const RunConfig& cfg, std::ostream& out) {
    const Problem p = load(cfg, cfg.files.at(0));
    if (cfg.leaf >= p.lattice.num_leaves()) {
        throw Error(ErrorCode::kValidationError, "--leaf out of range");
    }
    const Conjugate conj(p.utility);
    std::ostringstream csv;
    csv << "y,v,maximizer\n";
    for (int k = 0; k < 25; ++k) {
        const double y = std::pow(10.0, -3.0 + 6.0 * k / 24.0);
        csv << format_double(y) << ',' << format_double(conj.value(cfg.leaf, y)) << ','
            << format_double(conj.maximizer(cfg.leaf, y)) << '\n';
    }
    write_file(fs::path(cfg.out_dir) / "conjugate.csv", csv.str());
    const ConditionReport rep = check_conditions(p.utility, p.lattice.num_leaves());
    json checks = json::array();
    for (const auto& c : rep.checks) {
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"witness", c.witness}});
        if (!cfg.quiet) {
            out << c.name << ": " << (c.passed ? "ok" : "FAILED " + c.witness) << '\n';
        }
    }
    write_json(fs::path(cfg.out_dir) / "conditions.json", checks);
    return kOk;
}

AmbiguityKind parse_kind(const std::string& s) {
    if (s == "hull") return AmbiguityKind::kHull;
    if (s == "moment") return AmbiguityKind::kMoment;
    if (s == "ball" || s == "wasserstein_ball") return AmbiguityKind::kBall;
    if (s == "penalty" || s == "wasserstein_penalty") return AmbiguityKind::kPenalty;
    throw Error(ErrorCode::kInvalidShape, "unknown ambiguity kind '" + s + "'");
}

int cmd_gen(const RunConfig& cfg, std::ostream& out) {
    Shape shape;
    shape.horizon = cfg.horizon;
    shape.branching = cfg.branching;
    shape.ambiguity = parse_kind(cfg.kind);
    if (cfg.utility == "tabulated") {
        shape.utility = UtilityKind::kTabulated;
    } else if (cfg.utility != "exponential") {
        throw Error(ErrorCode::kInvalidShape, "unknown utility '" + cfg.utility + "'");
    }
    const auto g = generate_instance(cfg.seed, shape);
    const fs::path file = fs::path(cfg.out_dir) / ("instance_" + std::to_string(cfg.seed) + ".json");
    write_json(file, g.document);
    if (!cfg.quiet) {
        out << file.string() << ": " << g.problem.lattice.num_leaves() << " paths"
            << (g.degenerate ? " (degenerate: constant price)" : "") << '\n';
    }
    return kOk;
}

int cmd_biconj(const RunConfig& cfg, std::ostream& out) {
    const Problem p = load(cfg, cfg.files.at(0));
    const BiconjugateReport rep = biconjugate_check(p, cfg.samples, cfg.seed);
    write_json(fs::path(cfg.out_dir) / "biconj.json", {{"claims", rep.claims},
                                                        {"monotone", rep.monotone},
                                                        {"convex", rep.convex},
                                                        {"fenchel", rep.fenchel},
                                                        {"worst_fenchel", rep.worst_fenchel},
                                                        {"tightest", rep.tightest},
                                                        {"constant_slice", rep.constant_slice}});
    if (!cfg.quiet) {
        out << "monotone " << rep.monotone << "  convex " << rep.convex << "  fenchel " << rep.fenchel << '\n';
    }
    return (rep.monotone && rep.convex && rep.fenchel) ? kOk : kDualityBreach;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust expected utility maximisation on finite scenario lattices"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto common = [&](CLI::App* sub, bool many = false) {
        if (many) {
            sub->add_option("problem", cfg.files, "Problem file(s)")->required();
        } else {
            sub->add_option("problem", cfg.files, "Problem file")->required()->expected(1);
        }
        sub->add_option("--tol", cfg.tol, "Override primal and dual tolerances");
        sub->add_option("--max-iters", cfg.max_iters, "Override the iteration cap");
        sub->add_flag("--inject-sign-fault", cfg.sign_fault)->group("");
    };
    app.add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    app.add_flag("--quiet", cfg.quiet, "Suppress summaries");

    auto* s_solve = app.add_subcommand("solve", "Solve primal and dual; write result, certificate and traces");
    common(s_solve, true);
    auto* s_dual = app.add_subcommand("dual", "Write the dual certificate");
    common(s_dual);
    auto* s_gap = app.add_subcommand("gap", "Report the duality gap");
    common(s_gap);
    auto* s_ent = app.add_subcommand("entropic", "Entropic value W(X) from both sides");
    common(s_ent);
    auto* s_na = app.add_subcommand("na-check", "No-arbitrage report for the ambiguity set");
    common(s_na);
    auto* s_w = app.add_subcommand("wasserstein", "W_p between two measures on the problem lattice");
    common(s_w);
    s_w->add_option("--first", cfg.first, "Measure file (default: the set's anchor)");
    s_w->add_option("--second", cfg.second, "Measure file (default: uniform)");
    auto* s_c = app.add_subcommand("conjugate", "Tabulate v(y) and audit the utility");
    common(s_c);
    s_c->add_option("--leaf", cfg.leaf, "Leaf index")->capture_default_str();
    auto* s_gen = app.add_subcommand("gen", "Generate a random instance");
    s_gen->add_option("--horizon,-T", cfg.horizon)->capture_default_str();
    s_gen->add_option("--branching,-b", cfg.branching)->capture_default_str();
    s_gen->add_option("--kind", cfg.kind, "hull | moment | ball | penalty")->capture_default_str();
    s_gen->add_option("--utility", cfg.utility, "exponential | tabulated")->capture_default_str();
    auto* s_bi = app.add_subcommand("biconj", "Audit phi(X) = -U(-X) on sampled claims");
    common(s_bi);
    s_bi->add_option("--samples", cfg.samples)->capture_default_str();

    // Options are accepted before or after the subcommand.
    for (auto* sub : app.get_subcommands({})) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kIoError;
    }

    try {
        if (*s_solve) return cmd_solve(cfg, out, err);
        if (*s_dual) return cmd_dual(cfg, out);
        if (*s_gap) return cmd_gap(cfg, out);
        if (*s_ent) return cmd_entropic(cfg, out);
        if (*s_na) return cmd_na(cfg, out);
        if (*s_w) return cmd_wasserstein(cfg, out);
        if (*s_c) return cmd_conjugate(cfg, out);
        if (*s_gen) return cmd_gen(cfg, out);
        if (*s_bi) return cmd_biconj(cfg, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::kNoConvergence ? kNotConverged : kIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    }
    return kIoError;
}

}  // namespace rumax::cli

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rumax/ambiguity.hpp"
#include "rumax/lattice.hpp"
#include "rumax/utility.hpp"

namespace rumax {

struct SolverTolerances {
    double primal_tol = 1e-6;  // absolute, on objective values
    double dual_tol = 1e-6;
    int max_iters = 200;
};

struct Problem {
    ScenarioLattice lattice;
    Claim claim;
    Utility utility;
    AmbiguitySpec ambiguity;
    SolverTolerances tolerances;
};

/// Throws kValidationError unless claim, utility scales and ambiguity all
/// live on `problem.lattice` and the tolerances are positive.
void validate(const Problem& problem);

/// Witness (q, Q, P) of the dual bound q E^Q X + D_v(qQ || P) + alpha(P).
struct DualCertificate {
    double q = 0.0;
    Measure Q;  // normalised r / q; the reference anchor when q = 0
    Measure P;
    double value = 0.0;
    double expectation = 0.0;  // E^Q X
    double divergence = 0.0;   // D_v(qQ || P)
    double alpha = 0.0;
    double martingale_residual = 0.0;  // max node residual of qQ
};

struct IterateRecord {
    int iteration = 0;
    double lower = 0.0;  // best primal value so far
    double upper = 0.0;  // best certificate value so far
    int columns = 0;
};

struct SolveResult {
    double primal_value = 0.0;  // F(theta*) = inf_P { E^P u(X + wealth) + alpha(P) }
    Strategy strategy;
    Measure worst_case;  // P attaining F(theta*)
    DualCertificate certificate;
    double gap = 0.0;  // certificate.value - primal_value
    bool converged = false;
    bool weak_duality_ok = true;
    int iterations = 0;
    double box_radius = 0.0;  // 10 (|X|_inf + 1) / min |dS|
    bool beyond_box = false;
    std::vector<IterateRecord> trace;
};

struct SolverOptions {
    /// Test hook: reports -U instead of U, which must trip the weak-duality check.
    bool inject_sign_fault = false;
};

/// F(theta) = inf_P { E^P u(X + wealth(theta)) + alpha(P) }.
[[nodiscard]] InnerResult evaluate_strategy(const Problem& problem, const AmbiguitySet& set, const Strategy& theta);

/// Exact q E^Q X + D_v(qQ || P) + alpha(P) for r = qQ (unnormalised, r >= 0).
[[nodiscard]] DualCertificate make_certificate(const Problem& problem, const AmbiguitySet& set,
                                               std::span<const double> r, const Measure& P);

/// Checks martingale residual, q >= 0, P in the set and the value identity.
[[nodiscard]] bool certificate_valid(const Problem& problem, const DualCertificate& cert, std::string* why = nullptr);

/// Joint primal/dual solve by column generation on the dual (see README).
[[nodiscard]] SolveResult solve(const Problem& problem, const SolverOptions& options = {});
[[nodiscard]] inline SolveResult solve_primal(const Problem& problem) { return solve(problem); }
[[nodiscard]] inline DualCertificate solve_dual(const Problem& problem) { return solve(problem).certificate; }

struct EntropicResult {
    double lambda = 1.0;
    double primal = 0.0;   // -(1/lambda) log(-U)
    double dual = 0.0;     // E^Q X + inf_P H(Q || P) / lambda at the certificate's Q
    double entropy = 0.0;  // inf_P H(Q || P)
    Measure Q;
    Measure P;
    SolveResult solve;
};

/// Throws kNotExponential unless u is exponential with one lambda on every
/// leaf, and kInvalidSpec for a penalised set.
[[nodiscard]] EntropicResult entropic_value(const Problem& problem);

struct GapReport {
    double primal = 0.0;
    double dual = 0.0;
    double absolute_gap = 0.0;
    double relative_gap = 0.0;  // |D - U| / (1 + |U|)
    bool converged = false;
    bool weak_duality_ok = true;  // U <= D + 1e-9
    SolveResult solve;
};

[[nodiscard]] GapReport duality_gap(const Problem& problem, const SolverOptions& options = {});

struct BiconjugateReport {
    int claims = 0;
    bool monotone = true;
    bool convex = true;
    bool fenchel = true;      // phi(X) >= <X, mu> - phi*(mu) on every sampled pair
    double worst_fenchel = 0.0;  // most negative slack seen
    double tightest = 0.0;       // smallest phi(X) - <X, mu_X> + phi*(mu_X) over claims
    std::vector<double> constant_slice;  // phi(c) on the constant grid
};

/// Audit of phi(X) = -U(-X) as an increasing convex functional on sampled claims.
[[nodiscard]] BiconjugateReport biconjugate_check(const Problem& problem, int samples, std::uint64_t seed);

}  // namespace rumax

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rumax/lattice.hpp"
#include "rumax/lp.hpp"
#include "rumax/transport.hpp"

namespace rumax {

/// Convex hull of finitely many measures, alpha = 0.
struct FiniteHull {
    std::vector<Measure> generators;
};

/// E[S_t^c] <= c_bounds[t-1] and E[S_t^d] <= d_bounds[t-1] for t = 1..T.
struct MomentConstraint {
    double c_exponent = -2.0;  // < 0
    double d_exponent = 2.0;   // > 0
    std::vector<double> c_bounds;
    std::vector<double> d_bounds;
};

/// Measures on the lattice's fixed support meeting every moment constraint, alpha = 0.
struct MomentSet {
    std::vector<MomentConstraint> constraints;
    bool undiscounted = false;  // constrain M_t S_t instead of S_t
};

/// {P : W_p(P, P*) <= radius}, alpha = 0.
struct WassersteinBall {
    Measure reference;
    double radius = 1.0;
    MetricParams metric;
};

/// All measures, alpha(P) = weight * W_p(P, P*)^p.
struct WassersteinPenalty {
    Measure reference;
    double weight = 1.0;
    MetricParams metric;
};

using AmbiguitySpec = std::variant<FiniteHull, MomentSet, WassersteinBall, WassersteinPenalty>;

[[nodiscard]] std::string kind_name(const AmbiguitySpec& spec);

struct Membership {
    bool member = false;
    std::string witness;            // violated constraint, or empty
    std::vector<double> mixture;    // hull only: representing weights
};

struct InnerResult {
    double value = 0.0;  // inf_P { E^P c + alpha(P) }
    Measure measure;     // an attaining P
    double alpha = 0.0;  // alpha at the attaining P as modelled by the LP
};

/// One linear minorant of a convex leaf term: f(p) >= intercept + slope * p.
struct LeafCut {
    double intercept = 0.0;
    double slope = 0.0;
};

/// A separable convex objective sum_l f_l(P_l). `value` may return +inf;
/// `cut` must return a valid minorant touching (or nearly touching) f_l at p.
struct SeparableConvex {
    std::function<double(std::size_t leaf, double p)> value;
    std::function<LeafCut(std::size_t leaf, double p)> cut;
    std::vector<bool> linear;  // optional: leaves whose f is exactly linear (cut at any p is exact)
};

struct ConvexInnerOptions {
    double gap_tol = 1e-8;
    int max_cuts = 500;
};

struct ConvexInnerResult {
    double value = 0.0;        // best upper bound (attained at `measure`)
    double lower_bound = 0.0;  // Kelley model value
    Measure measure;
    int cuts = 0;
    bool converged = false;
    std::vector<double> trace;  // upper bound per iteration, nonincreasing
};

struct GrowthSample {
    double distance = 0.0;    // W_p(P, P*)
    double expectation = 0.0; // E^P u(-beta(Z))
    double ratio = 0.0;       // -expectation / (1 + distance^{(p+1)/2})
};

struct GrowthReport {
    std::vector<GrowthSample> samples;
    double constant = 0.0;  // smallest c making every sample satisfy the bound
};

class Utility;

/// The ambiguity set P and penalty alpha on one lattice, with its LP oracles.
class AmbiguitySet {
public:
    /// Validates `spec` (kInvalidSpec, kLatticeMismatch, kInvalidMetricParams)
    /// and rejects an empty moment set (kInfeasibleAmbiguity).
    AmbiguitySet(const ScenarioLattice& lattice, AmbiguitySpec spec);

    [[nodiscard]] const ScenarioLattice& lattice() const noexcept { return lattice_; }
    [[nodiscard]] const AmbiguitySpec& spec() const noexcept { return spec_; }
    [[nodiscard]] bool penalised() const noexcept { return std::holds_alternative<WassersteinPenalty>(spec_); }
    [[nodiscard]] const CostMatrix* costs() const noexcept { return costs_ ? &*costs_ : nullptr; }

    /// alpha(P): 0 / +inf indicator, or weight * W_p^p.
    [[nodiscard]] double alpha(const Measure& measure) const;
    [[nodiscard]] Membership contains(const Measure& measure, double tol = 1e-9) const;

    /// inf_P { E^P cost + alpha(P) } and an attaining measure.
    [[nodiscard]] InnerResult inner_min(std::span<const double> cost) const;
    [[nodiscard]] InnerResult inner_min(const Claim& cost) const;

    /// inf_P { sum_l f_l(P_l) + alpha(P) } by disaggregated Kelley cuts.
    /// Throws kNoConvergence only when no finite upper bound was ever found.
    [[nodiscard]] ConvexInnerResult convex_inner_min(const SeparableConvex& f,
                                                     const ConvexInnerOptions& options = {}) const;

    /// Per-leaf expression of P_l in the variables installed by `install`.
    using LeafExpr = std::vector<std::pair<int, double>>;
    struct Installed {
        std::vector<LeafExpr> leaf_weight;  // P_l = sum coef * x[var]
        std::vector<int> vars;
        std::vector<std::pair<int, double>> alpha_terms;  // alpha = sum coef * x[var]
    };
    /// Adds the polytope (and the penalty as objective terms) to `model`,
    /// charging `leaf_cost[l]` per unit of P_l when given.
    Installed install(lp::Model& model, std::span<const double> leaf_cost = {}) const;
    /// Reads P back out of a solution, clipping round-off and renormalising.
    [[nodiscard]] Measure extract(const Installed& block, const std::vector<double>& x) const;
    /// The alpha part of the LP objective at x.
    [[nodiscard]] static double modelled_alpha(const Installed& block, const std::vector<double>& x);

    /// A measure in the set with alpha = 0 (reference, first generator, or phase-1 point).
    [[nodiscard]] const Measure& anchor() const noexcept { return anchor_; }

    /// Penalty growth audit: E^P u(-beta(Z)) against 1 + W_p^{(p+1)/2} on sampled P.
    [[nodiscard]] GrowthReport growth_report(const Utility& utility, std::span<const Measure> samples) const;

private:
    ScenarioLattice lattice_;
    AmbiguitySpec spec_;
    std::optional<CostMatrix> costs_;
    Measure anchor_;
    std::vector<std::vector<double>> moment_rows_;  // coefficient rows for the moment LP
    std::vector<double> moment_rhs_;
    std::vector<std::string> moment_names_;
};

}  // namespace rumax

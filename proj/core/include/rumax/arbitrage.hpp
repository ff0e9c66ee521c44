#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rumax/ambiguity.hpp"
#include "rumax/lattice.hpp"

namespace rumax {

/// One martingale equation: sum over leaves l below `node` of w_l * dS(l) = 0,
/// where dS(l) is the price step taken out of `node` on the path to l.
struct MartingaleRow {
    int node = 0;
    std::vector<std::pair<std::size_t, double>> terms;
};

/// Rows for every non-terminal node, in node-id order.
[[nodiscard]] std::vector<MartingaleRow> martingale_rows(const ScenarioLattice& lattice);

/// max over rows of |sum w_l dS(l)|; weights need not be normalised.
[[nodiscard]] double martingale_residual(const ScenarioLattice& lattice, std::span<const double> weights);

/// Orthogonal projection of `weights` onto {martingale rows = 0, sum = total}
/// within the support of `weights`. Leaves outside the support stay zero.
[[nodiscard]] std::vector<double> project_martingale(const ScenarioLattice& lattice, std::span<const double> weights);

struct ArbitrageResult {
    bool arbitrage = false;
    Strategy witness;   // holdings in [-1, 1]; meaningful when `arbitrage`
    double gain = 0.0;  // sum of witness wealth over supp(P)
};

/// LP over theta in [-1, 1]^nodes: maximise total wealth on supp(P) subject
/// to nonnegative wealth there.
[[nodiscard]] ArbitrageResult admits_arbitrage(const ScenarioLattice& lattice, const Measure& measure);

/// A martingale measure equivalent to P (P itself when it already is one),
/// or nullopt when P admits arbitrage.
[[nodiscard]] std::optional<Measure> find_emm(const ScenarioLattice& lattice, const Measure& measure);

struct Perturbation {
    ScenarioLattice lattice;
    Measure measure;
    std::vector<std::size_t> leaf_map;  // old leaf index -> new leaf index
};

/// (eps P_1 + (1 - eps) B_1) (x) (eps K + (1 - eps) B) applied node by node,
/// where the base kernel B_x = (delta_{(1-eps)x} + delta_{(1+eps)x}) / 2, or,
/// when `base` is given, lambda * that symmetric kernel + (1 - lambda) * the
/// conditional of `base` (lambda = eps). New children are inserted where a
/// scaled price is absent. Throws kInvalidEpsilon unless 0 < eps < 1.
[[nodiscard]] Perturbation perturb_na(const ScenarioLattice& lattice, const Measure& measure, double eps,
                                      const Measure* base = nullptr);

/// Re-embeds a measure of the old lattice into a perturbed one.
[[nodiscard]] Measure embed(const Perturbation& perturbation, const Measure& measure);

struct NaEntry {
    std::string label;
    std::string status;        // "holds", "fails" or "undetermined"
    double epsilon = 0.0;      // perturbation size that worked (0 when none was needed)
    std::string detail;
    std::vector<double> mixture;  // hull: dominating arbitrage-free mixture weights
};

struct NaReport {
    std::vector<NaEntry> entries;
    [[nodiscard]] bool holds() const;
};

/// Perturbation grid: 0.5, 0.1, 0.05, 0.01, ..., 1e-5.
[[nodiscard]] std::vector<double> epsilon_grid();

/// Per-generator (hull) or per-representative (other kinds) (NA) audit.
[[nodiscard]] NaReport check_na(const AmbiguitySet& set);

}  // namespace rumax

#include "rumax/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rumax/error.hpp"

namespace rumax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cuts at p = 0 are taken at a tiny positive weight instead; any point gives a valid minorant.
constexpr double kTinyRatio = 1e-12;

void require_lattice(const AmbiguitySet& set, const Measure& Q) {
    if (Q.lattice_id() != set.lattice().fingerprint() || Q.size() != set.lattice().num_leaves()) {
        throw Error(ErrorCode::kLatticeMismatch, "Q does not live on the ambiguity lattice");
    }
}

}  // namespace

ConvexInnerResult robust_divergence(const Conjugate& conjugate, double q, const Measure& Q, const AmbiguitySet& set,
                                    const ConvexInnerOptions& options) {
    require_lattice(set, Q);
    if (q < 0.0) {
        throw Error(ErrorCode::kNegativeSlope, "q must be >= 0");
    }
    const std::size_t n = Q.size();
    std::vector<double> r(n);
    SeparableConvex f;
    f.linear.assign(n, false);
    for (std::size_t l = 0; l < n; ++l) {
        r[l] = q * Q[l];
        f.linear[l] = !(r[l] > 0.0);
    }
    f.value = [&](std::size_t l, double p) { return conjugate.perspective(l, r[l], p); };
    f.cut = [&](std::size_t l, double p) -> LeafCut {
        if (!(r[l] > 0.0)) {
            return {0.0, conjugate.value(l, 0.0)};
        }
        const double x = conjugate.maximizer(l, r[l] / std::max(p, kTinyRatio * r[l]));
        return {-r[l] * x, conjugate.utility().value(l, x)};
    };
    return set.convex_inner_min(f, options);
}

double relative_entropy(const Measure& Q, const Measure& P) {
    if (Q.lattice_id() != P.lattice_id() || Q.size() != P.size()) {
        throw Error(ErrorCode::kLatticeMismatch, "Q and P live on different lattices");
    }
    double h = 0.0;
    for (std::size_t l = 0; l < Q.size(); ++l) {
        if (Q[l] > 0.0) {
            if (!(P[l] > 0.0)) {
                return kInf;
            }
            h += Q[l] * std::log(Q[l] / P[l]);
        }
    }
    return h;
}

ConvexInnerResult robust_relative_entropy(const Measure& Q, const AmbiguitySet& set,
                                          const ConvexInnerOptions& options) {
    require_lattice(set, Q);
    const std::size_t n = Q.size();
    SeparableConvex f;
    f.linear.assign(n, false);
    for (std::size_t l = 0; l < n; ++l) {
        f.linear[l] = !(Q[l] > 0.0);
    }
    f.value = [&](std::size_t l, double p) {
        if (!(Q[l] > 0.0)) {
            return 0.0;
        }
        return p > 0.0 ? Q[l] * std::log(Q[l] / p) : kInf;
    };
    f.cut = [&](std::size_t l, double p) -> LeafCut {
        if (!(Q[l] > 0.0)) {
            return {0.0, 0.0};
        }
        const double pe = std::max(p, kTinyRatio * Q[l]);
        const double slope = -Q[l] / pe;
        return {Q[l] * std::log(Q[l] / pe) + Q[l], slope};
    };
    return set.convex_inner_min(f, options);
}

}  // namespace rumax

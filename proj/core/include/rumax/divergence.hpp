#pragma once

#include "rumax/ambiguity.hpp"
#include "rumax/lattice.hpp"
#include "rumax/utility.hpp"

namespace rumax {

/// D^alpha_v(qQ) = inf_{P in set} { D_v(qQ || P) + alpha(P) }.
/// `value` is attained at `measure`; `lower_bound` is the cutting-plane bound.
[[nodiscard]] ConvexInnerResult robust_divergence(const Conjugate& conjugate, double q, const Measure& Q,
                                                  const AmbiguitySet& set, const ConvexInnerOptions& options = {});

/// H(Q || P) = E^Q log(dQ/dP), +inf unless Q << P.
[[nodiscard]] double relative_entropy(const Measure& Q, const Measure& P);

/// inf_{P in set} { H(Q || P) + alpha(P) }.
[[nodiscard]] ConvexInnerResult robust_relative_entropy(const Measure& Q, const AmbiguitySet& set,
                                                        const ConvexInnerOptions& options = {});

}  // namespace rumax

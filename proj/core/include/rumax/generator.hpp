#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

#include "rumax/ambiguity.hpp"
#include "rumax/solver.hpp"

namespace rumax {

enum class AmbiguityKind { kHull, kMoment, kBall, kPenalty };
enum class UtilityKind { kExponential, kTabulated };

struct Shape {
    int horizon = 2;
    int branching = 2;
    AmbiguityKind ambiguity = AmbiguityKind::kHull;
    UtilityKind utility = UtilityKind::kExponential;
};

/// A random instance on a lattice where every node has children strictly
/// above and below its price (branching 1 gives a constant price and is
/// reported as degenerate). All randomness comes from one mt19937_64 stream
/// mapped by hand, so equal seeds give equal bytes on every platform.
///
/// Throws kInvalidShape unless 1 <= horizon <= 4 and 1 <= branching <= 4.
struct GeneratedInstance {
    Problem problem;
    nlohmann::json document;
    bool degenerate = false;
};

[[nodiscard]] GeneratedInstance generate_instance(std::uint64_t seed, const Shape& shape);

}  // namespace rumax

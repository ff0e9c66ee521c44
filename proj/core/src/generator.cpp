#include "rumax/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rumax/error.hpp"
#include "rumax/problem_io.hpp"

namespace rumax {

using nlohmann::json;

namespace {

// Hand-rolled maps from raw 64-bit draws: std distributions are not
// specified bit-for-bit across standard libraries.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double open01() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * open01(); }
    bool coin() { return (engine_() >> 63) != 0; }

    /// Flat Dirichlet via normalised exponentials.
    std::vector<double> simplex(std::size_t n) {
        std::vector<double> w(n);
        double total = 0.0;
        for (auto& x : w) {
            x = -std::log(open01());
            total += x;
        }
        for (auto& x : w) {
            x /= total;
        }
        return w;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace

GeneratedInstance generate_instance(std::uint64_t seed, const Shape& shape) {
    if (shape.horizon < 1 || shape.horizon > 4 || shape.branching < 1 || shape.branching > 4) {
        throw Error(ErrorCode::kInvalidShape, "need 1 <= T <= 4 and 1 <= branching <= 4, got T=" +
                                                  std::to_string(shape.horizon) +
                                                  " branching=" + std::to_string(shape.branching));
    }
    Stream rng(seed);
    const int T = shape.horizon;
    const int b = shape.branching;

    // Breadth-first so ids are already canonical.
    json nodes = json::array();
    nodes.push_back({{"id", 0}, {"parent", nullptr}, {"t", 0}, {"m", 1.0}, {"s", 1.0}});
    std::vector<double> level_prices{1.0};
    std::vector<int> level_ids{0};
    int next_id = 1;
    for (int t = 1; t <= T; ++t) {
        std::vector<double> prices;
        std::vector<int> ids;
        for (std::size_t k = 0; k < level_ids.size(); ++k) {
            std::vector<double> moves(static_cast<std::size_t>(b), 0.0);
            if (b > 1) {
                moves.front() = -rng.uniform(0.05, 0.4);
                moves.back() = rng.uniform(0.05, 0.4);
                for (int j = 1; j + 1 < b; ++j) {
                    moves[static_cast<std::size_t>(j)] = rng.uniform(moves.front(), moves.back());
                }
                std::sort(moves.begin(), moves.end());
            }
            for (double d : moves) {
                const double s = level_prices[k] * std::exp(d);
                nodes.push_back({{"id", next_id}, {"parent", level_ids[k]}, {"t", t}, {"m", 1.0}, {"s", s}});
                prices.push_back(s);
                ids.push_back(next_id++);
            }
        }
        level_prices = std::move(prices);
        level_ids = std::move(ids);
    }
    const std::size_t leaves = level_ids.size();

    json doc;
    doc["horizon"] = T;
    doc["nodes"] = std::move(nodes);

    std::vector<double> claim(leaves);
    for (auto& x : claim) {
        x = rng.uniform(-1.0, 1.0);
    }
    doc["claim"] = claim;

    if (shape.utility == UtilityKind::kExponential) {
        doc["utility"] = {{"type", "exponential"}, {"lambda", rng.uniform(0.5, 2.0)}};
    } else {
        // Knots of -exp(-c x)/c, flat on the right so u stays bounded above.
        const double c = rng.uniform(0.5, 1.5);
        json knots = json::array();
        for (int k = 0; k <= 8; ++k) {
            const double x = -2.0 + 0.5 * k;
            knots.push_back({x, -std::exp(-c * x) / c});
        }
        doc["utility"] = {{"type", "tabulated"},
                          {"knots", knots},
                          {"right_slope", 0.0},
                          {"left_tail", {{"slope", std::exp(2.0 * c)}, {"curvature", 0.5 * c * std::exp(2.0 * c)}}}};
    }

    switch (shape.ambiguity) {
        case AmbiguityKind::kHull: {
            json gens = json::array();
            const int count = rng.coin() ? 3 : 2;
            for (int g = 0; g < count; ++g) {
                gens.push_back(rng.simplex(leaves));
            }
            doc["ambiguity"] = {{"type", "hull"}, {"generators", gens}};
            break;
        }
        case AmbiguityKind::kMoment: {
            // Bounds sit above the uniform-measure moments, so the set is never empty.
            std::vector<double> lo(static_cast<std::size_t>(T)), hi(static_cast<std::size_t>(T));
            const auto& all = doc["nodes"];
            for (int t = 1; t <= T; ++t) {
                double ec = 0.0, ed = 0.0, count = 0.0;
                for (const auto& n : all) {
                    if (n["t"].get<int>() == t) {
                        const double s = n["s"].get<double>();
                        ec += std::pow(s, -2.0);
                        ed += s * s;
                        count += 1.0;
                    }
                }
                // Level weights under the uniform leaf measure are equal within a level.
                lo[static_cast<std::size_t>(t - 1)] = std::max(ec / count, 1.0) * (1.0 + rng.uniform(0.05, 0.3));
                hi[static_cast<std::size_t>(t - 1)] = std::max(ed / count, 1.0) * (1.0 + rng.uniform(0.05, 0.3));
            }
            doc["ambiguity"] = {{"type", "moment"},
                                {"constraints", json::array({{{"c", -2.0}, {"d", 2.0}, {"C", lo}, {"D", hi}}})}};
            break;
        }
        case AmbiguityKind::kBall:
            doc["ambiguity"] = {{"type", "wasserstein_ball"},
                                {"radius", rng.uniform(0.05, 0.3)},
                                {"rho", 1.0},
                                {"kappa", 1.0},
                                {"p", 2.0},
                                {"reference", rng.simplex(leaves)}};
            break;
        case AmbiguityKind::kPenalty:
            doc["ambiguity"] = {{"type", "wasserstein_penalty"},
                                {"weight", rng.uniform(0.5, 5.0)},
                                {"rho", 1.0},
                                {"kappa", 1.0},
                                {"p", 2.0},
                                {"reference", rng.simplex(leaves)}};
            break;
    }

    GeneratedInstance out{parse_problem(doc), std::move(doc), b == 1};
    return out;
}

}  // namespace rumax

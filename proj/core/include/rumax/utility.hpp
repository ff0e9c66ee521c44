#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rumax/lattice.hpp"

namespace rumax {

/// u(x) = -exp(-lambda x).
struct ExponentialUtility {
    double lambda = 1.0;
};

struct Knot {
    double x = 0.0;
    double u = 0.0;
};

/// Left of the first knot (x0, u0):
///   u(x) = u0 + slope (x - x0) - curvature (x0 - x)^2.
/// curvature > 0 gives the superlinear decay required at -infinity.
struct LeftTail {
    double slope = 1.0;
    double curvature = 1.0;
};

/// Piecewise-linear concave utility through `knots` (strictly increasing x),
/// slope `right_slope` beyond the last knot and a quadratic left tail.
struct TabulatedUtility {
    std::vector<Knot> knots;
    double right_slope = 0.0;
    LeftTail left_tail;
};

/// A random utility u(w, x) = base(a_w x), where a_w > 0 is a per-leaf scale
/// (all ones unless set). Scaling by the terminal money market gives the
/// undiscounted-wealth reading.
class Utility {
public:
    using Base = std::variant<ExponentialUtility, TabulatedUtility>;

    Utility() = default;
    /// Throws kInvalidSpec for lambda <= 0 or an ill-formed table.
    explicit Utility(Base base, std::vector<double> leaf_scales = {});

    static Utility exponential(double lambda) { return Utility(ExponentialUtility{lambda}); }

    [[nodiscard]] const Base& base() const noexcept { return base_; }
    [[nodiscard]] bool is_exponential() const noexcept { return std::holds_alternative<ExponentialUtility>(base_); }
    [[nodiscard]] bool smooth() const noexcept { return is_exponential(); }
    /// Exponential with a uniform scale: the entropic case.
    [[nodiscard]] std::optional<double> uniform_lambda() const;

    [[nodiscard]] double scale(std::size_t leaf) const {
        return leaf_scales_.empty() ? 1.0 : leaf_scales_.at(leaf);
    }
    [[nodiscard]] const std::vector<double>& leaf_scales() const noexcept { return leaf_scales_; }

    /// u(w, x).
    [[nodiscard]] double value(std::size_t leaf, double x) const;
    /// Right derivative in x (a supergradient selection at kinks).
    [[nodiscard]] double derivative(std::size_t leaf, double x) const;
    /// Second derivative where it exists (exponential only; 0 on linear pieces).
    [[nodiscard]] double second_derivative(std::size_t leaf, double x) const;
    /// sup_x u(w, x), possibly +inf.
    [[nodiscard]] double supremum(std::size_t leaf) const;

    /// A length scale used to seed cut points.
    [[nodiscard]] double natural_scale() const;

private:
    Base base_;
    std::vector<double> leaf_scales_;
};

/// v(w, y) = sup_x { u(w, x) - x y } and its maximiser.
class Conjugate {
public:
    explicit Conjugate(Utility utility) : utility_(std::move(utility)) {}

    [[nodiscard]] const Utility& utility() const noexcept { return utility_; }

    /// v(w, y); +inf when the supremum diverges. Throws kNegativeSlope for y < 0.
    [[nodiscard]] double value(std::size_t leaf, double y) const;
    /// argmax_x { u(w, x) - x y }; +inf when the supremum is approached at x -> +inf
    /// (y = 0 for a utility bounded above), -inf on divergence to the left.
    [[nodiscard]] double maximizer(std::size_t leaf, double y) const;

    /// Perspective p * v(r / p), extended by 0 at (0, 0) and +inf at (r > 0, 0).
    [[nodiscard]] double perspective(std::size_t leaf, double r, double p) const;
    /// d/dp of the perspective, equal to u(w, x*(r/p)).
    [[nodiscard]] double perspective_slope(std::size_t leaf, double r, double p) const;

private:
    Utility utility_;
};

/// D_v(qQ || P) = E^P v(q dQ/dP), +inf when qQ is not absolutely continuous
/// w.r.t. P. Throws kLatticeMismatch.
[[nodiscard]] double divergence_dv(const Conjugate& conjugate, double q, const Measure& Q, const Measure& P);

struct ConditionGrid {
    double x_min = -10.0;
    double x_max = 10.0;
    int points = 201;
    double y_max = 10.0;  // v is checked for boundedness on [0, y_max]
    int y_points = 101;
};

struct ConditionCheck {
    std::string name;
    bool passed = true;
    std::string witness;  // empty when passed
};

struct ConditionReport {
    std::vector<ConditionCheck> checks;  // U1, U2, U3, conjugate-bound
    [[nodiscard]] bool all_passed() const;
    [[nodiscard]] const ConditionCheck& find(const std::string& name) const;
};

/// Numeric audit of monotonicity/concavity, boundedness, superlinear decay at
/// -inf (ratios u(x)/|x| at x = -10^k, k = 1..6) and boundedness of v on [0, y_max].
/// Report only; never throws for a failed condition.
[[nodiscard]] ConditionReport check_conditions(const Utility& utility, std::size_t num_leaves,
                                               const ConditionGrid& grid = {});

}  // namespace rumax

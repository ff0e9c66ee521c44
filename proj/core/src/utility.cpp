#include "rumax/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rumax/error.hpp"

namespace rumax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BaseValue {
    double operator()(const ExponentialUtility& e, double x) const { return -std::exp(-e.lambda * x); }
    double operator()(const TabulatedUtility& t, double x) const {
        const auto& k = t.knots;
        if (x < k.front().x) {
            const double gap = k.front().x - x;
            return k.front().u - t.left_tail.slope * gap - t.left_tail.curvature * gap * gap;
        }
        if (x >= k.back().x) {
            return k.back().u + t.right_slope * (x - k.back().x);
        }
        auto it = std::upper_bound(k.begin(), k.end(), x, [](double v, const Knot& kn) { return v < kn.x; });
        const Knot& hi = *it;
        const Knot& lo = *(it - 1);
        const double w = (x - lo.x) / (hi.x - lo.x);
        return lo.u + w * (hi.u - lo.u);
    }
};

struct BaseDerivative {
    double operator()(const ExponentialUtility& e, double x) const { return e.lambda * std::exp(-e.lambda * x); }
    double operator()(const TabulatedUtility& t, double x) const {
        const auto& k = t.knots;
        if (x < k.front().x) {
            return t.left_tail.slope + 2.0 * t.left_tail.curvature * (k.front().x - x);
        }
        if (x >= k.back().x) {
            return t.right_slope;
        }
        auto it = std::upper_bound(k.begin(), k.end(), x, [](double v, const Knot& kn) { return v < kn.x; });
        const Knot& hi = *it;
        const Knot& lo = *(it - 1);
        return (hi.u - lo.u) / (hi.x - lo.x);
    }
};

struct ConjugateResult {
    double value = 0.0;
    double maximizer = 0.0;
};

ConjugateResult base_conjugate(const ExponentialUtility& e, double y) {
    if (y == 0.0) {
        return {0.0, kInf};
    }
    const double r = y / e.lambda;
    return {r * (std::log(r) - 1.0), -std::log(r) / e.lambda};
}

// Exact supremum of a piecewise-linear function with quadratic left tail minus x*y:
// the maximum sits at a knot, at the interior stationary point of the tail, or diverges.
ConjugateResult base_conjugate(const TabulatedUtility& t, double y) {
    const auto& k = t.knots;
    if (y < t.right_slope) {
        return {kInf, kInf};
    }
    ConjugateResult best{-kInf, k.back().x};
    for (const auto& kn : k) {
        const double v = kn.u - kn.x * y;
        if (v > best.value) {
            best = {v, kn.x};
        }
    }
    if (y > t.left_tail.slope) {
        if (t.left_tail.curvature <= 0.0) {
            return {kInf, -kInf};
        }
        const double gap = (y - t.left_tail.slope) / (2.0 * t.left_tail.curvature);
        const double x = k.front().x - gap;
        const double v = k.front().u - t.left_tail.slope * gap - t.left_tail.curvature * gap * gap - x * y;
        if (v > best.value) {
            best = {v, x};
        }
    }
    return best;
}

}  // namespace

Utility::Utility(Base base, std::vector<double> leaf_scales)
    : base_(std::move(base)), leaf_scales_(std::move(leaf_scales)) {
    for (double a : leaf_scales_) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw Error(ErrorCode::kInvalidSpec, "utility leaf scales must be positive");
        }
    }
    if (const auto* e = std::get_if<ExponentialUtility>(&base_)) {
        if (!(e->lambda > 0.0) || !std::isfinite(e->lambda)) {
            throw Error(ErrorCode::kInvalidSpec, "exponential utility needs lambda > 0");
        }
        return;
    }
    const auto& t = std::get<TabulatedUtility>(base_);
    if (t.knots.empty()) {
        throw Error(ErrorCode::kInvalidSpec, "tabulated utility needs at least one knot");
    }
    for (std::size_t i = 0; i < t.knots.size(); ++i) {
        if (!std::isfinite(t.knots[i].x) || !std::isfinite(t.knots[i].u)) {
            throw Error(ErrorCode::kInvalidSpec, "tabulated knots must be finite");
        }
        if (i > 0 && !(t.knots[i].x > t.knots[i - 1].x)) {
            throw Error(ErrorCode::kInvalidSpec, "tabulated knots must have strictly increasing x");
        }
    }
    if (!(t.left_tail.curvature >= 0.0) || !std::isfinite(t.left_tail.slope) || !std::isfinite(t.right_slope)) {
        throw Error(ErrorCode::kInvalidSpec, "tabulated tails must be finite with curvature >= 0");
    }
}

std::optional<double> Utility::uniform_lambda() const {
    const auto* e = std::get_if<ExponentialUtility>(&base_);
    if (e == nullptr) {
        return std::nullopt;
    }
    for (double a : leaf_scales_) {
        if (a != leaf_scales_.front()) {
            return std::nullopt;
        }
    }
    return e->lambda * (leaf_scales_.empty() ? 1.0 : leaf_scales_.front());
}

double Utility::value(std::size_t leaf, double x) const {
    const double a = scale(leaf);
    return std::visit([&](const auto& b) { return BaseValue{}(b, a * x); }, base_);
}

double Utility::derivative(std::size_t leaf, double x) const {
    const double a = scale(leaf);
    return a * std::visit([&](const auto& b) { return BaseDerivative{}(b, a * x); }, base_);
}

double Utility::second_derivative(std::size_t leaf, double x) const {
    const double a = scale(leaf);
    if (const auto* e = std::get_if<ExponentialUtility>(&base_)) {
        return -a * a * e->lambda * e->lambda * std::exp(-e->lambda * a * x);
    }
    const auto& t = std::get<TabulatedUtility>(base_);
    return (a * x < t.knots.front().x) ? -2.0 * a * a * t.left_tail.curvature : 0.0;
}

double Utility::supremum(std::size_t leaf) const {
    (void)leaf;
    if (is_exponential()) {
        return 0.0;
    }
    const auto& t = std::get<TabulatedUtility>(base_);
    if (t.right_slope > 0.0) {
        return kInf;
    }
    double best = -kInf;
    for (const auto& k : t.knots) {
        best = std::max(best, k.u);
    }
    return best;
}

double Utility::natural_scale() const {
    double amin = 1.0;
    for (double a : leaf_scales_) {
        amin = std::min(amin, a);
    }
    if (const auto* e = std::get_if<ExponentialUtility>(&base_)) {
        return 1.0 / (e->lambda * amin);
    }
    const auto& t = std::get<TabulatedUtility>(base_);
    const double span = t.knots.back().x - t.knots.front().x;
    return std::max(span, 1.0) / amin;
}

double Conjugate::value(std::size_t leaf, double y) const {
    if (y < 0.0 || std::isnan(y)) {
        throw Error(ErrorCode::kNegativeSlope, "conjugate needs y >= 0");
    }
    const double a = utility_.scale(leaf);
    return std::visit([&](const auto& b) { return base_conjugate(b, y / a).value; }, utility_.base());
}

double Conjugate::maximizer(std::size_t leaf, double y) const {
    if (y < 0.0 || std::isnan(y)) {
        throw Error(ErrorCode::kNegativeSlope, "conjugate needs y >= 0");
    }
    const double a = utility_.scale(leaf);
    return std::visit([&](const auto& b) { return base_conjugate(b, y / a).maximizer; }, utility_.base()) / a;
}

double Conjugate::perspective(std::size_t leaf, double r, double p) const {
    if (p > 0.0) {
        const double v = value(leaf, r / p);
        return std::isinf(v) ? v : p * v;
    }
    return r > 0.0 ? kInf : 0.0;
}

double Conjugate::perspective_slope(std::size_t leaf, double r, double p) const {
    if (p <= 0.0) {
        return r > 0.0 ? -kInf : value(leaf, 0.0);
    }
    const double s = r / p;
    if (s == 0.0) {
        return value(leaf, 0.0);
    }
    const double x = maximizer(leaf, s);
    if (!std::isfinite(x)) {
        return x > 0.0 ? utility_.supremum(leaf) : -kInf;
    }
    return utility_.value(leaf, x);
}

double divergence_dv(const Conjugate& conjugate, double q, const Measure& Q, const Measure& P) {
    if (Q.lattice_id() != P.lattice_id() || Q.size() != P.size()) {
        throw Error(ErrorCode::kLatticeMismatch, "Q and P live on different lattices");
    }
    if (q < 0.0) {
        throw Error(ErrorCode::kNegativeSlope, "q must be >= 0");
    }
    double total = 0.0;
    for (std::size_t l = 0; l < P.size(); ++l) {
        const double term = conjugate.perspective(l, q * Q[l], P[l]);
        if (std::isinf(term) && term > 0.0) {
            return kInf;
        }
        total += term;
    }
    return total;
}

bool ConditionReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) { return c.passed; });
}

const ConditionCheck& ConditionReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) {
            return c;
        }
    }
    throw Error(ErrorCode::kInvalidSpec, "no condition named " + name);
}

ConditionReport check_conditions(const Utility& utility, std::size_t num_leaves, const ConditionGrid& grid) {
    ConditionReport report;
    const std::size_t leaves = utility.leaf_scales().empty() ? 1 : std::max<std::size_t>(1, num_leaves);
    const int points = std::max(grid.points, 3);

    ConditionCheck u1{"U1", true, {}};
    if (const auto* t = std::get_if<TabulatedUtility>(&utility.base())) {
        double left = t->left_tail.slope;
        for (std::size_t i = 0; i + 1 <= t->knots.size() && u1.passed; ++i) {
            const double right = (i + 1 < t->knots.size())
                                     ? (t->knots[i + 1].u - t->knots[i].u) / (t->knots[i + 1].x - t->knots[i].x)
                                     : t->right_slope;
            if (right < 0.0 || right > left + 1e-12) {
                std::ostringstream os;
                os << "knot x=" << t->knots[i].x << ": left slope " << left << ", right slope " << right;
                u1 = {"U1", false, os.str()};
            }
            left = right;
        }
    }
    for (std::size_t l = 0; l < leaves && u1.passed; ++l) {
        const double h = (grid.x_max - grid.x_min) / (points - 1);
        double prev_slope = kInf;
        for (int i = 0; i + 1 < points; ++i) {
            const double x0 = grid.x_min + i * h;
            const double slope = (utility.value(l, x0 + h) - utility.value(l, x0)) / h;
            const double tol = 1e-9 * std::max(1.0, std::abs(slope));
            if (slope < -tol || slope > prev_slope + tol) {
                std::ostringstream os;
                os << "leaf " << l << " near x=" << x0 << ": secant slope " << slope << " after " << prev_slope;
                u1 = {"U1", false, os.str()};
                break;
            }
            prev_slope = slope;
        }
    }
    report.checks.push_back(u1);

    ConditionCheck u2{"U2", true, {}};
    for (std::size_t l = 0; l < leaves && u2.passed; ++l) {
        if (!std::isfinite(utility.supremum(l))) {
            u2 = {"U2", false, "leaf " + std::to_string(l) + ": u unbounded above"};
        }
        for (int i = 0; i < points && u2.passed; ++i) {
            const double x = grid.x_min + i * (grid.x_max - grid.x_min) / (points - 1);
            if (!std::isfinite(utility.value(l, x))) {
                u2 = {"U2", false, "leaf " + std::to_string(l) + ": u not finite at x=" + std::to_string(x)};
            }
        }
    }
    report.checks.push_back(u2);

    ConditionCheck u3{"U3", true, {}};
    std::vector<double> ratios;
    for (int k = 1; k <= 6; ++k) {
        const double x = -std::pow(10.0, k);
        double sup = -kInf;
        for (std::size_t l = 0; l < leaves; ++l) {
            sup = std::max(sup, utility.value(l, x));
        }
        ratios.push_back(sup / std::abs(x));
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < ratios.size(); ++i) {
        decreasing = decreasing && ratios[i] <= ratios[i - 1];
    }
    if (!decreasing || !(ratios[5] <= ratios[4] - 1.0)) {
        std::ostringstream os;
        os << "u(x)/|x| at x=-1e5, -1e6: " << ratios[4] << ", " << ratios[5] << " (bounded)";
        u3 = {"U3", false, os.str()};
    }
    report.checks.push_back(u3);

    ConditionCheck vb{"conjugate_bound", true, {}};
    Conjugate conj(utility);
    const int ypts = std::max(grid.y_points, 2);
    for (std::size_t l = 0; l < leaves && vb.passed; ++l) {
        for (int i = 0; i < ypts; ++i) {
            const double y = grid.y_max * i / (ypts - 1);
            if (!std::isfinite(conj.value(l, y))) {
                vb = {"conjugate_bound", false, "leaf " + std::to_string(l) + ": v infinite at y=" + std::to_string(y)};
                break;
            }
        }
    }
    report.checks.push_back(vb);
    return report;
}

}  // namespace rumax

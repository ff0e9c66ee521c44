#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace rumax::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { kLessEqual, kGreaterEqual, kEqual };

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

/// A minimisation LP in column-wise sparse form:
///   min c'x  s.t.  row_i(x) {<=,>=,=} rhs_i,  lower_j <= x_j <= upper_j.
/// Lower bounds are finite or -inf; upper bounds are finite or +inf.
class Model {
public:
    int add_variable(double cost, double lower = 0.0, double upper = kInfinity);
    int add_row(RowSense sense, double rhs);
    /// Appends a coefficient; repeated (row, var) pairs are summed.
    void add_coefficient(int row, int var, double value);

    void set_cost(int var, double cost) { costs_[static_cast<std::size_t>(var)] = cost; }

    [[nodiscard]] int num_variables() const noexcept { return static_cast<int>(costs_.size()); }
    [[nodiscard]] int num_rows() const noexcept { return static_cast<int>(senses_.size()); }

    [[nodiscard]] double cost(int var) const { return costs_[static_cast<std::size_t>(var)]; }
    [[nodiscard]] double lower(int var) const { return lower_[static_cast<std::size_t>(var)]; }
    [[nodiscard]] double upper(int var) const { return upper_[static_cast<std::size_t>(var)]; }
    [[nodiscard]] RowSense sense(int row) const { return senses_[static_cast<std::size_t>(row)]; }
    [[nodiscard]] double rhs(int row) const { return rhs_[static_cast<std::size_t>(row)]; }
    [[nodiscard]] const std::vector<std::pair<int, double>>& column(int var) const {
        return columns_[static_cast<std::size_t>(var)];
    }

private:
    std::vector<double> costs_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<std::vector<std::pair<int, double>>> columns_;
    std::vector<RowSense> senses_;
    std::vector<double> rhs_;
};

/// Identifies a basic column across re-solves of a growing model: either a
/// model variable (with a sign for split free variables) or the slack of a row.
struct BasisEntry {
    enum class Kind { kVariablePlus, kVariableMinus, kSlack, kUpperSlack, kArtificial } kind = Kind::kSlack;
    int index = 0;

    friend bool operator==(const BasisEntry&, const BasisEntry&) = default;
};

struct Basis {
    std::vector<BasisEntry> entries;
};

struct Options {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    int max_iterations = 0;  // 0 = automatic
    int refactor_interval = 64;
    int degenerate_switch = 30;  // consecutive degenerate pivots before Bland's rule
};

struct Solution {
    Status status = Status::kInfeasible;
    double objective = 0.0;
    std::vector<double> x;
    /// Row multipliers y with reduced costs c - A'y >= 0 at a minimum
    /// (y <= 0 on <= rows, y >= 0 on >= rows).
    std::vector<double> row_duals;
    Basis basis;
    int iterations = 0;

    [[nodiscard]] bool optimal() const noexcept { return status == Status::kOptimal; }
};

/// Dense revised simplex (two phases, explicit basis inverse with periodic
/// refactorisation). `warm` is tried first when given; a basis that is
/// singular or primal infeasible falls back to a cold start.
[[nodiscard]] Solution solve(const Model& model, const Options& options = {}, const Basis* warm = nullptr);

}  // namespace rumax::lp

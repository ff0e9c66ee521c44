#include "rumax/lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace rumax::lp {

int Model::add_variable(double cost, double lower, double upper) {
    if (std::isnan(lower) || std::isnan(upper) || lower == kInfinity || upper == -kInfinity || lower > upper) {
        throw std::invalid_argument("lp::Model: invalid variable bounds");
    }
    costs_.push_back(cost);
    lower_.push_back(lower);
    upper_.push_back(upper);
    columns_.emplace_back();
    return static_cast<int>(costs_.size()) - 1;
}

int Model::add_row(RowSense sense, double rhs) {
    senses_.push_back(sense);
    rhs_.push_back(rhs);
    return static_cast<int>(senses_.size()) - 1;
}

void Model::add_coefficient(int row, int var, double value) {
    if (row < 0 || row >= num_rows() || var < 0 || var >= num_variables()) {
        throw std::out_of_range("lp::Model: coefficient index out of range");
    }
    if (value == 0.0) {
        return;
    }
    auto& col = columns_[static_cast<std::size_t>(var)];
    for (auto& [r, a] : col) {
        if (r == row) {
            a += value;
            return;
        }
    }
    col.emplace_back(row, value);
}

namespace {

using SparseColumn = std::vector<std::pair<int, double>>;

// Model translated to  min c'z, Az = b, z >= 0, b >= 0, with row and column scaling.
struct StandardForm {
    int m = 0;
    std::vector<SparseColumn> cols;
    std::vector<double> cost;
    std::vector<double> b;
    std::vector<BasisEntry> identity;  // per column
    std::vector<double> col_scale;
    std::vector<double> row_scale;
    std::vector<double> row_sign;
    // recovery: x_j = offset_j + sum(coef * z_k)
    std::vector<double> offset;
    std::vector<std::vector<std::pair<int, double>>> var_parts;
    std::map<std::pair<int, int>, int> index_of;  // (kind, index) -> column
    std::vector<int> initial_slack;                // per row: column usable as initial basic, or -1
};

double pow2_scale(double magnitude) {
    if (magnitude <= 0.0 || !std::isfinite(magnitude)) {
        return 1.0;
    }
    return std::ldexp(1.0, -static_cast<int>(std::lround(std::log2(magnitude))));
}

StandardForm standardize(const Model& model) {
    StandardForm sf;
    const int m0 = model.num_rows();
    const int nv = model.num_variables();

    std::vector<double> b(static_cast<std::size_t>(m0));
    for (int i = 0; i < m0; ++i) {
        b[static_cast<std::size_t>(i)] = model.rhs(i);
    }
    std::vector<std::vector<std::pair<int, double>>> upper_rows;  // extra rows: (col, coef), rhs
    std::vector<double> upper_rhs;
    std::vector<int> upper_var;

    sf.offset.assign(static_cast<std::size_t>(nv), 0.0);
    sf.var_parts.assign(static_cast<std::size_t>(nv), {});

    auto add_col = [&](SparseColumn col, double cost, BasisEntry id) {
        sf.cols.push_back(std::move(col));
        sf.cost.push_back(cost);
        sf.identity.push_back(id);
        sf.index_of[{static_cast<int>(id.kind), id.index}] = static_cast<int>(sf.cols.size()) - 1;
        return static_cast<int>(sf.cols.size()) - 1;
    };

    for (int j = 0; j < nv; ++j) {
        const double lo = model.lower(j);
        const double up = model.upper(j);
        const auto& col = model.column(j);
        const double c = model.cost(j);
        const auto ju = static_cast<std::size_t>(j);
        if (std::isfinite(lo)) {
            for (const auto& [r, a] : col) {
                b[static_cast<std::size_t>(r)] -= a * lo;
            }
            sf.offset[ju] = lo;
            const int k = add_col(col, c, {BasisEntry::Kind::kVariablePlus, j});
            sf.var_parts[ju].emplace_back(k, 1.0);
            if (std::isfinite(up)) {
                upper_rows.push_back({{k, 1.0}});
                upper_rhs.push_back(up - lo);
                upper_var.push_back(j);
            }
        } else if (std::isfinite(up)) {
            for (const auto& [r, a] : col) {
                b[static_cast<std::size_t>(r)] -= a * up;
            }
            sf.offset[ju] = up;
            SparseColumn neg;
            for (const auto& [r, a] : col) {
                neg.emplace_back(r, -a);
            }
            const int k = add_col(std::move(neg), -c, {BasisEntry::Kind::kVariableMinus, j});
            sf.var_parts[ju].emplace_back(k, -1.0);
        } else {
            const int kp = add_col(col, c, {BasisEntry::Kind::kVariablePlus, j});
            SparseColumn neg;
            for (const auto& [r, a] : col) {
                neg.emplace_back(r, -a);
            }
            const int km = add_col(std::move(neg), -c, {BasisEntry::Kind::kVariableMinus, j});
            sf.var_parts[ju].emplace_back(kp, 1.0);
            sf.var_parts[ju].emplace_back(km, -1.0);
        }
    }

    const int mu = static_cast<int>(upper_rows.size());
    sf.m = m0 + mu;
    for (int u = 0; u < mu; ++u) {
        const int row = m0 + u;
        for (const auto& [k, a] : upper_rows[static_cast<std::size_t>(u)]) {
            sf.cols[static_cast<std::size_t>(k)].emplace_back(row, a);
        }
        b.push_back(upper_rhs[static_cast<std::size_t>(u)]);
    }

    sf.initial_slack.assign(static_cast<std::size_t>(sf.m), -1);
    std::vector<int> slack_col(static_cast<std::size_t>(sf.m), -1);
    std::vector<double> slack_sign(static_cast<std::size_t>(sf.m), 0.0);
    for (int i = 0; i < m0; ++i) {
        const RowSense s = model.sense(i);
        if (s == RowSense::kEqual) {
            continue;
        }
        const double sign = (s == RowSense::kLessEqual) ? 1.0 : -1.0;
        slack_col[static_cast<std::size_t>(i)] = add_col({{i, sign}}, 0.0, {BasisEntry::Kind::kSlack, i});
        slack_sign[static_cast<std::size_t>(i)] = sign;
    }
    for (int u = 0; u < mu; ++u) {
        const int row = m0 + u;
        slack_col[static_cast<std::size_t>(row)] =
            add_col({{row, 1.0}}, 0.0, {BasisEntry::Kind::kUpperSlack, upper_var[static_cast<std::size_t>(u)]});
        slack_sign[static_cast<std::size_t>(row)] = 1.0;
    }

    // Row sign normalisation so that b >= 0.
    sf.row_sign.assign(static_cast<std::size_t>(sf.m), 1.0);
    for (int i = 0; i < sf.m; ++i) {
        if (b[static_cast<std::size_t>(i)] < 0.0) {
            sf.row_sign[static_cast<std::size_t>(i)] = -1.0;
            b[static_cast<std::size_t>(i)] = -b[static_cast<std::size_t>(i)];
        }
    }
    for (auto& col : sf.cols) {
        for (auto& [r, a] : col) {
            a *= sf.row_sign[static_cast<std::size_t>(r)];
        }
    }

    // Row then column equilibration by powers of two.
    std::vector<double> row_max(static_cast<std::size_t>(sf.m), 0.0);
    for (const auto& col : sf.cols) {
        for (const auto& [r, a] : col) {
            row_max[static_cast<std::size_t>(r)] = std::max(row_max[static_cast<std::size_t>(r)], std::abs(a));
        }
    }
    sf.row_scale.resize(static_cast<std::size_t>(sf.m));
    for (int i = 0; i < sf.m; ++i) {
        sf.row_scale[static_cast<std::size_t>(i)] = pow2_scale(row_max[static_cast<std::size_t>(i)]);
        b[static_cast<std::size_t>(i)] *= sf.row_scale[static_cast<std::size_t>(i)];
    }
    sf.col_scale.resize(sf.cols.size());
    for (std::size_t k = 0; k < sf.cols.size(); ++k) {
        double cmax = 0.0;
        for (auto& [r, a] : sf.cols[k]) {
            a *= sf.row_scale[static_cast<std::size_t>(r)];
            cmax = std::max(cmax, std::abs(a));
        }
        const double s = pow2_scale(cmax);
        sf.col_scale[k] = s;
        for (auto& [r, a] : sf.cols[k]) {
            a *= s;
        }
        sf.cost[k] *= s;
    }
    sf.b = std::move(b);

    for (int i = 0; i < sf.m; ++i) {
        const int k = slack_col[static_cast<std::size_t>(i)];
        if (k >= 0 && slack_sign[static_cast<std::size_t>(i)] * sf.row_sign[static_cast<std::size_t>(i)] > 0.0) {
            sf.initial_slack[static_cast<std::size_t>(i)] = k;
        }
    }
    return sf;
}

class Simplex {
public:
    Simplex(const StandardForm& sf, const Options& opt) : sf_(sf), opt_(opt), m_(sf.m), n_(static_cast<int>(sf.cols.size())) {
        basic_pos_.assign(static_cast<std::size_t>(n_ + m_), -1);
        max_iter_ = opt.max_iterations > 0 ? opt.max_iterations : std::max(20000, 50 * (m_ + n_));
    }

    bool warm_start(const Basis& basis) {
        if (static_cast<int>(basis.entries.size()) != m_) {
            return false;
        }
        std::vector<int> cols;
        for (const auto& e : basis.entries) {
            int k = -1;
            if (e.kind == BasisEntry::Kind::kArtificial) {
                if (e.index < 0 || e.index >= m_) {
                    return false;
                }
                k = n_ + e.index;
            } else {
                auto it = sf_.index_of.find({static_cast<int>(e.kind), e.index});
                if (it == sf_.index_of.end()) {
                    return false;
                }
                k = it->second;
            }
            cols.push_back(k);
        }
        auto sorted = cols;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            return false;
        }
        basis_ = cols;
        std::fill(basic_pos_.begin(), basic_pos_.end(), -1);
        for (int i = 0; i < m_; ++i) {
            basic_pos_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = i;
        }
        Eigen::MatrixXd B = basis_matrix();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
        if (m_ > 0 && !lu.isInvertible()) {
            return false;
        }
        binv_ = m_ > 0 ? Eigen::MatrixXd(lu.inverse()) : Eigen::MatrixXd(0, 0);
        recompute_primal();
        for (int i = 0; i < m_; ++i) {
            if (x_b_(i) < -opt_.feasibility_tol) {
                return false;
            }
            // artificials in a warm basis are only acceptable at zero
            if (basis_[static_cast<std::size_t>(i)] >= n_ && x_b_(i) > opt_.feasibility_tol) {
                return false;
            }
        }
        return true;
    }

    void cold_start() {
        basis_.assign(static_cast<std::size_t>(m_), -1);
        std::fill(basic_pos_.begin(), basic_pos_.end(), -1);
        for (int i = 0; i < m_; ++i) {
            const int k = sf_.initial_slack[static_cast<std::size_t>(i)];
            basis_[static_cast<std::size_t>(i)] = (k >= 0) ? k : n_ + i;
            basic_pos_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = i;
        }
        refactor();
    }

    Status phase_one() {
        bool any = false;
        for (int k : basis_) {
            any = any || k >= n_;
        }
        if (!any) {
            return Status::kOptimal;
        }
        phase_ = 1;
        const Status st = iterate();
        if (st == Status::kIterationLimit) {
            return st;
        }
        refactor();
        if (broken_) {
            return Status::kIterationLimit;
        }
        double infeas = 0.0;
        for (int i = 0; i < m_; ++i) {
            if (basis_[static_cast<std::size_t>(i)] >= n_) {
                infeas += std::max(0.0, x_b_(i));
            }
        }
        double bmax = 1.0;
        for (double v : sf_.b) {
            bmax = std::max(bmax, v);
        }
        if (infeas > 1e-8 * bmax) {
            return Status::kInfeasible;
        }
        drive_out_artificials();
        return Status::kOptimal;
    }

    Status phase_two() {
        phase_ = 2;
        return iterate();
    }

    [[nodiscard]] int iterations() const { return iterations_; }
    [[nodiscard]] bool broken() const { return broken_; }

    void finalize(const Model& model, Solution& sol) {
        refactor();
        const int nv = model.num_variables();
        std::vector<double> z(static_cast<std::size_t>(n_), 0.0);
        for (int i = 0; i < m_; ++i) {
            const int k = basis_[static_cast<std::size_t>(i)];
            if (k < n_) {
                z[static_cast<std::size_t>(k)] = std::max(0.0, x_b_(i)) * sf_.col_scale[static_cast<std::size_t>(k)];
            }
        }
        sol.x.assign(static_cast<std::size_t>(nv), 0.0);
        sol.objective = 0.0;
        for (int j = 0; j < nv; ++j) {
            double v = sf_.offset[static_cast<std::size_t>(j)];
            for (const auto& [k, coef] : sf_.var_parts[static_cast<std::size_t>(j)]) {
                v += coef * z[static_cast<std::size_t>(k)];
            }
            sol.x[static_cast<std::size_t>(j)] = v;
            sol.objective += model.cost(j) * v;
        }
        const Eigen::VectorXd y = duals(2);
        sol.row_duals.assign(static_cast<std::size_t>(model.num_rows()), 0.0);
        for (int i = 0; i < model.num_rows(); ++i) {
            const auto iu = static_cast<std::size_t>(i);
            sol.row_duals[iu] = y(i) * sf_.row_scale[iu] * sf_.row_sign[iu];
        }
        sol.basis.entries.clear();
        for (int i = 0; i < m_; ++i) {
            const int k = basis_[static_cast<std::size_t>(i)];
            if (k >= n_) {
                sol.basis.entries.push_back({BasisEntry::Kind::kArtificial, k - n_});
            } else {
                sol.basis.entries.push_back(sf_.identity[static_cast<std::size_t>(k)]);
            }
        }
    }

private:
    [[nodiscard]] double cost_of(int k, int phase) const {
        if (k >= n_) {
            return phase == 1 ? 1.0 : 0.0;
        }
        return phase == 1 ? 0.0 : sf_.cost[static_cast<std::size_t>(k)];
    }

    Eigen::MatrixXd basis_matrix() const {
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
        for (int i = 0; i < m_; ++i) {
            const int k = basis_[static_cast<std::size_t>(i)];
            if (k >= n_) {
                B(k - n_, i) = 1.0;
            } else {
                for (const auto& [r, a] : sf_.cols[static_cast<std::size_t>(k)]) {
                    B(r, i) = a;
                }
            }
        }
        return B;
    }

    void refactor() {
        if (m_ == 0) {
            binv_.resize(0, 0);
            x_b_.resize(0);
            return;
        }
        const Eigen::MatrixXd B = basis_matrix();
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
        binv_ = lu.inverse();
        recompute_primal();
        // a degenerate pivot on a tiny entry can leave B numerically singular
        const Eigen::Map<const Eigen::VectorXd> b(sf_.b.data(), m_);
        if (!binv_.allFinite() || (B * x_b_ - b).lpNorm<Eigen::Infinity>() > 1e-6 * (1.0 + b.lpNorm<Eigen::Infinity>())) {
            broken_ = true;
        }
        since_refactor_ = 0;
    }

    void recompute_primal() {
        Eigen::VectorXd b(m_);
        for (int i = 0; i < m_; ++i) {
            b(i) = sf_.b[static_cast<std::size_t>(i)];
        }
        x_b_ = binv_ * b;
        for (int i = 0; i < m_; ++i) {
            if (x_b_(i) < 0.0 && x_b_(i) > -opt_.feasibility_tol) {
                x_b_(i) = 0.0;
            }
        }
    }

    Eigen::VectorXd duals(int phase) const {
        Eigen::VectorXd cb(m_);
        for (int i = 0; i < m_; ++i) {
            cb(i) = cost_of(basis_[static_cast<std::size_t>(i)], phase);
        }
        return binv_.transpose() * cb;
    }

    Eigen::VectorXd ftran(int k) const {
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m_);
        if (k >= n_) {
            alpha = binv_.col(k - n_);
            return alpha;
        }
        for (const auto& [r, a] : sf_.cols[static_cast<std::size_t>(k)]) {
            alpha.noalias() += a * binv_.col(r);
        }
        return alpha;
    }

    void pivot(int r, int q, const Eigen::VectorXd& alpha) {
        const double step = x_b_(r) / alpha(r);
        x_b_.noalias() -= step * alpha;
        x_b_(r) = step;
        Eigen::RowVectorXd row = binv_.row(r) / alpha(r);
        binv_.noalias() -= alpha * row;
        binv_.row(r) = row;
        basic_pos_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = -1;
        basis_[static_cast<std::size_t>(r)] = q;
        basic_pos_[static_cast<std::size_t>(q)] = r;
        for (int i = 0; i < m_; ++i) {
            if (x_b_(i) < 0.0 && x_b_(i) > -opt_.feasibility_tol) {
                x_b_(i) = 0.0;
            }
        }
        if (++since_refactor_ >= opt_.refactor_interval) {
            refactor();
        }
    }

    Status iterate() {
        constexpr double kPivotTol = 1e-9;
        int degenerate = 0;
        bool bland = false;
        while (true) {
            if (iterations_ >= max_iter_ || broken_) {
                return Status::kIterationLimit;
            }
            const Eigen::VectorXd y = duals(phase_);
            int q = -1;
            double best = -opt_.optimality_tol;
            for (int k = 0; k < n_; ++k) {
                if (basic_pos_[static_cast<std::size_t>(k)] >= 0) {
                    continue;
                }
                double d = cost_of(k, phase_);
                for (const auto& [r, a] : sf_.cols[static_cast<std::size_t>(k)]) {
                    d -= y(r) * a;
                }
                if (bland) {
                    if (d < -opt_.optimality_tol) {
                        q = k;
                        break;
                    }
                } else if (d < best) {
                    best = d;
                    q = k;
                }
            }
            if (q < 0) {
                return Status::kOptimal;
            }
            const Eigen::VectorXd alpha = ftran(q);

            double bound = kInfinity;
            for (int i = 0; i < m_; ++i) {
                if (alpha(i) > kPivotTol) {
                    bound = std::min(bound, (x_b_(i) + opt_.feasibility_tol) / alpha(i));
                }
            }
            if (bound == kInfinity) {
                if (phase_ == 1) {
                    // cannot happen with a bounded phase-1 objective; treat as numerical trouble
                    refactor();
                    bland = true;
                    ++iterations_;
                    continue;
                }
                return Status::kUnbounded;
            }
            int r = -1;
            double exact_min = kInfinity;
            if (bland) {
                for (int i = 0; i < m_; ++i) {
                    if (alpha(i) > kPivotTol) {
                        exact_min = std::min(exact_min, std::max(0.0, x_b_(i)) / alpha(i));
                    }
                }
            }
            for (int i = 0; i < m_; ++i) {
                if (alpha(i) <= kPivotTol) {
                    continue;
                }
                const double ratio = std::max(0.0, x_b_(i)) / alpha(i);
                if (ratio > bound) {
                    continue;
                }
                if (bland) {
                    if (ratio <= exact_min * (1.0 + 1e-12) + 1e-300 &&
                        (r < 0 || basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(r)])) {
                        r = i;
                    }
                } else if (r < 0 || alpha(i) > alpha(r)) {
                    r = i;
                }
            }
            const double step = std::max(0.0, x_b_(r)) / alpha(r);
            if (step <= 1e-12) {
                if (++degenerate >= opt_.degenerate_switch) {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            pivot(r, q, alpha);
            ++iterations_;
        }
    }

    void drive_out_artificials() {
        for (int r = 0; r < m_; ++r) {
            if (basis_[static_cast<std::size_t>(r)] < n_) {
                continue;
            }
            const Eigen::RowVectorXd row = binv_.row(r);
            int best = -1;
            double best_abs = 1e-7;
            for (int k = 0; k < n_; ++k) {
                if (basic_pos_[static_cast<std::size_t>(k)] >= 0) {
                    continue;
                }
                double v = 0.0;
                for (const auto& [i, a] : sf_.cols[static_cast<std::size_t>(k)]) {
                    v += row(i) * a;
                }
                if (std::abs(v) > best_abs) {
                    best_abs = std::abs(v);
                    best = k;
                }
            }
            if (best >= 0) {
                const Eigen::VectorXd alpha = ftran(best);
                x_b_(r) = 0.0;
                pivot(r, best, alpha);
            }
        }
        refactor();
    }

    const StandardForm& sf_;
    const Options& opt_;
    int m_;
    int n_;
    int phase_ = 1;
    int iterations_ = 0;
    int max_iter_ = 0;
    int since_refactor_ = 0;
    bool broken_ = false;
    std::vector<int> basis_;
    std::vector<int> basic_pos_;
    Eigen::MatrixXd binv_;
    Eigen::VectorXd x_b_;
};

// Largest row violation of sol.x, relative to max(1, |rhs|).
double row_violation(const Model& model, const std::vector<double>& x) {
    std::vector<double> act(static_cast<std::size_t>(model.num_rows()), 0.0);
    for (int j = 0; j < model.num_variables(); ++j) {
        for (const auto& [r, a] : model.column(j)) {
            act[static_cast<std::size_t>(r)] += a * x[static_cast<std::size_t>(j)];
        }
    }
    double worst = 0.0;
    for (int r = 0; r < model.num_rows(); ++r) {
        const double d = act[static_cast<std::size_t>(r)] - model.rhs(r);
        double v = std::abs(d);
        if (model.sense(r) == RowSense::kLessEqual) {
            v = std::max(0.0, d);
        } else if (model.sense(r) == RowSense::kGreaterEqual) {
            v = std::max(0.0, -d);
        }
        worst = std::max(worst, v / std::max(1.0, std::abs(model.rhs(r))));
    }
    return worst;
}

Solution solve_once(const Model& model, const StandardForm& sf, const Options& options, const Basis* warm,
                    bool& trustworthy) {
    Simplex simplex(sf, options);
    Solution sol;
    trustworthy = true;

    bool warmed = warm != nullptr && simplex.warm_start(*warm);
    if (!warmed) {
        simplex.cold_start();
        const Status p1 = simplex.phase_one();
        if (p1 != Status::kOptimal) {
            sol.status = p1;
            sol.iterations = simplex.iterations();
            trustworthy = !simplex.broken();
            return sol;
        }
    }
    sol.status = simplex.phase_two();
    sol.iterations = simplex.iterations();
    if (sol.status == Status::kOptimal || sol.status == Status::kIterationLimit) {
        simplex.finalize(model, sol);
    }
    if (simplex.broken()) {
        trustworthy = false;
    } else if (sol.status == Status::kOptimal) {
        trustworthy = row_violation(model, sol.x) <= 1e-6;
    }
    return sol;
}

}  // namespace

Solution solve(const Model& model, const Options& options, const Basis* warm) {
    const StandardForm sf = standardize(model);
    bool ok = false;
    Solution sol = solve_once(model, sf, options, warm, ok);
    if (ok) {
        return sol;
    }
    // Retry cold with steepest-only pricing and frequent refactorisation.
    Options careful = options;
    careful.degenerate_switch = 1 << 30;
    careful.refactor_interval = std::min(options.refactor_interval, 16);
    Solution again = solve_once(model, sf, careful, nullptr, ok);
    again.iterations += sol.iterations;
    if (!ok && again.status == Status::kOptimal) {
        again.status = Status::kIterationLimit;
    }
    return again;
}

}  // namespace rumax::lp

#include "medbounds/simplex.hpp"

#include "medbounds/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace medbounds {

namespace {

constexpr double kReducedCostTol = 1e-11;
constexpr double kPivotTol = 1e-11;
constexpr double kRatioTieTol = 1e-13;
constexpr double kFeasibilityTol = 1e-9;
constexpr std::size_t kMaxIterations = 200000;

// Working state of the tableau. Every row reads  sum_j T(i, j) x_j = 0  with
// basic columns forming an identity; nonbasic variables sit at a bound.
class Tableau {
public:
    Tableau(const BoundedLp& lp) : n_(lp.a.cols), m_(lp.a.rows) {
        total_ = n_ + 2 * m_;
        t_ = DenseMatrix(m_, total_);
        lo_.assign(total_, 0.0);
        hi_.assign(total_, 0.0);
        x_.assign(total_, 0.0);
        at_upper_.assign(total_, 0);
        basic_.assign(m_, 0);
        is_basic_.assign(total_, 0);

        for (std::size_t j = 0; j < n_; ++j) {
            lo_[j] = lp.col_lo[j];
            hi_[j] = lp.col_hi[j];
            x_[j] = lo_[j];
        }
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t s = n_ + i;
            const std::size_t art = n_ + m_ + i;
            lo_[s] = lp.row_lo[i];
            hi_[s] = lp.row_hi[i];
            double activity = 0.0;
            for (std::size_t j = 0; j < n_; ++j) activity += lp.a(i, j) * x_[j];
            if (std::abs(activity - hi_[s]) < std::abs(activity - lo_[s])) {
                x_[s] = hi_[s];
                at_upper_[s] = 1;
            } else {
                x_[s] = lo_[s];
            }
            const double residual = x_[s] - activity;
            const double sign = residual >= 0.0 ? 1.0 : -1.0;
            for (std::size_t j = 0; j < n_; ++j) t_(i, j) = sign * lp.a(i, j);
            t_(i, s) = -sign;
            t_(i, art) = 1.0;
            lo_[art] = 0.0;
            hi_[art] = std::numeric_limits<double>::infinity();
            x_[art] = std::abs(residual);
            basic_[i] = art;
            is_basic_[art] = 1;
        }
    }

    bool is_artificial(std::size_t j) const { return j >= n_ + m_; }

    // Minimizes cost^T x from the current basic feasible point.
    std::size_t optimize(const std::vector<double>& cost) {
        std::size_t iterations = 0;
        std::vector<double> reduced(total_);
        while (true) {
            require(iterations < kMaxIterations, ErrorCode::Internal,
                    "simplex iteration limit reached");
            compute_reduced_costs(cost, reduced);

            std::size_t enter = total_;
            double dir = 0.0;
            for (std::size_t j = 0; j < total_; ++j) {
                if (is_basic_[j] || !(hi_[j] - lo_[j] > 0.0)) continue;
                if (!at_upper_[j] && reduced[j] < -kReducedCostTol) {
                    enter = j;
                    dir = 1.0;
                    break;
                }
                if (at_upper_[j] && reduced[j] > kReducedCostTol) {
                    enter = j;
                    dir = -1.0;
                    break;
                }
            }
            if (enter == total_) return iterations;
            ++iterations;

            // Ratio test: basic x_B(i) moves by -T(i, enter) * dir * step.
            double best = hi_[enter] - lo_[enter];
            std::size_t leave_row = m_;
            for (std::size_t i = 0; i < m_; ++i) {
                const double alpha = t_(i, enter) * dir;
                const std::size_t b = basic_[i];
                double limit;
                if (alpha > kPivotTol) {
                    limit = std::max(0.0, (x_[b] - lo_[b]) / alpha);
                } else if (alpha < -kPivotTol) {
                    if (!std::isfinite(hi_[b])) continue;
                    limit = std::max(0.0, (hi_[b] - x_[b]) / -alpha);
                } else {
                    continue;
                }
                if (limit < best - kRatioTieTol) {
                    best = limit;
                    leave_row = i;
                } else if (limit <= best + kRatioTieTol && leave_row != m_ &&
                           b < basic_[leave_row]) {
                    leave_row = i;
                }
            }
            require(std::isfinite(best), ErrorCode::Internal,
                    "linear program is unbounded, which a bounded polytope cannot be");

            if (leave_row == m_) {
                // Bound flip: the entering variable reaches its other bound first.
                x_[enter] = at_upper_[enter] ? lo_[enter] : hi_[enter];
                at_upper_[enter] = !at_upper_[enter];
                refresh_basic_values();
                continue;
            }

            const std::size_t leaving = basic_[leave_row];
            const double alpha = t_(leave_row, enter) * dir;
            x_[enter] += dir * best;
            x_[leaving] = alpha > 0.0 ? lo_[leaving] : hi_[leaving];
            at_upper_[leaving] = alpha > 0.0 ? 0 : 1;
            pivot(leave_row, enter);
            refresh_basic_values();
        }
    }

    double artificial_total() const {
        double total = 0.0;
        for (std::size_t j = n_ + m_; j < total_; ++j) total += x_[j];
        return total;
    }

    // After phase one: swap zero-level artificials out of the basis where a
    // real column can replace them, then pin every artificial at zero.
    void retire_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (!is_artificial(basic_[i])) continue;
            for (std::size_t j = 0; j < n_ + m_; ++j) {
                if (is_basic_[j] || std::abs(t_(i, j)) <= 1e-9) continue;
                const std::size_t leaving = basic_[i];
                pivot(i, j);
                x_[leaving] = 0.0;
                at_upper_[leaving] = 0;
                break;
            }
        }
        for (std::size_t j = n_ + m_; j < total_; ++j) {
            hi_[j] = 0.0;
            if (!is_basic_[j]) {
                x_[j] = 0.0;
                at_upper_[j] = 0;
            }
        }
        refresh_basic_values();
    }

    std::vector<double> structural() const {
        return std::vector<double>(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    }

    std::size_t total() const { return total_; }
    std::size_t structural_count() const { return n_; }
    std::size_t slack_offset() const { return n_; }
    std::size_t artificial_offset() const { return n_ + m_; }

private:
    void compute_reduced_costs(const std::vector<double>& cost, std::vector<double>& reduced) const {
        for (std::size_t j = 0; j < total_; ++j) reduced[j] = cost[j];
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = cost[basic_[i]];
            if (cb == 0.0) continue;
            const double* row = &t_.data[i * total_];
            for (std::size_t j = 0; j < total_; ++j) reduced[j] -= cb * row[j];
        }
    }

    void pivot(std::size_t row, std::size_t col) {
        double* pr = &t_.data[row * total_];
        const double piv = pr[col];
        for (std::size_t j = 0; j < total_; ++j) pr[j] /= piv;
        pr[col] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row) continue;
            double* pi = &t_.data[i * total_];
            const double f = pi[col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < total_; ++j) pi[j] -= f * pr[j];
            pi[col] = 0.0;
        }
        is_basic_[basic_[row]] = 0;
        basic_[row] = col;
        is_basic_[col] = 1;
        at_upper_[col] = 0;
    }

    void refresh_basic_values() {
        for (std::size_t i = 0; i < m_; ++i) {
            const double* row = &t_.data[i * total_];
            double v = 0.0;
            for (std::size_t j = 0; j < total_; ++j) {
                if (!is_basic_[j]) v -= row[j] * x_[j];
            }
            x_[basic_[i]] = v;
        }
    }

    std::size_t n_;
    std::size_t m_;
    std::size_t total_ = 0;
    DenseMatrix t_;
    std::vector<double> lo_;
    std::vector<double> hi_;
    std::vector<double> x_;
    std::vector<char> at_upper_;
    std::vector<std::size_t> basic_;
    std::vector<char> is_basic_;
};

}  // namespace

LpSolution solve_bounded_lp(const BoundedLp& lp, Sense sense) {
    const std::size_t n = lp.a.cols;
    const std::size_t m = lp.a.rows;
    require(lp.col_lo.size() == n && lp.col_hi.size() == n && lp.cost.size() == n,
            ErrorCode::InvalidArgument, "column data does not match the constraint matrix");
    require(lp.row_lo.size() == m && lp.row_hi.size() == m, ErrorCode::InvalidArgument,
            "row bounds do not match the constraint matrix");
    for (std::size_t j = 0; j < n; ++j) {
        require(std::isfinite(lp.col_lo[j]) && std::isfinite(lp.col_hi[j]),
                ErrorCode::InvalidArgument, "variable bounds must be finite");
        require(lp.col_lo[j] <= lp.col_hi[j] + kFeasibilityTol, ErrorCode::Infeasible,
                "variable " + std::to_string(j) + " has an empty bound interval");
    }
    for (std::size_t i = 0; i < m; ++i) {
        require(std::isfinite(lp.row_lo[i]) && std::isfinite(lp.row_hi[i]),
                ErrorCode::InvalidArgument, "row bounds must be finite");
        require(lp.row_lo[i] <= lp.row_hi[i] + kFeasibilityTol, ErrorCode::Infeasible,
                "row " + std::to_string(i) + " has an empty bound interval");
    }

    // Tolerate bound intervals that are empty only through rounding.
    BoundedLp work = lp;
    for (std::size_t j = 0; j < n; ++j) work.col_hi[j] = std::max(work.col_hi[j], work.col_lo[j]);
    for (std::size_t i = 0; i < m; ++i) work.row_hi[i] = std::max(work.row_hi[i], work.row_lo[i]);

    Tableau tableau(work);
    std::vector<double> phase1(tableau.total(), 0.0);
    for (std::size_t j = tableau.artificial_offset(); j < tableau.total(); ++j) phase1[j] = 1.0;
    std::size_t iterations = tableau.optimize(phase1);
    require(tableau.artificial_total() <= kFeasibilityTol * std::max<double>(1.0, double(m)),
            ErrorCode::Infeasible, "linear program has no feasible point");
    tableau.retire_artificials();

    const double sign = sense == Sense::Minimize ? 1.0 : -1.0;
    std::vector<double> phase2(tableau.total(), 0.0);
    for (std::size_t j = 0; j < n; ++j) phase2[j] = sign * lp.cost[j];
    iterations += tableau.optimize(phase2);

    LpSolution out;
    out.z = tableau.structural();
    for (std::size_t j = 0; j < n; ++j) {
        out.z[j] = std::clamp(out.z[j], lp.col_lo[j], std::max(lp.col_lo[j], lp.col_hi[j]));
        out.objective += lp.cost[j] * out.z[j];
    }
    out.iterations = iterations;
    return out;
}

}  // namespace medbounds

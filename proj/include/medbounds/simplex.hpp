#pragma once

#include <cstddef>
#include <vector>

namespace medbounds {

/// Dense row-major matrix.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
};

/// minimize/maximize cost^T z  subject to  row_lo <= A z <= row_hi,
/// col_lo <= z <= col_hi. All bounds must be finite.
struct BoundedLp {
    DenseMatrix a;
    std::vector<double> row_lo;
    std::vector<double> row_hi;
    std::vector<double> col_lo;
    std::vector<double> col_hi;
    std::vector<double> cost;
};

enum class Sense { Minimize, Maximize };

struct LpSolution {
    std::vector<double> z;
    double objective = 0.0;
    std::size_t iterations = 0;
};

/// Two-phase primal simplex on a dense tableau with bounded variables and
/// Bland's smallest-index rule for both entering and leaving choices, so the
/// returned vertex is a deterministic function of the input. Throws Infeasible
/// when phase one cannot drive the artificial variables to zero.
LpSolution solve_bounded_lp(const BoundedLp& lp, Sense sense);

}  // namespace medbounds

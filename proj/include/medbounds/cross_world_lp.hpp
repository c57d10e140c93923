#pragma once

#include "medbounds/bounds.hpp"
#include "medbounds/mediation_law.hpp"
#include "medbounds/simplex.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace medbounds {

/// Linear program over the unidentified joint pi[r][r*] = pr{R(a)=r, R(a*)=r*}.
///
/// pi is vectorized row-major (r indexes R(a)), and delta holds the leading
/// (p-1) x (p-1) block, also row-major: delta block j = (pi[j][0..p-2]).
/// With that convention pi = B delta + d, where the last column of each of the
/// first p-1 row blocks and the whole last row are recovered from the two
/// marginals. gamma0 = x^T pi with x the vectorized nested-mean matrix.
struct CrossWorldLp {
    std::size_t p = 1;
    DenseMatrix b;                   // p^2 x (p-1)^2
    std::vector<double> d;           // p^2
    std::vector<double> x;           // p^2
    std::vector<double> p_r_comparison;  // pr(R | a), row sums of pi
    std::vector<double> p_r_baseline;    // pr(R | a*), column sums of pi
    std::vector<double> delta_lo;    // (p-1)^2 Fréchet box of the delta entries
    std::vector<double> delta_hi;
    std::vector<double> pi_lo;       // p^2 Fréchet box of every pi entry
    std::vector<double> pi_hi;

    std::size_t delta_size() const { return (p - 1) * (p - 1); }
};

enum class Direction { Minimize, Maximize };

struct CrossWorldSolution {
    std::vector<double> delta;
    double value = 0.0;  // x^T (B delta + d)
    std::size_t iterations = 0;
};

/// Entries of x with no identified value (zero marginal weight on either arm)
/// are set to zero; the box forces the matching pi entry to zero anyway.
CrossWorldLp build_cross_world_lp(const MediationLaw& law);
CrossWorldLp build_cross_world_lp(std::vector<double> p_r_comparison,
                                  std::vector<double> p_r_baseline, const NestedMeans& x);

std::vector<double> pi_from_delta(const CrossWorldLp& lp, const std::vector<double>& delta);
double objective_at(const CrossWorldLp& lp, const std::vector<double>& delta);
/// delta of the independence coupling pi = pr(R|a) pr(R|a*)^T, always feasible.
std::vector<double> independence_delta(const CrossWorldLp& lp);

/// Optimal vertex by dense simplex with Bland's rule. p <= 64.
CrossWorldSolution simplex_solve(const CrossWorldLp& lp, Direction direction);

/// Bounds on gamma0 under independent structural errors with R accounted for.
IntervalEstimate pde_bounds_npsem_lp(const MediationLaw& law);
IntervalEstimate pde_bounds_npsem_lp(const CrossWorldLp& lp);

/// Closed form for binary R. R=1 is level index 1.
double binary_r_objective(double p_comparison_1, double p_baseline_1, const NestedMeans& x,
                          double pi11);
IntervalEstimate pde_bounds_binary_r(const MediationLaw& law);
IntervalEstimate pde_bounds_binary_r(double p_comparison_1, double p_baseline_1,
                                     const NestedMeans& x);

/// Exact optimum by enumerating every basic feasible solution of the
/// transportation polytope {pi >= 0 with the two marginals}: one candidate per
/// spanning tree of the complete bipartite graph on R(a) x R(a*) levels.
/// Independent of the B/d parametrization; test oracle. (p-1)^2 <= 9.
IntervalEstimate enumerate_vertices_oracle(const CrossWorldLp& lp);

/// Plain-text dump in lp_solve's LP format, plus B, d and x as comments.
std::string lp_text(const CrossWorldLp& lp);

}  // namespace medbounds

#pragma once

#include "medbounds/bounds.hpp"
#include "medbounds/categorical.hpp"
#include "medbounds/mediation_law.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace medbounds {

/// One fitted law per observed covariate pattern, with pr(C = c).
struct StratifiedLaws {
    std::vector<std::size_t> patterns;
    std::vector<MediationLaw> laws;
    std::vector<double> weights;
    /// Elementwise pr(C)-weighted average of the stratum tables.
    MediationLaw marginal;
    /// Covariate patterns dropped because they carried zero weight.
    std::size_t dropped_strata = 0;

    std::size_t size() const { return laws.size(); }
};

/// Builds strata from explicit laws and weights (weights are renormalized).
StratifiedLaws make_strata(std::vector<MediationLaw> laws, std::vector<double> weights,
                           std::vector<std::size_t> patterns = {});

/// Fits a law per covariate pattern. pr(C) is the marginal weighted frequency.
StratifiedLaws stratify(const Dataset& data, ZeroCellPolicy policy = ZeroCellPolicy::Error);

/// Bounds computed within each stratum and averaged with pr(C) weights.
IntervalEstimate adjusted_bounds_stratified(const StratifiedLaws& strata, bool account_for_r);

struct CovariateLpBounds {
    IntervalEstimate combined;
    /// Per-stratum LP bounds averaged over pr(C).
    IntervalEstimate stratum_average;
    /// LP on pr(C)-averaged R marginals and pr(C)-averaged nested means.
    IntervalEstimate averaged_inputs;
    std::size_t dropped_strata = 0;
};

/// Larger of the two lower bounds and smaller of the two upper bounds. Throws
/// IncoherentBounds when they cross by more than 1e-9; a smaller crossing is
/// collapsed to its midpoint.
CovariateLpBounds adjusted_bounds_lp(const StratifiedLaws& strata,
                                           bool binary_closed_form = false);

/// sum_c pr(c) f(law_c) for a point functional; endpoints averaged separately.
IntervalEstimate standardize(const StratifiedLaws& strata,
                             const std::function<IntervalEstimate(const MediationLaw&)>& f);

/// sum_c pr(c) E(Y | A = arm, c).
double standardized_arm_mean(const StratifiedLaws& strata, std::size_t arm);

}  // namespace medbounds

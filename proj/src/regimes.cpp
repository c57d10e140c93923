#include "medbounds/regimes.hpp"

#include "medbounds/cross_world_lp.hpp"
#include "medbounds/errors.hpp"

#include <algorithm>
#include <cstdio>

namespace medbounds {

namespace {

using Kind = AssumptionSet::Kind;

bool binary_components(const LawShape& shape) {
    return !shape.r_components.empty() &&
           std::all_of(shape.r_components.begin(), shape.r_components.end(),
                       [](std::size_t k) { return k == 2; });
}

IntervalEstimate gamma0_impl(const StratifiedLaws& strata, const AssumptionSet& set,
                             RegimeResult* diag) {
    const bool single = strata.size() == 1;
    IntervalEstimate out;
    switch (set.kind) {
        case Kind::SwigIgnoreR:
            out = adjusted_bounds_stratified(strata, false);
            break;
        case Kind::SwigWithR:
            out = adjusted_bounds_stratified(strata, true);
            break;
        case Kind::NpsemIeIgnoreR:
            out = standardize(strata, pde_point_mediation_formula);
            break;
        case Kind::NpsemIeLp:
        case Kind::NpsemIeBinaryR: {
            const bool closed = set.kind == Kind::NpsemIeBinaryR;
            if (single) {
                out = closed ? pde_bounds_binary_r(strata.laws.front())
                             : pde_bounds_npsem_lp(strata.laws.front());
            } else {
                CovariateLpBounds cov = adjusted_bounds_lp(strata, closed);
                out = cov.combined;
                if (diag) diag->covariate_candidates = std::move(cov);
            }
            break;
        }
        case Kind::Monotonicity:
            out = standardize(strata, [](const MediationLaw& law) {
                return pde_point_monotonicity(law);
            });
            break;
        case Kind::NoMRInteraction:
            out = standardize(strata, [](const MediationLaw& law) {
                return pde_point_no_interaction(law);
            });
            if (diag) {
                double worst = 0.0;
                for (const auto& law : strata.laws) worst = std::max(worst, interaction_contrasts(law));
                char buf[128];
                std::snprintf(buf, sizeof buf, "largest observed M-R interaction contrast %.6g",
                              worst);
                diag->notes.emplace_back(buf);
            }
            break;
        case Kind::IndependentCrossWorldR:
            out = standardize(strata, pde_point_independent_r);
            break;
        case Kind::DeterministicCrossWorldR: {
            bool compatible = true;
            out = standardize(strata, [&](const MediationLaw& law) {
                const DeterministicRResult res = pde_point_deterministic_r(law, set.map);
                compatible = compatible && res.marginal_compatible;
                return res.estimate;
            });
            if (diag && !compatible) {
                diag->notes.emplace_back(
                    "pr(R | a*) pushed through the map does not reproduce pr(R | a)");
            }
            break;
        }
    }
    out.assumptions = set;
    return out;
}

}  // namespace

IntervalEstimate estimate_gamma0(const StratifiedLaws& strata, const AssumptionSet& set) {
    return gamma0_impl(strata, set, nullptr);
}

RegimeResult estimate_regime(const StratifiedLaws& strata, const AssumptionSet& set) {
    RegimeResult res;
    res.assumptions = set;
    const IntervalEstimate gamma0 = gamma0_impl(strata, set, &res);
    res.effects = effect_decomposition(standardized_arm_mean(strata, kComparison),
                                       standardized_arm_mean(strata, kBaseline), gamma0);
    if (strata.dropped_strata > 0) {
        res.notes.push_back(std::to_string(strata.dropped_strata) +
                            " covariate pattern(s) without records were dropped");
    }
    return res;
}

std::vector<AssumptionSet> applicable_regimes(const LawShape& shape) {
    std::vector<AssumptionSet> out;
    const std::size_t p = shape.r_levels();
    for (Kind k : all_assumption_kinds()) {
        if (k == Kind::DeterministicCrossWorldR) continue;
        if (k == Kind::NpsemIeBinaryR && p != 2) continue;
        if (k == Kind::Monotonicity && !binary_components(shape)) continue;
        AssumptionSet set;
        set.kind = k;
        out.push_back(set);
    }
    return out;
}

}  // namespace medbounds

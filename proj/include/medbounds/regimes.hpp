#pragma once

#include "medbounds/bounds.hpp"
#include "medbounds/covariates.hpp"

#include <optional>
#include <string>
#include <vector>

namespace medbounds {

struct RegimeResult {
    AssumptionSet assumptions;
    EffectDecomposition effects;
    /// The two candidate pairs behind a covariate-adjusted LP interval.
    std::optional<CovariateLpBounds> covariate_candidates;
    std::vector<std::string> notes;
};

/// gamma0 under one regime. With several covariate strata, interval regimes
/// use the covariate rules and point regimes are standardized over pr(C).
IntervalEstimate estimate_gamma0(const StratifiedLaws& strata, const AssumptionSet& set);

/// gamma0 plus the total, direct and indirect effects, with diagnostics.
RegimeResult estimate_regime(const StratifiedLaws& strata, const AssumptionSet& set);

/// Regimes whose structural requirements the law's shape meets. The
/// deterministic regime needs a user-supplied map and is never included.
std::vector<AssumptionSet> applicable_regimes(const LawShape& shape);

}  // namespace medbounds

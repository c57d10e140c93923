#include "medbounds/covariates.hpp"

#include "medbounds/cross_world_lp.hpp"
#include "medbounds/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace medbounds {

namespace {

constexpr double kIncoherenceTol = 1e-9;

MediationLaw average_laws(const std::vector<MediationLaw>& laws, const std::vector<double>& w) {
    const MediationLaw& first = laws.front();
    std::vector<double> p_r(first.r_table().size(), 0.0);
    std::vector<double> p_m(first.m_table().size(), 0.0);
    std::vector<double> p_y(first.y_table().size(), 0.0);
    std::vector<char> r_def(first.r_defined_mask().size(), 1);
    std::vector<char> m_def(first.m_defined_mask().size(), 1);
    std::vector<char> y_def(first.y_defined_mask().size(), 1);
    auto accumulate = [](std::vector<double>& dst, const std::vector<double>& src, double wt) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += wt * src[i];
    };
    auto intersect = [](std::vector<char>& dst, const std::vector<char>& src) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = dst[i] && src[i];
    };
    for (std::size_t c = 0; c < laws.size(); ++c) {
        require(laws[c].shape() == first.shape(), ErrorCode::InvalidArgument,
                "strata laws have different shapes");
        accumulate(p_r, laws[c].r_table(), w[c]);
        accumulate(p_m, laws[c].m_table(), w[c]);
        accumulate(p_y, laws[c].y_table(), w[c]);
        intersect(r_def, laws[c].r_defined_mask());
        intersect(m_def, laws[c].m_defined_mask());
        intersect(y_def, laws[c].y_defined_mask());
    }
    return MediationLaw(first.shape(), std::move(p_r), std::move(p_m), std::move(p_y),
                        first.policy(), std::move(r_def), std::move(m_def), std::move(y_def));
}

}  // namespace

StratifiedLaws make_strata(std::vector<MediationLaw> laws, std::vector<double> weights,
                           std::vector<std::size_t> patterns) {
    require(!laws.empty() && laws.size() == weights.size(), ErrorCode::InvalidArgument,
            "need one weight per stratum law");
    if (patterns.empty()) {
        patterns.resize(laws.size());
        std::iota(patterns.begin(), patterns.end(), 0);
    }
    require(patterns.size() == laws.size(), ErrorCode::InvalidArgument,
            "need one pattern per stratum law");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    require(total > 0.0, ErrorCode::EmptyStratum, "strata have zero total weight");
    for (double& w : weights) {
        require(w > 0.0, ErrorCode::EmptyStratum, "stratum with zero weight");
        w /= total;
    }
    MediationLaw marginal = average_laws(laws, weights);
    return StratifiedLaws{std::move(patterns), std::move(laws), std::move(weights),
                          std::move(marginal), 0};
}

StratifiedLaws stratify(const Dataset& data, ZeroCellPolicy policy) {
    const std::size_t n_patterns = data.codecs().covariates.size();
    std::vector<double> mass(n_patterns, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) mass[data.records()[i].c] += data.weights()[i];

    std::vector<MediationLaw> laws;
    std::vector<double> weights;
    std::vector<std::size_t> patterns;
    std::size_t dropped = 0;
    for (std::size_t c = 0; c < n_patterns; ++c) {
        if (mass[c] <= 0.0) {
            ++dropped;
            continue;
        }
        laws.push_back(fit_laws(data, c, policy));
        weights.push_back(mass[c]);
        patterns.push_back(c);
    }
    StratifiedLaws out = make_strata(std::move(laws), std::move(weights), std::move(patterns));
    out.dropped_strata = dropped;
    return out;
}

IntervalEstimate adjusted_bounds_stratified(const StratifiedLaws& strata, bool account_for_r) {
    double lower = 0.0;
    double upper = 0.0;
    AssumptionSet set;
    for (std::size_t c = 0; c < strata.size(); ++c) {
        const IntervalEstimate b = pde_bounds_swig(strata.laws[c], account_for_r);
        lower += strata.weights[c] * b.lower;
        upper += strata.weights[c] * b.upper;
        set = b.assumptions;
    }
    return IntervalEstimate::interval(lower, std::max(lower, upper), set);
}

CovariateLpBounds adjusted_bounds_lp(const StratifiedLaws& strata, bool binary_closed_form) {
    auto solve = [&](const std::vector<double>& pa, const std::vector<double>& pas,
                     const NestedMeans& x) {
        if (binary_closed_form) return pde_bounds_binary_r(pa.at(1), pas.at(1), x);
        return pde_bounds_npsem_lp(build_cross_world_lp(pa, pas, x));
    };

    const std::size_t p = strata.marginal.r_levels();
    if (binary_closed_form) {
        require(p == 2, ErrorCode::NotBinaryR, "closed-form bounds need binary R");
    }
    double avg_lower = 0.0;
    double avg_upper = 0.0;
    std::vector<double> pa(p, 0.0), pas(p, 0.0);
    NestedMeans x_avg{p, std::vector<double>(p * p, 0.0)};
    for (std::size_t c = 0; c < strata.size(); ++c) {
        const MediationLaw& law = strata.laws[c];
        const double w = strata.weights[c];
        const std::vector<double> pa_c = law.r_marginal(kComparison);
        const std::vector<double> pas_c = law.r_marginal(kBaseline);
        const NestedMeans x_c = nested_mean_matrix(law);
        const IntervalEstimate b = solve(pa_c, pas_c, x_c);
        avg_lower += w * b.lower;
        avg_upper += w * b.upper;
        for (std::size_t r = 0; r < p; ++r) {
            pa[r] += w * pa_c[r];
            pas[r] += w * pas_c[r];
        }
        for (std::size_t k = 0; k < p * p; ++k) {
            const double v = x_c.values[k];
            x_avg.values[k] += w * (std::isnan(v) ? 0.0 : v);
        }
    }

    CovariateLpBounds out;
    const auto kind = binary_closed_form ? AssumptionSet::Kind::NpsemIeBinaryR
                                         : AssumptionSet::Kind::NpsemIeLp;
    AssumptionSet set;
    set.kind = kind;
    out.stratum_average = IntervalEstimate::interval(avg_lower, std::max(avg_lower, avg_upper), set);
    out.averaged_inputs = solve(pa, pas, x_avg);
    out.averaged_inputs.assumptions = set;
    out.dropped_strata = strata.dropped_strata;

    double lower = std::max(out.stratum_average.lower, out.averaged_inputs.lower);
    double upper = std::min(out.stratum_average.upper, out.averaged_inputs.upper);
    require(lower <= upper + kIncoherenceTol, ErrorCode::IncoherentBounds,
            "covariate-adjusted candidate bounds do not overlap: lower " + std::to_string(lower) +
                " > upper " + std::to_string(upper));
    if (lower > upper) lower = upper = 0.5 * (lower + upper);
    out.combined = IntervalEstimate::interval(lower, upper, set);
    return out;
}

IntervalEstimate standardize(const StratifiedLaws& strata,
                             const std::function<IntervalEstimate(const MediationLaw&)>& f) {
    double lower = 0.0;
    double upper = 0.0;
    AssumptionSet set;
    bool point = true;
    for (std::size_t c = 0; c < strata.size(); ++c) {
        const IntervalEstimate e = f(strata.laws[c]);
        lower += strata.weights[c] * e.lower;
        upper += strata.weights[c] * e.upper;
        point = point && e.point_identified;
        set = e.assumptions;
    }
    if (point) return IntervalEstimate::point(lower, set);
    return IntervalEstimate::interval(lower, std::max(lower, upper), set);
}

double standardized_arm_mean(const StratifiedLaws& strata, std::size_t arm) {
    double total = 0.0;
    for (std::size_t c = 0; c < strata.size(); ++c) {
        total += strata.weights[c] * strata.laws[c].mean_y_arm(arm);
    }
    return total;
}

}  // namespace medbounds

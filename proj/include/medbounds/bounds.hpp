#pragma once

#include "medbounds/mediation_law.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace medbounds {

/// Identification regime a result was computed under.
struct AssumptionSet {
    enum class Kind {
        SwigIgnoreR,
        SwigWithR,
        NpsemIeIgnoreR,
        NpsemIeLp,
        NpsemIeBinaryR,
        Monotonicity,
        NoMRInteraction,
        IndependentCrossWorldR,
        DeterministicCrossWorldR,
    };

    Kind kind = Kind::SwigIgnoreR;
    /// Only for DeterministicCrossWorldR: r = map[r*], total on R's levels.
    std::vector<std::size_t> map;

    static AssumptionSet deterministic(std::vector<std::size_t> map);
    bool operator==(const AssumptionSet&) const = default;
};

std::string to_string(const AssumptionSet& set);
/// Parses the names produced by to_string ("swig-with-r", ...). The
/// deterministic regime takes its map separately.
AssumptionSet parse_assumption_set(std::string_view name);
std::vector<AssumptionSet::Kind> all_assumption_kinds();
bool is_point_regime(AssumptionSet::Kind kind);

/// [lower, upper] on the outcome scale.
struct IntervalEstimate {
    double lower = 0.0;
    double upper = 0.0;
    bool point_identified = false;
    AssumptionSet assumptions;

    static IntervalEstimate point(double value, AssumptionSet set);
    /// Flags the result as a point when the endpoints agree to 1e-12.
    static IntervalEstimate interval(double lower, double upper, AssumptionSet set);

    double width() const { return upper - lower; }
    bool contains(double v, double tol = 0.0) const {
        return v >= lower - tol && v <= upper + tol;
    }
};

/// Square matrix over R levels, indexed [r][r*] where r is a level of R(a)
/// and r* a level of R(a*).
struct NestedMeans {
    std::size_t p = 0;
    std::vector<double> values;

    double at(std::size_t r, std::size_t r_star) const { return values[r * p + r_star]; }
    double& at(std::size_t r, std::size_t r_star) { return values[r * p + r_star]; }
};

/// Fréchet-Hoeffding bounds on E[Y{a, M(a*)}] from the marginals of M(a*)
/// and of each Y(a, m). y = 0 terms contribute nothing; the y > 0 and y < 0
/// parts use opposite Fréchet extremes.
IntervalEstimate frechet_interval_gamma0(std::span<const double> p_m_star,
                                         const std::vector<std::vector<double>>& p_y_by_m,
                                         std::span<const double> y_values,
                                         AssumptionSet set = {});

/// Assumption-free bounds under the single-world graph, with pr{M(a*)} =
/// pr(M | a*) and pr{Y(a, m)} given by y_pmf_g_formula.
IntervalEstimate pde_bounds_swig(const MediationLaw& law, bool account_for_r);

/// sum_m E(Y | m, a) pr(M = m | a*), R ignored.
IntervalEstimate pde_point_mediation_formula(const MediationLaw& law);

/// Entries E{E(Y | M, R=r, a) | R=r*, a*}. Entries whose conditioning cells
/// carry zero probability under either arm are NaN; any other undefined cell
/// raises UndefinedConditional.
NestedMeans nested_mean_matrix(const MediationLaw& law);

/// f_j weights multiplied across the binary components of R, indexed [r][r*].
NestedMeans monotonicity_weights(const MediationLaw& law, double tolerance = 1e-9);

/// A-R monotonicity functional for R made of independent binary components.
IntervalEstimate pde_point_monotonicity(const MediationLaw& law, double tolerance = 1e-9);

/// Point formula under no additive M-R mean interaction, at reference levels.
IntervalEstimate pde_point_no_interaction(const MediationLaw& law, std::size_t m_ref = 0,
                                          std::size_t r_ref = 0);

/// The same formula evaluated at every (m*, r*) reference pair, indexed
/// [m* * r_levels + r*]. Values agree only when the assumption holds.
std::vector<double> no_interaction_all_references(const MediationLaw& law);

/// R(a) independent of R(a*).
IntervalEstimate pde_point_independent_r(const MediationLaw& law);

struct DeterministicRResult {
    IntervalEstimate estimate;
    /// Whether pushing pr(R | a*) through the map reproduces pr(R | a).
    bool marginal_compatible = false;
};

/// R(a) = g{R(a*)} for the given map.
DeterministicRResult pde_point_deterministic_r(const MediationLaw& law,
                                               const std::vector<std::size_t>& map,
                                               double tolerance = 1e-9);

struct EffectDecomposition {
    double mean_comparison = 0.0;  // E{Y(a)} = E(Y | a)
    double mean_baseline = 0.0;    // E{Y(a*)} = E(Y | a*)
    double total = 0.0;
    IntervalEstimate gamma0;
    IntervalEstimate pde;
    IntervalEstimate nie;
};

/// Total effect, pure direct effect and natural indirect effect implied by a
/// gamma0 result. nie = [E{Y(a)} - gamma0.upper, E{Y(a)} - gamma0.lower].
EffectDecomposition effect_decomposition(const MediationLaw& law, const IntervalEstimate& gamma0);
EffectDecomposition effect_decomposition(double mean_comparison, double mean_baseline,
                                         const IntervalEstimate& gamma0);

/// Largest |E(Y|m,r,a) - E(Y|m*,r,a) - E(Y|m,r*,a) + E(Y|m*,r*,a)| over all
/// quadruples whose cells are observed at the comparison exposure.
double interaction_contrasts(const MediationLaw& law);

}  // namespace medbounds

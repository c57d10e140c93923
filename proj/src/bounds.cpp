#include "medbounds/bounds.hpp"

#include "medbounds/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace medbounds {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPointTolerance = 1e-12;

using Kind = AssumptionSet::Kind;

constexpr std::array<std::pair<Kind, std::string_view>, 9> kNames{{
    {Kind::SwigIgnoreR, "swig-ignore-r"},
    {Kind::SwigWithR, "swig-with-r"},
    {Kind::NpsemIeIgnoreR, "npsem-ie-ignore-r"},
    {Kind::NpsemIeLp, "npsem-ie-lp"},
    {Kind::NpsemIeBinaryR, "npsem-ie-binary-r"},
    {Kind::Monotonicity, "monotonicity"},
    {Kind::NoMRInteraction, "no-mr-interaction"},
    {Kind::IndependentCrossWorldR, "independent-cross-world-r"},
    {Kind::DeterministicCrossWorldR, "deterministic-cross-world-r"},
}};

AssumptionSet label(Kind kind) {
    AssumptionSet set;
    set.kind = kind;
    return set;
}

void check_pmf(std::span<const double> pmf, const char* what) {
    double total = 0.0;
    for (double v : pmf) {
        require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
                std::string(what) + " has a negative or non-finite entry");
        total += v;
    }
    require(std::abs(total - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
            std::string(what) + " does not sum to 1");
}

// sum_{r,r*} x[r][r*] w[r][r*], skipping zero weights. A NaN entry of x under
// a positive weight means the functional needs an unidentified cell.
double weighted_nested_sum(const NestedMeans& x, const NestedMeans& w) {
    double total = 0.0;
    for (std::size_t r = 0; r < x.p; ++r) {
        for (std::size_t rs = 0; rs < x.p; ++rs) {
            const double weight = w.at(r, rs);
            if (weight == 0.0) continue;
            const double value = x.at(r, rs);
            require(!std::isnan(value), ErrorCode::UndefinedConditional,
                    "nested mean at R(a)=" + std::to_string(r) + ", R(a*)=" + std::to_string(rs) +
                        " is needed but its conditioning cells have zero weight");
            total += value * weight;
        }
    }
    return total;
}

int component_bit(const std::vector<std::size_t>& sizes, std::size_t r, std::size_t j) {
    return static_cast<int>(decompose_index(sizes, r)[j]);
}

}  // namespace

AssumptionSet AssumptionSet::deterministic(std::vector<std::size_t> map) {
    AssumptionSet set;
    set.kind = Kind::DeterministicCrossWorldR;
    set.map = std::move(map);
    return set;
}

std::string to_string(const AssumptionSet& set) {
    for (const auto& [kind, name] : kNames) {
        if (kind == set.kind) return std::string(name);
    }
    return "unknown";
}

AssumptionSet parse_assumption_set(std::string_view name) {
    for (const auto& [kind, known] : kNames) {
        if (known == name) return label(kind);
    }
    fail(ErrorCode::Config, "unknown assumption set '" + std::string(name) + "'");
}

std::vector<AssumptionSet::Kind> all_assumption_kinds() {
    std::vector<Kind> kinds;
    for (const auto& entry : kNames) kinds.push_back(entry.first);
    return kinds;
}

bool is_point_regime(AssumptionSet::Kind kind) {
    switch (kind) {
        case Kind::NpsemIeIgnoreR:
        case Kind::Monotonicity:
        case Kind::NoMRInteraction:
        case Kind::IndependentCrossWorldR:
        case Kind::DeterministicCrossWorldR:
            return true;
        default:
            return false;
    }
}

IntervalEstimate IntervalEstimate::point(double value, AssumptionSet set) {
    return IntervalEstimate{value, value, true, std::move(set)};
}

IntervalEstimate IntervalEstimate::interval(double lower, double upper, AssumptionSet set) {
    require(lower <= upper + kPointTolerance, ErrorCode::Internal,
            "interval endpoints out of order");
    const bool point = std::abs(upper - lower) <= kPointTolerance;
    return IntervalEstimate{lower, upper, point, std::move(set)};
}

IntervalEstimate frechet_interval_gamma0(std::span<const double> p_m_star,
                                         const std::vector<std::vector<double>>& p_y_by_m,
                                         std::span<const double> y_values, AssumptionSet set) {
    require(p_y_by_m.size() == p_m_star.size(), ErrorCode::MismatchedSupport,
            "need one outcome pmf per mediator level");
    for (const auto& row : p_y_by_m) {
        require(row.size() == y_values.size(), ErrorCode::MismatchedSupport,
                "outcome pmf does not match the outcome support");
    }
    check_pmf(p_m_star, "pr{M(a*)}");
    for (const auto& row : p_y_by_m) check_pmf(row, "pr{Y(a, m)}");

    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t m = 0; m < p_m_star.size(); ++m) {
        const double pm = p_m_star[m];
        for (std::size_t k = 0; k < y_values.size(); ++k) {
            const double y = y_values[k];
            const double py = p_y_by_m[m][k];
            const double joint_low = std::max(0.0, pm + py - 1.0);
            const double joint_high = std::min(pm, py);
            if (y > 0.0) {
                lower += y * joint_low;
                upper += y * joint_high;
            } else if (y < 0.0) {
                lower += y * joint_high;
                upper += y * joint_low;
            }
        }
    }
    return IntervalEstimate::interval(lower, upper, std::move(set));
}

IntervalEstimate pde_bounds_swig(const MediationLaw& law, bool account_for_r) {
    const std::vector<double> p_m_star = law.m_marginal(kBaseline);
    std::vector<std::vector<double>> p_y(law.m_levels());
    for (std::size_t m = 0; m < law.m_levels(); ++m) {
        if (p_m_star[m] > 0.0) {
            p_y[m] = y_pmf_g_formula(law, m, account_for_r);
        } else {
            // Contributes nothing when pr{M(a*) = m} = 0; any pmf will do.
            p_y[m].assign(law.y_levels(), 0.0);
            p_y[m][0] = 1.0;
        }
    }
    return frechet_interval_gamma0(p_m_star, p_y, law.y_values(),
                                   label(account_for_r ? Kind::SwigWithR : Kind::SwigIgnoreR));
}

IntervalEstimate pde_point_mediation_formula(const MediationLaw& law) {
    const std::vector<double> p_m_star = law.m_marginal(kBaseline);
    double gamma0 = 0.0;
    for (std::size_t m = 0; m < law.m_levels(); ++m) {
        if (p_m_star[m] == 0.0) continue;
        const std::vector<double> p_y = law.y_given_m(kComparison, m);
        double mean = 0.0;
        for (std::size_t k = 0; k < p_y.size(); ++k) mean += law.y_values()[k] * p_y[k];
        gamma0 += mean * p_m_star[m];
    }
    return IntervalEstimate::point(gamma0, label(Kind::NpsemIeIgnoreR));
}

NestedMeans nested_mean_matrix(const MediationLaw& law) {
    const std::size_t p = law.r_levels();
    const std::size_t nm = law.m_levels();
    NestedMeans x{p, std::vector<double>(p * p, 0.0)};
    const auto& m_table = law.m_table();
    for (std::size_t r = 0; r < p; ++r) {
        const double p_r = law.r_prob(kComparison, r);
        for (std::size_t rs = 0; rs < p; ++rs) {
            const double p_rs = law.r_prob(kBaseline, rs);
            const bool needed = p_r > 0.0 && p_rs > 0.0;
            if (!law.m_row_defined(kBaseline, rs)) {
                if (needed) law.m_prob(kBaseline, rs, 0);  // throws
                x.at(r, rs) = kNaN;
                continue;
            }
            double value = 0.0;
            for (std::size_t m = 0; m < nm; ++m) {
                const double w = m_table[(kBaseline * p + rs) * nm + m];
                if (w == 0.0) continue;
                if (!law.y_row_defined(kComparison, r, m) && !needed) {
                    value = kNaN;
                    break;
                }
                value += law.mean_y(kComparison, r, m) * w;
            }
            x.at(r, rs) = value;
        }
    }
    return x;
}

NestedMeans monotonicity_weights(const MediationLaw& law, double tolerance) {
    const auto& sizes = law.r_components();
    require(!sizes.empty() && std::all_of(sizes.begin(), sizes.end(),
                                           [](std::size_t k) { return k == 2; }),
            ErrorCode::InvalidArgument,
            "monotonicity requires R to be a product of binary components");
    const std::size_t p = law.r_levels();
    const std::size_t k = sizes.size();

    // pr(R_j = 1 | A) for each component.
    std::vector<double> p_comp_a(k, 0.0), p_comp_astar(k, 0.0);
    for (std::size_t r = 0; r < p; ++r) {
        const double pa = law.r_prob(kComparison, r);
        const double pas = law.r_prob(kBaseline, r);
        for (std::size_t j = 0; j < k; ++j) {
            if (component_bit(sizes, r, j) == 1) {
                p_comp_a[j] += pa;
                p_comp_astar[j] += pas;
            }
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        require(p_comp_a[j] >= p_comp_astar[j] - tolerance, ErrorCode::MonotonicityViolated,
                "pr(R_" + std::to_string(j) + "=1 | a) < pr(R_" + std::to_string(j) +
                    "=1 | a*): A-R monotonicity is incompatible with the data");
    }

    NestedMeans w{p, std::vector<double>(p * p, 1.0)};
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t rs = 0; rs < p; ++rs) {
            double weight = 1.0;
            for (std::size_t j = 0; j < k; ++j) {
                const int rj = component_bit(sizes, r, j);
                const int rsj = component_bit(sizes, rs, j);
                if (rj == 1 && rsj == 1) {
                    weight *= p_comp_astar[j];
                } else if (rj == 1 && rsj == 0) {
                    weight *= p_comp_a[j] - p_comp_astar[j];
                } else if (rj == 0 && rsj == 1) {
                    weight = 0.0;
                } else {
                    weight *= 1.0 - p_comp_a[j];
                }
            }
            w.at(r, rs) = weight;
        }
    }
    return w;
}

IntervalEstimate pde_point_monotonicity(const MediationLaw& law, double tolerance) {
    const NestedMeans w = monotonicity_weights(law, tolerance);
    const NestedMeans x = nested_mean_matrix(law);
    return IntervalEstimate::point(weighted_nested_sum(x, w), label(Kind::Monotonicity));
}

IntervalEstimate pde_point_no_interaction(const MediationLaw& law, std::size_t m_ref,
                                          std::size_t r_ref) {
    require(m_ref < law.m_levels() && r_ref < law.r_levels(), ErrorCode::InvalidArgument,
            "reference level out of range");
    const std::vector<double> p_m_star = law.m_marginal(kBaseline);
    const double anchor = law.mean_y(kComparison, r_ref, m_ref);
    double gamma0 = anchor;
    for (std::size_t m = 0; m < law.m_levels(); ++m) {
        if (p_m_star[m] == 0.0) continue;
        gamma0 += (law.mean_y(kComparison, r_ref, m) - anchor) * p_m_star[m];
    }
    for (std::size_t r = 0; r < law.r_levels(); ++r) {
        const double p_r = law.r_prob(kComparison, r);
        if (p_r == 0.0) continue;
        gamma0 += (law.mean_y(kComparison, r, m_ref) - anchor) * p_r;
    }
    return IntervalEstimate::point(gamma0, label(Kind::NoMRInteraction));
}

std::vector<double> no_interaction_all_references(const MediationLaw& law) {
    std::vector<double> out;
    out.reserve(law.m_levels() * law.r_levels());
    for (std::size_t m = 0; m < law.m_levels(); ++m) {
        for (std::size_t r = 0; r < law.r_levels(); ++r) {
            try {
                out.push_back(pde_point_no_interaction(law, m, r).lower);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::UndefinedConditional) throw;
                out.push_back(kNaN);
            }
        }
    }
    return out;
}

IntervalEstimate pde_point_independent_r(const MediationLaw& law) {
    const std::size_t p = law.r_levels();
    const NestedMeans x = nested_mean_matrix(law);
    NestedMeans w{p, std::vector<double>(p * p, 0.0)};
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t rs = 0; rs < p; ++rs) {
            w.at(r, rs) = law.r_prob(kComparison, r) * law.r_prob(kBaseline, rs);
        }
    }
    return IntervalEstimate::point(weighted_nested_sum(x, w), label(Kind::IndependentCrossWorldR));
}

DeterministicRResult pde_point_deterministic_r(const MediationLaw& law,
                                               const std::vector<std::size_t>& map,
                                               double tolerance) {
    const std::size_t p = law.r_levels();
    require(map.size() == p, ErrorCode::InvalidArgument,
            "deterministic map must assign an R(a) level to every R(a*) level");
    for (std::size_t v : map) {
        require(v < p, ErrorCode::InvalidArgument, "deterministic map value out of range");
    }
    const NestedMeans x = nested_mean_matrix(law);
    NestedMeans w{p, std::vector<double>(p * p, 0.0)};
    std::vector<double> pushed(p, 0.0);
    for (std::size_t rs = 0; rs < p; ++rs) {
        const double p_rs = law.r_prob(kBaseline, rs);
        w.at(map[rs], rs) = p_rs;
        pushed[map[rs]] += p_rs;
    }
    bool compatible = true;
    for (std::size_t r = 0; r < p; ++r) {
        if (std::abs(pushed[r] - law.r_prob(kComparison, r)) > tolerance) compatible = false;
    }
    // An incompatible map can put weight on cells never observed under A=a;
    // those surface as UndefinedConditional.
    const double gamma0 = weighted_nested_sum(x, w);
    return {IntervalEstimate::point(gamma0, AssumptionSet::deterministic(map)), compatible};
}

EffectDecomposition effect_decomposition(double mean_comparison, double mean_baseline,
                                         const IntervalEstimate& gamma0) {
    EffectDecomposition out;
    out.mean_comparison = mean_comparison;
    out.mean_baseline = mean_baseline;
    out.total = mean_comparison - mean_baseline;
    out.gamma0 = gamma0;
    out.pde = gamma0;
    out.pde.lower = gamma0.lower - mean_baseline;
    out.pde.upper = gamma0.upper - mean_baseline;
    out.nie = gamma0;
    out.nie.lower = mean_comparison - gamma0.upper;
    out.nie.upper = mean_comparison - gamma0.lower;
    return out;
}

EffectDecomposition effect_decomposition(const MediationLaw& law, const IntervalEstimate& gamma0) {
    return effect_decomposition(law.mean_y_arm(kComparison), law.mean_y_arm(kBaseline), gamma0);
}

double interaction_contrasts(const MediationLaw& law) {
    const std::size_t p = law.r_levels();
    const std::size_t nm = law.m_levels();
    std::vector<double> mean(p * nm, kNaN);
    for (std::size_t r = 0; r < p; ++r) {
        if (law.r_prob(kComparison, r) == 0.0 || !law.m_row_defined(kComparison, r)) continue;
        for (std::size_t m = 0; m < nm; ++m) {
            if (law.m_prob(kComparison, r, m) == 0.0 || !law.y_row_defined(kComparison, r, m)) {
                continue;
            }
            mean[r * nm + m] = law.mean_y(kComparison, r, m);
        }
    }
    // For fixed (r, r*) the contrast is d(m) - d(m*) with d(m) = mean(r,m) - mean(r*,m),
    // so its largest magnitude is the range of d over observed m.
    double best = 0.0;
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t rs = r + 1; rs < p; ++rs) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (std::size_t m = 0; m < nm; ++m) {
                const double d = mean[r * nm + m] - mean[rs * nm + m];
                if (std::isnan(d)) continue;
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
            if (hi >= lo) best = std::max(best, hi - lo);
        }
    }
    return best;
}

}  // namespace medbounds

#pragma once

#include "medbounds/categorical.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace medbounds {

/// What to do with a conditional pmf whose conditioning event has zero weight.
enum class ZeroCellPolicy {
    Error,            // leave the row undefined; any computation that needs it throws
    UniformFallback,  // fill with a uniform pmf and treat it as defined
};

/// Dimensions shared by every table of a MediationLaw.
struct LawShape {
    std::vector<double> y_values{0.0, 1.0};
    std::size_t m_levels = 2;
    /// Level counts of the components of R; empty means R is absent.
    std::vector<std::size_t> r_components;

    std::size_t r_levels() const;
    std::size_t y_levels() const { return y_values.size(); }
};

/// Identified conditional laws pr(R|A), pr(M|R,A) and pr(Y|M,R,A) over finite
/// supports. Exposure index 0 is the baseline a*, index 1 the comparison a.
///
/// Rows whose conditioning event carried no weight are stored as uniform pmfs
/// and flagged undefined (under ZeroCellPolicy::Error). Checked accessors throw
/// UndefinedConditional when such a row is read; the derived quantities skip
/// terms whose multiplying weight is exactly zero, so an undefined row only
/// matters when it actually enters a formula.
class MediationLaw {
public:
    /// Tables are flat and row-major: p_r[a][r], p_m[a][r][m], p_y[a][r][m][y].
    /// Empty definedness masks mean every row is defined.
    MediationLaw(LawShape shape, std::vector<double> p_r, std::vector<double> p_m,
                 std::vector<double> p_y, ZeroCellPolicy policy = ZeroCellPolicy::Error,
                 std::vector<char> r_defined = {}, std::vector<char> m_defined = {},
                 std::vector<char> y_defined = {});

    /// Conditionals as ratios of nonnegative joint weights w[a][r][m][y].
    static MediationLaw from_joint(LawShape shape, const std::vector<double>& joint,
                                   ZeroCellPolicy policy);

    const LawShape& shape() const noexcept { return shape_; }
    std::size_t r_levels() const noexcept { return n_r_; }
    std::size_t m_levels() const noexcept { return shape_.m_levels; }
    std::size_t y_levels() const noexcept { return shape_.y_values.size(); }
    const std::vector<double>& y_values() const noexcept { return shape_.y_values; }
    const std::vector<std::size_t>& r_components() const noexcept { return shape_.r_components; }
    bool has_r() const noexcept { return n_r_ > 1; }
    ZeroCellPolicy policy() const noexcept { return policy_; }

    bool r_row_defined(std::size_t a) const { return r_def_[a] != 0; }
    bool m_row_defined(std::size_t a, std::size_t r) const { return m_def_[a * n_r_ + r] != 0; }
    bool y_row_defined(std::size_t a, std::size_t r, std::size_t m) const {
        return y_def_[(a * n_r_ + r) * shape_.m_levels + m] != 0;
    }

    double r_prob(std::size_t a, std::size_t r) const;
    double m_prob(std::size_t a, std::size_t r, std::size_t m) const;
    double y_prob(std::size_t a, std::size_t r, std::size_t m, std::size_t y) const;
    /// E(Y | M=m, R=r, A=a).
    double mean_y(std::size_t a, std::size_t r, std::size_t m) const;

    std::vector<double> r_marginal(std::size_t a) const;
    /// pr(M=m | A=a) = sum_r pr(M=m|r,a) pr(R=r|a).
    std::vector<double> m_marginal(std::size_t a) const;
    /// pr(Y=y | M=m, A=a) with R marginalized out within the arm.
    std::vector<double> y_given_m(std::size_t a, std::size_t m) const;
    /// sum_r pr(Y=y | m, r, a) pr(R=r | a).
    std::vector<double> y_g_formula(std::size_t a, std::size_t m) const;
    /// E(Y | A=a).
    double mean_y_arm(std::size_t a) const;

    const std::vector<double>& r_table() const noexcept { return p_r_; }
    const std::vector<double>& m_table() const noexcept { return p_m_; }
    const std::vector<double>& y_table() const noexcept { return p_y_; }
    const std::vector<char>& r_defined_mask() const noexcept { return r_def_; }
    const std::vector<char>& m_defined_mask() const noexcept { return m_def_; }
    const std::vector<char>& y_defined_mask() const noexcept { return y_def_; }

    bool operator==(const MediationLaw&) const = default;

private:
    std::size_t m_index(std::size_t a, std::size_t r, std::size_t m) const {
        return (a * n_r_ + r) * shape_.m_levels + m;
    }

    LawShape shape_;
    std::size_t n_r_ = 1;
    ZeroCellPolicy policy_ = ZeroCellPolicy::Error;
    std::vector<double> p_r_;
    std::vector<double> p_m_;
    std::vector<double> p_y_;
    std::vector<char> r_def_;
    std::vector<char> m_def_;
    std::vector<char> y_def_;
};

bool operator==(const LawShape& lhs, const LawShape& rhs);

LawShape law_shape(const DatasetCodecs& codecs);

/// Weighted maximum-likelihood fit: each conditional cell is a ratio of
/// weighted counts. With a stratum, only records in that covariate pattern count.
MediationLaw fit_laws(const Dataset& data, std::optional<std::size_t> stratum = std::nullopt,
                      ZeroCellPolicy policy = ZeroCellPolicy::Error);

/// pr{Y(a, m) = y} at the comparison exposure. Without R accounting this is the
/// observed pr(Y=y | m, a); with it, the g-formula mixture over pr(R | a).
std::vector<double> y_pmf_g_formula(const MediationLaw& law, std::size_t m, bool account_for_r);

}  // namespace medbounds

#include "medbounds/mediation_law.hpp"

#include "medbounds/errors.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace medbounds {

namespace {

constexpr double kPmfTolerance = 1e-9;

std::string cell_name(std::size_t a, std::size_t r) {
    return "A=" + std::to_string(a) + ", R=" + std::to_string(r);
}

std::string cell_name(std::size_t a, std::size_t r, std::size_t m) {
    return cell_name(a, r) + ", M=" + std::to_string(m);
}

void check_pmf_rows(const std::vector<double>& table, std::size_t width, const char* what) {
    for (std::size_t row = 0; row * width < table.size(); ++row) {
        double total = 0.0;
        for (std::size_t k = 0; k < width; ++k) {
            double v = table[row * width + k];
            require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
                    std::string(what) + " has a negative or non-finite entry");
            total += v;
        }
        require(std::abs(total - 1.0) <= kPmfTolerance, ErrorCode::InvalidArgument,
                std::string(what) + " row " + std::to_string(row) + " does not sum to 1");
    }
}

std::vector<char> mask_or_all(std::vector<char> mask, std::size_t n, const char* what) {
    if (mask.empty()) return std::vector<char>(n, 1);
    require(mask.size() == n, ErrorCode::InvalidArgument,
            std::string(what) + " definedness mask has the wrong size");
    return mask;
}

// Fills row [begin, begin+width) with ratios of counts, or a uniform pmf when
// the conditioning weight is zero. Returns whether the row is defined.
char ratio_row(const std::vector<double>& counts, double denom, std::size_t width,
               ZeroCellPolicy policy, double* out) {
    if (denom > 0.0) {
        for (std::size_t k = 0; k < width; ++k) out[k] = counts[k] / denom;
        return 1;
    }
    for (std::size_t k = 0; k < width; ++k) out[k] = 1.0 / static_cast<double>(width);
    return policy == ZeroCellPolicy::UniformFallback ? 1 : 0;
}

std::vector<double> uniform(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

}  // namespace

std::size_t LawShape::r_levels() const {
    std::size_t n = 1;
    for (auto k : r_components) n *= k;
    return n;
}

bool operator==(const LawShape& lhs, const LawShape& rhs) {
    return lhs.y_values == rhs.y_values && lhs.m_levels == rhs.m_levels &&
           lhs.r_components == rhs.r_components;
}

MediationLaw::MediationLaw(LawShape shape, std::vector<double> p_r, std::vector<double> p_m,
                           std::vector<double> p_y, ZeroCellPolicy policy,
                           std::vector<char> r_defined, std::vector<char> m_defined,
                           std::vector<char> y_defined)
    : shape_(std::move(shape)),
      policy_(policy),
      p_r_(std::move(p_r)),
      p_m_(std::move(p_m)),
      p_y_(std::move(p_y)) {
    require(shape_.m_levels >= 1 && !shape_.y_values.empty(), ErrorCode::InvalidArgument,
            "mediator and outcome need at least one level");
    for (auto k : shape_.r_components) {
        require(k >= 1, ErrorCode::InvalidArgument, "R component with no levels");
    }
    for (double y : shape_.y_values) {
        require(std::isfinite(y), ErrorCode::InvalidArgument, "non-finite Y support value");
    }
    n_r_ = shape_.r_levels();
    const std::size_t nm = shape_.m_levels;
    const std::size_t ny = shape_.y_values.size();
    require(p_r_.size() == 2 * n_r_, ErrorCode::InvalidArgument, "pr(R|A) table has wrong size");
    require(p_m_.size() == 2 * n_r_ * nm, ErrorCode::InvalidArgument,
            "pr(M|R,A) table has wrong size");
    require(p_y_.size() == 2 * n_r_ * nm * ny, ErrorCode::InvalidArgument,
            "pr(Y|M,R,A) table has wrong size");
    check_pmf_rows(p_r_, n_r_, "pr(R|A)");
    check_pmf_rows(p_m_, nm, "pr(M|R,A)");
    check_pmf_rows(p_y_, ny, "pr(Y|M,R,A)");
    r_def_ = mask_or_all(std::move(r_defined), 2, "pr(R|A)");
    m_def_ = mask_or_all(std::move(m_defined), 2 * n_r_, "pr(M|R,A)");
    y_def_ = mask_or_all(std::move(y_defined), 2 * n_r_ * nm, "pr(Y|M,R,A)");
}

MediationLaw MediationLaw::from_joint(LawShape shape, const std::vector<double>& joint,
                                      ZeroCellPolicy policy) {
    const std::size_t nr = shape.r_levels();
    const std::size_t nm = shape.m_levels;
    const std::size_t ny = shape.y_values.size();
    require(joint.size() == 2 * nr * nm * ny, ErrorCode::InvalidArgument,
            "joint weight table has wrong size");

    std::vector<double> p_r(2 * nr), p_m(2 * nr * nm), p_y(2 * nr * nm * ny);
    std::vector<char> r_def(2), m_def(2 * nr), y_def(2 * nr * nm);
    std::vector<double> w_r(nr), w_m(nm), w_y(ny);

    for (std::size_t a = 0; a < 2; ++a) {
        double w_a = 0.0;
        for (std::size_t r = 0; r < nr; ++r) {
            double w_ar = 0.0;
            for (std::size_t m = 0; m < nm; ++m) {
                double w_arm = 0.0;
                for (std::size_t y = 0; y < ny; ++y) {
                    double w = joint[((a * nr + r) * nm + m) * ny + y];
                    require(std::isfinite(w) && w >= 0.0, ErrorCode::InvalidArgument,
                            "joint weights must be nonnegative");
                    w_y[y] = w;
                    w_arm += w;
                }
                std::size_t row = (a * nr + r) * nm + m;
                y_def[row] = ratio_row(w_y, w_arm, ny, policy, &p_y[row * ny]);
                w_m[m] = w_arm;
                w_ar += w_arm;
            }
            m_def[a * nr + r] = ratio_row(w_m, w_ar, nm, policy, &p_m[(a * nr + r) * nm]);
            w_r[r] = w_ar;
            w_a += w_ar;
        }
        r_def[a] = ratio_row(w_r, w_a, nr, policy, &p_r[a * nr]);
    }
    return MediationLaw(std::move(shape), std::move(p_r), std::move(p_m), std::move(p_y), policy,
                        std::move(r_def), std::move(m_def), std::move(y_def));
}

double MediationLaw::r_prob(std::size_t a, std::size_t r) const {
    require(r_def_.at(a) != 0, ErrorCode::UndefinedConditional,
            "pr(R | A=" + std::to_string(a) + ") is undefined: exposure arm has zero weight");
    return p_r_.at(a * n_r_ + r);
}

double MediationLaw::m_prob(std::size_t a, std::size_t r, std::size_t m) const {
    require(m_def_.at(a * n_r_ + r) != 0, ErrorCode::UndefinedConditional,
            "pr(M | " + cell_name(a, r) + ") is undefined: conditioning cell has zero weight");
    return p_m_.at(m_index(a, r, m));
}

double MediationLaw::y_prob(std::size_t a, std::size_t r, std::size_t m, std::size_t y) const {
    require(y_def_.at(m_index(a, r, m)) != 0, ErrorCode::UndefinedConditional,
            "pr(Y | " + cell_name(a, r, m) + ") is undefined: conditioning cell has zero weight");
    return p_y_.at(m_index(a, r, m) * y_levels() + y);
}

double MediationLaw::mean_y(std::size_t a, std::size_t r, std::size_t m) const {
    require(y_def_.at(m_index(a, r, m)) != 0, ErrorCode::UndefinedConditional,
            "E(Y | " + cell_name(a, r, m) + ") is undefined: conditioning cell has zero weight");
    const std::size_t ny = y_levels();
    const double* row = &p_y_[m_index(a, r, m) * ny];
    double mean = 0.0;
    for (std::size_t y = 0; y < ny; ++y) mean += shape_.y_values[y] * row[y];
    return mean;
}

std::vector<double> MediationLaw::r_marginal(std::size_t a) const {
    std::vector<double> out(n_r_);
    for (std::size_t r = 0; r < n_r_; ++r) out[r] = r_prob(a, r);
    return out;
}

std::vector<double> MediationLaw::m_marginal(std::size_t a) const {
    std::vector<double> out(m_levels(), 0.0);
    for (std::size_t r = 0; r < n_r_; ++r) {
        const double w = r_prob(a, r);
        if (w == 0.0) continue;
        for (std::size_t m = 0; m < m_levels(); ++m) out[m] += w * m_prob(a, r, m);
    }
    return out;
}

std::vector<double> MediationLaw::y_given_m(std::size_t a, std::size_t m) const {
    const std::size_t ny = y_levels();
    if (!has_r()) {
        std::vector<double> out(ny);
        for (std::size_t y = 0; y < ny; ++y) out[y] = y_prob(a, 0, m, y);
        return out;
    }
    std::vector<double> out(ny, 0.0);
    double denom = 0.0;
    for (std::size_t r = 0; r < n_r_; ++r) {
        const double w_r = r_prob(a, r);
        if (w_r == 0.0) continue;
        const double w = w_r * m_prob(a, r, m);
        if (w == 0.0) continue;
        denom += w;
        for (std::size_t y = 0; y < ny; ++y) out[y] += w * y_prob(a, r, m, y);
    }
    if (denom > 0.0) {
        for (double& v : out) v /= denom;
        return out;
    }
    require(policy_ == ZeroCellPolicy::UniformFallback, ErrorCode::UndefinedConditional,
            "pr(Y | M=" + std::to_string(m) + ", A=" + std::to_string(a) +
                ") is undefined: conditioning cell has zero weight");
    return uniform(ny);
}

std::vector<double> MediationLaw::y_g_formula(std::size_t a, std::size_t m) const {
    const std::size_t ny = y_levels();
    std::vector<double> out(ny, 0.0);
    for (std::size_t r = 0; r < n_r_; ++r) {
        const double w = r_prob(a, r);
        if (w == 0.0) continue;
        for (std::size_t y = 0; y < ny; ++y) out[y] += w * y_prob(a, r, m, y);
    }
    return out;
}

double MediationLaw::mean_y_arm(std::size_t a) const {
    double total = 0.0;
    for (std::size_t r = 0; r < n_r_; ++r) {
        const double w_r = r_prob(a, r);
        if (w_r == 0.0) continue;
        for (std::size_t m = 0; m < m_levels(); ++m) {
            const double w = w_r * m_prob(a, r, m);
            if (w == 0.0) continue;
            total += w * mean_y(a, r, m);
        }
    }
    return total;
}

LawShape law_shape(const DatasetCodecs& codecs) {
    LawShape shape;
    shape.y_values = codecs.outcome.values();
    shape.m_levels = codecs.mediator.size();
    shape.r_components = codecs.confounders.component_sizes();
    return shape;
}

MediationLaw fit_laws(const Dataset& data, std::optional<std::size_t> stratum,
                      ZeroCellPolicy policy) {
    LawShape shape = law_shape(data.codecs());
    const std::size_t nr = shape.r_levels();
    const std::size_t nm = shape.m_levels;
    const std::size_t ny = shape.y_values.size();
    if (stratum) {
        require(*stratum < data.codecs().covariates.size(), ErrorCode::InvalidArgument,
                "covariate pattern out of range");
    }

    std::vector<double> joint(2 * nr * nm * ny, 0.0);
    double total = 0.0;
    const auto& records = data.records();
    const auto& weights = data.weights();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const Record& rec = records[i];
        if (stratum && rec.c != *stratum) continue;
        joint[((rec.a * nr + rec.r) * nm + rec.m) * ny + rec.y] += weights[i];
        total += weights[i];
    }
    if (stratum) {
        require(total > 0.0, ErrorCode::EmptyStratum,
                "covariate pattern " + std::to_string(*stratum) + " has zero weight");
    }
    return MediationLaw::from_joint(std::move(shape), joint, policy);
}

std::vector<double> y_pmf_g_formula(const MediationLaw& law, std::size_t m, bool account_for_r) {
    require(m < law.m_levels(), ErrorCode::InvalidArgument, "mediator level out of range");
    return account_for_r ? law.y_g_formula(kComparison, m) : law.y_given_m(kComparison, m);
}

}  // namespace medbounds

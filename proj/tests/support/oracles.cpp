#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

using namespace medbounds;

namespace medtest {

namespace {

std::size_t y_offset(const MediationLaw& law, std::size_t a, std::size_t r, std::size_t m) {
    return ((a * law.r_levels() + r) * law.m_levels() + m) * law.y_levels();
}

double raw_m(const MediationLaw& law, std::size_t a, std::size_t r, std::size_t m) {
    return law.m_table()[(a * law.r_levels() + r) * law.m_levels() + m];
}

double raw_r(const MediationLaw& law, std::size_t a, std::size_t r) {
    return law.r_table()[a * law.r_levels() + r];
}

}  // namespace

double raw_mean(const MediationLaw& law, std::size_t a, std::size_t r, std::size_t m) {
    double s = 0.0;
    const std::size_t off = y_offset(law, a, r, m);
    for (std::size_t y = 0; y < law.y_levels(); ++y) s += law.y_values()[y] * law.y_table()[off + y];
    return s;
}

Pair binary_m_bounds_no_r(const MediationLaw& law) {
    if (law.m_levels() != 2 || law.r_levels() != 1) throw std::invalid_argument("shape");
    double lo = 0.0, hi = 0.0;
    for (std::size_t m = 0; m < 2; ++m) {
        const double pm = raw_m(law, 0, 0, m);
        const double ey = raw_mean(law, 1, 0, m);
        lo += std::max(0.0, pm + ey - 1.0);
        hi += std::min(pm, ey);
    }
    return {lo, hi};
}

Pair binary_m_bounds_with_r(const MediationLaw& law) {
    if (law.m_levels() != 2) throw std::invalid_argument("shape");
    double lo = 0.0, hi = 0.0;
    for (std::size_t m = 0; m < 2; ++m) {
        double pm = 0.0;
        for (std::size_t r = 0; r < law.r_levels(); ++r) pm += raw_m(law, 0, r, m) * raw_r(law, 0, r);
        double ey = 0.0;
        for (std::size_t r = 0; r < law.r_levels(); ++r) ey += raw_mean(law, 1, r, m) * raw_r(law, 1, r);
        lo += std::max(0.0, pm + ey - 1.0);
        hi += std::min(pm, ey);
    }
    return {lo, hi};
}

Pair coupling_grid_search(const std::vector<double>& p_m_star,
                          const std::vector<std::vector<double>>& p_y_by_m,
                          const std::vector<double>& y_values, std::size_t n) {
    if (y_values.size() != 2) throw std::invalid_argument("binary outcome only");
    // For each m the pair {I(M(a*)=m), Y(a,m)} has one free cell t = pr(I=1, Y=y1);
    // the objective separates over m, so each m is searched on its own.
    double lo = 0.0, hi = 0.0;
    for (std::size_t m = 0; m < p_m_star.size(); ++m) {
        const double pm = p_m_star[m];
        const double q = p_y_by_m[m][1];
        double best_lo = std::numeric_limits<double>::infinity();
        double best_hi = -best_lo;
        for (std::size_t k = 0; k <= n; ++k) {
            const double t = static_cast<double>(k) / static_cast<double>(n);
            // Remaining cells of the 2x2 table must be nonnegative.
            const double c10 = pm - t;          // I=1, Y=y0
            const double c01 = q - t;           // I=0, Y=y1
            const double c00 = 1.0 - pm - q + t;
            const double eps = 1e-12;
            if (t < -eps || c10 < -eps || c01 < -eps || c00 < -eps) continue;
            const double v = y_values[1] * t + y_values[0] * c10;
            best_lo = std::min(best_lo, v);
            best_hi = std::max(best_hi, v);
        }
        lo += best_lo;
        hi += best_hi;
    }
    return {lo, hi};
}

std::vector<double> nested_means_brute(const MediationLaw& law) {
    const std::size_t p = law.r_levels();
    std::vector<double> x(p * p, 0.0);
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t rs = 0; rs < p; ++rs) {
            double s = 0.0;
            for (std::size_t m = 0; m < law.m_levels(); ++m) {
                s += raw_mean(law, 1, r, m) * raw_m(law, 0, rs, m);
            }
            x[r * p + rs] = s;
        }
    }
    return x;
}

double interaction_scan(const MediationLaw& law) {
    const std::size_t p = law.r_levels(), nm = law.m_levels();
    double worst = 0.0;
    for (std::size_t m = 0; m < nm; ++m) {
        for (std::size_t ms = 0; ms < nm; ++ms) {
            for (std::size_t r = 0; r < p; ++r) {
                for (std::size_t rs = 0; rs < p; ++rs) {
                    if (!law.y_row_defined(1, r, m) || !law.y_row_defined(1, r, ms) ||
                        !law.y_row_defined(1, rs, m) || !law.y_row_defined(1, rs, ms)) {
                        continue;
                    }
                    const double c = raw_mean(law, 1, r, m) - raw_mean(law, 1, r, ms) -
                                     raw_mean(law, 1, rs, m) + raw_mean(law, 1, rs, ms);
                    worst = std::max(worst, std::abs(c));
                }
            }
        }
    }
    return worst;
}

double binary_r_value(double pa1, double pas1, double x11, double x10, double x01, double x00,
                      double pi11) {
    return x11 * pi11 + x10 * (pa1 - pi11) + x01 * (pas1 - pi11) + x00 * (1.0 - pa1 - pas1 + pi11);
}

double f_table(std::size_t r, std::size_t r_star, double pa1, double pas1) {
    if (r == 1 && r_star == 1) return pas1;
    if (r == 1 && r_star == 0) return pa1 - pas1;
    if (r == 0 && r_star == 1) return 0.0;
    return 1.0 - pa1;
}

}  // namespace medtest

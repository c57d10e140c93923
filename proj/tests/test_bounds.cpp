#include "medbounds/bounds.hpp"
#include "medbounds/cross_world_lp.hpp"
#include "oracles.hpp"
#include "random_laws.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace medbounds;
using namespace medtest;

namespace {

IntervalEstimate frechet(const std::vector<double>& pm, const std::vector<std::vector<double>>& py,
                         const std::vector<double>& y) {
    return frechet_interval_gamma0(pm, py, y);
}

// Joint pr{I(M(a*)=m) = i, Y(a,m) = y} from the quantile construction on a
// shared uniform; I = 1 on the top (comonotone) or bottom (countermonotone)
// interval of length pM(m).
double extreme_value(const std::vector<double>& pm, const std::vector<std::vector<double>>& py,
                     const std::vector<double>& y, bool comonotone) {
    std::vector<std::size_t> order(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return y[i] < y[j]; });
    double total = 0.0;
    for (std::size_t m = 0; m < pm.size(); ++m) {
        const double lo1 = comonotone ? 1.0 - pm[m] : 0.0;
        const double hi1 = comonotone ? 1.0 : pm[m];
        double lo = 0.0;
        for (std::size_t k : order) {
            const double hi = lo + py[m][k];
            total += y[k] * std::max(0.0, std::min(hi, hi1) - std::max(lo, lo1));
            lo = hi;
        }
    }
    return total;
}

}  // namespace

TEST_CASE("Frechet bounds on the worked binary and ternary instances") {
    const auto b1 = frechet({0.5, 0.5}, {{0.7, 0.3}, {0.3, 0.7}}, {0.0, 1.0});
    CHECK(std::abs(b1.lower - 0.2) <= 1e-12);
    CHECK(std::abs(b1.upper - 0.8) <= 1e-12);
    const auto b2 = frechet({0.2, 0.3, 0.5}, {{0.9, 0.1}, {0.5, 0.5}, {0.1, 0.9}}, {0.0, 1.0});
    CHECK(std::abs(b2.lower - 0.4) <= 1e-12);
    CHECK(std::abs(b2.upper - 0.9) <= 1e-12);

    // Independent check by searching couplings on a grid of step 1e-4.
    const auto g1 = coupling_grid_search({0.5, 0.5}, {{0.7, 0.3}, {0.3, 0.7}}, {0.0, 1.0}, 10000);
    CHECK(std::abs(g1.first - 0.2) <= 1e-9);
    CHECK(std::abs(g1.second - 0.8) <= 1e-9);
    const auto g2 = coupling_grid_search({0.2, 0.3, 0.5}, {{0.9, 0.1}, {0.5, 0.5}, {0.1, 0.9}},
                                         {0.0, 1.0}, 10000);
    CHECK(std::abs(g2.first - 0.4) <= 1e-9);
    CHECK(std::abs(g2.second - 0.9) <= 1e-9);
}

TEST_CASE("Frechet bounds agree with the coupling search on random binary-outcome laws") {
    Rng rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t nm = 2 + rep % 3;
        std::vector<double> pm(nm);
        std::vector<std::vector<double>> py(nm);
        // Probabilities on a 1/200 grid so the grid search hits the optimum exactly.
        std::vector<std::size_t> cuts;
        for (std::size_t m = 0; m + 1 < nm; ++m) cuts.push_back(rng.below(201));
        cuts.push_back(0);
        cuts.push_back(200);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t m = 0; m < nm; ++m) {
            pm[m] = static_cast<double>(cuts[m + 1] - cuts[m]) / 200.0;
            const double q = static_cast<double>(rng.below(201)) / 200.0;
            py[m] = {1.0 - q, q};
        }
        const std::vector<double> y{0.0, 1.0};
        const auto b = frechet(pm, py, y);
        const auto g = coupling_grid_search(pm, py, y, 200);
        CHECK(std::abs(b.lower - g.first) <= 1e-12);
        CHECK(std::abs(b.upper - g.second) <= 1e-12);
    }
}

TEST_CASE("Frechet bounds follow the sign split for negative outcome values") {
    // Y in {-1, 0}: the negative part uses min for the lower bound.
    const auto b = frechet({0.4, 0.6}, {{0.5, 0.5}, {0.2, 0.8}}, {-1.0, 0.0});
    // lower = -(min(.4,.5) + min(.6,.2)) = -0.6; upper = -(max(0,-.1) + max(0,-.2)) = 0
    CHECK(std::abs(b.lower + 0.6) <= 1e-12);
    CHECK(std::abs(b.upper - 0.0) <= 1e-12);
    const auto g = coupling_grid_search({0.4, 0.6}, {{0.5, 0.5}, {0.2, 0.8}}, {-1.0, 0.0}, 1000);
    CHECK(std::abs(b.lower - g.first) <= 1e-12);
    CHECK(std::abs(b.upper - g.second) <= 1e-12);
}

TEST_CASE("Frechet bounds collapse when M(a*) or every Y(a,m) is degenerate") {
    const std::vector<double> y{0.0, 1.0, 4.0};
    const auto b = frechet({0.0, 1.0, 0.0}, {{0.2, 0.3, 0.5}, {0.1, 0.6, 0.3}, {1.0, 0.0, 0.0}}, y);
    CHECK(b.point_identified);
    CHECK(std::abs(b.lower - (0.6 + 1.2)) <= 1e-12);
    const auto c = frechet({0.3, 0.7}, {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}, y);
    CHECK(c.point_identified);
    CHECK(std::abs(c.lower - (0.3 + 2.8)) <= 1e-12);
    CHECK_FALSE(frechet({0.3, 0.7}, {{0.5, 0.5, 0.0}, {0.0, 0.0, 1.0}}, y).point_identified);
}

TEST_CASE("Frechet bounds reject mismatched supports") {
    CHECK(code_of([] { (void)frechet({0.5, 0.5}, {{0.5, 0.5}}, {0.0, 1.0}); }) ==
          ErrorCode::MismatchedSupport);
    CHECK(code_of([] { (void)frechet({0.5, 0.5}, {{0.5, 0.5}, {1.0}}, {0.0, 1.0}); }) ==
          ErrorCode::MismatchedSupport);
}

TEST_CASE("comonotone and countermonotone indicator couplings attain the bounds") {
    Rng rng(41);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t nm = 2 + rep % 3;
        const std::vector<double> y{0.0, 1.0};
        std::vector<double> pm = rng.dirichlet(nm);
        std::vector<std::vector<double>> py;
        for (std::size_t m = 0; m < nm; ++m) py.push_back(rng.dirichlet(2));
        const auto b = frechet(pm, py, y);
        CHECK(std::abs(extreme_value(pm, py, y, true) - b.upper) <= 1e-10);
        CHECK(std::abs(extreme_value(pm, py, y, false) - b.lower) <= 1e-10);
    }
}

TEST_CASE("assumption-free bounds reproduce the binary-M displays") {
    Rng rng(2024);
    for (int rep = 0; rep < 1000; ++rep) {
        const MediationLaw law = random_law(rng, make_shape({0.0, 1.0}, 2));
        const auto b = pde_bounds_swig(law, false);
        const auto o = binary_m_bounds_no_r(law);
        CHECK(std::abs(b.lower - o.first) <= 1e-12);
        CHECK(std::abs(b.upper - o.second) <= 1e-12);

        const MediationLaw lr = random_law(rng, make_shape({0.0, 1.0}, 2, {static_cast<std::size_t>(1 + rep % 4)}));
        const auto br = pde_bounds_swig(lr, true);
        const auto orr = binary_m_bounds_with_r(lr);
        CHECK(std::abs(br.lower - orr.first) <= 1e-12);
        CHECK(std::abs(br.upper - orr.second) <= 1e-12);
    }
}

TEST_CASE("with a single R level both bound variants agree") {
    Rng rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        const MediationLaw law = random_law(rng, make_shape({0.0, 1.0, 2.0}, 3));
        const auto a = pde_bounds_swig(law, true);
        const auto b = pde_bounds_swig(law, false);
        CHECK(a.lower == b.lower);
        CHECK(a.upper == b.upper);
    }
}

TEST_CASE("mediation formula example and containment in the assumption-free bounds") {
    const MediationLaw law = law_without_r({0.0, 1.0}, {0.5, 0.5}, {0.5, 0.5}, {{0.7, 0.3}, {0.3, 0.7}});
    const auto p = pde_point_mediation_formula(law);
    CHECK(p.point_identified);
    CHECK(std::abs(p.lower - 0.5) <= 1e-15);

    Rng rng(77);
    for (int rep = 0; rep < 1000; ++rep) {
        const MediationLaw l = random_law(rng, make_shape({0.0, 1.0, 3.0}, 2 + rep % 3));
        const auto pt = pde_point_mediation_formula(l);
        CHECK(pde_bounds_swig(l, false).contains(pt.lower, 1e-12));
    }
    // Degenerate M(a*): the point equals the collapsed interval.
    const MediationLaw d = law_without_r({0.0, 1.0}, {0.0, 1.0}, {0.5, 0.5}, {{0.7, 0.3}, {0.2, 0.8}});
    CHECK(std::abs(pde_point_mediation_formula(d).lower - pde_bounds_swig(d, false).lower) <= 1e-15);
}

TEST_CASE("nested mean matrix matches a brute-force double sum") {
    Rng rng(19);
    for (int rep = 0; rep < 100; ++rep) {
        const MediationLaw law = random_law(rng, make_shape({0.0, 1.0, 5.0}, 3, {3}));
        const NestedMeans x = nested_mean_matrix(law);
        const auto want = nested_means_brute(law);
        REQUIRE(x.values.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(x.values[i] - want[i]) <= 1e-12);
    }
    // Constant outcome mean gives a constant matrix.
    const LawShape s = make_shape({2.0}, 2, {2});
    const MediationLaw c(s, {0.3, 0.7, 0.6, 0.4}, {0.5, 0.5, 0.1, 0.9, 0.2, 0.8, 0.6, 0.4},
                         std::vector<double>(8, 1.0));
    for (double v : nested_mean_matrix(c).values) CHECK(v == doctest::Approx(2.0));
    // p = 1 gives the mediation formula.
    const MediationLaw flat = random_law(rng, make_shape({0.0, 1.0}, 3));
    CHECK(std::abs(nested_mean_matrix(flat).values[0] - pde_point_mediation_formula(flat).lower) <= 1e-12);
}

TEST_CASE("monotonicity weights follow the printed table") {
    // One binary component, pr(R=1|a) = 0.6, pr(R=1|a*) = 0.4.
    const LawShape s = make_shape({0.0, 1.0}, 2, {2});
    Rng rng(4);
    MediationLaw base = random_law(rng, s);
    std::vector<double> p_r{0.6, 0.4, 0.4, 0.6};
    const MediationLaw law(s, p_r, base.m_table(), base.y_table());
    const NestedMeans w = monotonicity_weights(law);
    CHECK(std::abs(w.at(1, 1) - 0.4) <= 1e-15);
    CHECK(std::abs(w.at(1, 0) - 0.2) <= 1e-15);
    CHECK(w.at(0, 1) == 0.0);
    CHECK(std::abs(w.at(0, 0) - 0.4) <= 1e-15);

    // Equal marginals: mass only on the diagonal.
    const MediationLaw eq(s, {0.7, 0.3, 0.7, 0.3}, base.m_table(), base.y_table());
    const NestedMeans we = monotonicity_weights(eq);
    CHECK(we.at(0, 1) == 0.0);
    CHECK(std::abs(we.at(1, 0)) <= 1e-15);

    // Violation is an error.
    const MediationLaw bad(s, {0.4, 0.6, 0.6, 0.4}, base.m_table(), base.y_table());
    CHECK(code_of([&] { (void)pde_point_monotonicity(bad); }) == ErrorCode::MonotonicityViolated);
    // Non-binary components are rejected.
    const MediationLaw tri = random_law(rng, make_shape({0.0, 1.0}, 2, {3}));
    CHECK(code_of([&] { (void)pde_point_monotonicity(tri); }).has_value());
}

TEST_CASE("monotonicity weights are the product of per-component tables") {
    Rng rng(13);
    const LawShape s = make_shape({0.0, 1.0}, 2, {2, 2, 2});
    int checked = 0;
    while (checked < 50) {
        const MediationLaw law = random_law(rng, s);
        std::vector<double> pa1(3), pas1(3);
        bool ok = true;
        for (std::size_t j = 0; j < 3; ++j) {
            for (std::size_t r = 0; r < 8; ++r) {
                const bool bit = ((r >> (2 - j)) & 1u) != 0;
                if (bit) {
                    pa1[j] += law.r_table()[8 + r];
                    pas1[j] += law.r_table()[r];
                }
            }
            ok = ok && pa1[j] >= pas1[j];
        }
        if (!ok) {
            CHECK(code_of([&] { (void)monotonicity_weights(law); }) == ErrorCode::MonotonicityViolated);
            continue;
        }
        ++checked;
        const NestedMeans w = monotonicity_weights(law);
        for (std::size_t r = 0; r < 8; ++r) {
            for (std::size_t rs = 0; rs < 8; ++rs) {
                double want = 1.0;
                for (std::size_t j = 0; j < 3; ++j) {
                    want *= f_table((r >> (2 - j)) & 1u, (rs >> (2 - j)) & 1u, pa1[j], pas1[j]);
                }
                CHECK(std::abs(w.at(r, rs) - want) <= 1e-15);
            }
        }
    }
}

TEST_CASE("monotonicity functional equals the binary-R objective at the larger endpoint") {
    Rng rng(31);
    int checked = 0;
    while (checked < 200) {
        const MediationLaw law = random_law(rng, make_shape({0.0, 1.0, 2.0}, 3, {2}));
        const double pa1 = law.r_table()[3], pas1 = law.r_table()[1];
        if (pa1 < pas1) continue;
        ++checked;
        const auto x = nested_means_brute(law);
        const double want = binary_r_value(pa1, pas1, x[3], x[2], x[1], x[0], std::min(pa1, pas1));
        CHECK(std::abs(pde_point_monotonicity(law).lower - want) <= 1e-12);
        CHECK(pde_bounds_binary_r(law).contains(want, 1e-12));
    }
}

TEST_CASE("no-interaction formula") {
    Rng rng(101);
    // Additively separable outcome means: every reference gives the same value.
    const LawShape s = make_shape({0.0, 1.0, 2.0}, 3, {3});
    for (int rep = 0; rep < 50; ++rep) {
        const MediationLaw base = random_law(rng, s);
        // Y = B1 + B2 with B1 ~ Bern(u_m), B2 ~ Bern(v_r) independent.
        std::vector<double> p_y = base.y_table();
        std::vector<double> u(3), v(3);
        for (auto& e : u) e = rng.uniform();
        for (auto& e : v) e = rng.uniform();
        for (std::size_t r = 0; r < 3; ++r) {
            for (std::size_t m = 0; m < 3; ++m) {
                const std::size_t off = ((3 + r) * 3 + m) * 3;
                p_y[off] = (1 - u[m]) * (1 - v[r]);
                p_y[off + 1] = u[m] * (1 - v[r]) + (1 - u[m]) * v[r];
                p_y[off + 2] = u[m] * v[r];
            }
        }
        const MediationLaw law(s, base.r_table(), base.m_table(), p_y);
        const auto all = no_interaction_all_references(law);
        for (double val : all) CHECK(std::abs(val - all[0]) <= 1e-12);
        CHECK(interaction_contrasts(law) <= 1e-12);
        // Under separability the formula agrees with the cross-world LP, which is then a point.
        const auto lp = pde_bounds_npsem_lp(law);
        CHECK(lp.width() <= 1e-9);
        CHECK(std::abs(lp.lower - all[0]) <= 1e-9);
    }
    // Degenerate R reduces to the mediation formula.
    const MediationLaw flat = random_law(rng, make_shape({0.0, 1.0}, 3));
    CHECK(std::abs(pde_point_no_interaction(flat, 1, 0).lower - pde_point_mediation_formula(flat).lower) <= 1e-12);
}

TEST_CASE("interaction contrasts") {
    // meanY[m][r] = m * r on binary M and R: contrast 1.
    const LawShape s = make_shape({0.0, 1.0}, 2, {2});
    std::vector<double> p_y(16);
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t r = 0; r < 2; ++r) {
            for (std::size_t m = 0; m < 2; ++m) {
                const double mean = static_cast<double>(m * r);
                const std::size_t off = ((a * 2 + r) * 2 + m) * 2;
                p_y[off] = 1 - mean;
                p_y[off + 1] = mean;
            }
        }
    }
    const MediationLaw law(s, {0.5, 0.5, 0.5, 0.5}, std::vector<double>(8, 0.5), p_y);
    CHECK(interaction_contrasts(law) == doctest::Approx(1.0));

    Rng rng(55);
    for (int rep = 0; rep < 200; ++rep) {
        const MediationLaw l = random_law(rng, make_shape({0.0, 1.0, 4.0}, 2 + rep % 3, {static_cast<std::size_t>(1 + rep % 4)}));
        CHECK(std::abs(interaction_contrasts(l) - interaction_scan(l)) <= 1e-12);
    }
}

TEST_CASE("independent-R formula") {
    Rng rng(66);
    for (int rep = 0; rep < 200; ++rep) {
        const MediationLaw law = random_law(rng, make_shape({0.0, 1.0}, 2, {2}));
        const double pa1 = law.r_table()[3], pas1 = law.r_table()[1];
        const auto x = nested_means_brute(law);
        const double want = binary_r_value(pa1, pas1, x[3], x[2], x[1], x[0], pa1 * pas1);
        CHECK(std::abs(pde_point_independent_r(law).lower - want) <= 1e-12);
    }
    const MediationLaw flat = random_law(rng, make_shape({0.0, 1.0}, 3));
    CHECK(std::abs(pde_point_independent_r(flat).lower - pde_point_mediation_formula(flat).lower) <= 1e-12);
}

TEST_CASE("deterministic-R formula") {
    Rng rng(88);
    const MediationLaw law = random_law(rng, make_shape({0.0, 1.0, 2.0}, 2, {3}));
    const auto x = nested_means_brute(law);
    double ident = 0.0, constant = 0.0;
    for (std::size_t rs = 0; rs < 3; ++rs) {
        ident += x[rs * 3 + rs] * law.r_table()[rs];
        constant += x[2 * 3 + rs] * law.r_table()[rs];
    }
    CHECK(std::abs(pde_point_deterministic_r(law, {0, 1, 2}).estimate.lower - ident) <= 1e-12);
    const auto c = pde_point_deterministic_r(law, {2, 2, 2});
    CHECK(std::abs(c.estimate.lower - constant) <= 1e-12);
    CHECK_FALSE(c.marginal_compatible);

    // A compatible permutation lies inside the LP interval.
    const LawShape s = make_shape({0.0, 1.0}, 2, {3});
    for (int rep = 0; rep < 50; ++rep) {
        const MediationLaw b = random_law(rng, s);
        std::vector<double> p_r(6);
        const auto pas = rng.dirichlet(3);
        const std::vector<std::size_t> map{1, 2, 0};
        for (std::size_t r = 0; r < 3; ++r) {
            p_r[r] = pas[r];
            p_r[3 + map[r]] = pas[r];
        }
        const MediationLaw l(s, p_r, b.m_table(), b.y_table());
        const auto res = pde_point_deterministic_r(l, map);
        CHECK(res.marginal_compatible);
        CHECK(pde_bounds_npsem_lp(l).contains(res.estimate.lower, 1e-9));
    }
}

TEST_CASE("effect decomposition") {
    Rng rng(3);
    const MediationLaw law = random_law(rng, make_shape({0.0, 1.0}, 2));
    const auto g = pde_point_mediation_formula(law);
    const auto e = effect_decomposition(law, g);
    CHECK(e.nie.point_identified);
    CHECK(std::abs(e.nie.lower - (e.total - (g.lower - e.mean_baseline))) <= 1e-15);

    const auto b = pde_bounds_swig(law, false);
    const auto eb = effect_decomposition(law, b);
    CHECK(std::abs(eb.nie.width() - b.width()) <= 1e-15);
    CHECK(std::abs(eb.pde.width() - b.width()) <= 1e-15);
    CHECK(std::abs(eb.total - (law.mean_y_arm(1) - law.mean_y_arm(0))) <= 1e-15);
}

TEST_CASE("bounds are invariant to relabeling M and permuting R") {
    Rng rng(12);
    const LawShape s = make_shape({0.0, 1.0, 2.0}, 3, {3});
    const std::vector<std::size_t> mp{2, 0, 1}, rp{1, 2, 0};
    for (int rep = 0; rep < 50; ++rep) {
        const MediationLaw law = random_law(rng, s);
        std::vector<double> p_r(6), p_m(18), p_y(54);
        for (std::size_t a = 0; a < 2; ++a) {
            for (std::size_t r = 0; r < 3; ++r) {
                p_r[a * 3 + rp[r]] = law.r_table()[a * 3 + r];
                for (std::size_t m = 0; m < 3; ++m) {
                    p_m[(a * 3 + rp[r]) * 3 + mp[m]] = law.m_table()[(a * 3 + r) * 3 + m];
                    for (std::size_t y = 0; y < 3; ++y) {
                        p_y[((a * 3 + rp[r]) * 3 + mp[m]) * 3 + y] =
                            law.y_table()[((a * 3 + r) * 3 + m) * 3 + y];
                    }
                }
            }
        }
        const MediationLaw perm(s, p_r, p_m, p_y);
        for (bool with_r : {false, true}) {
            const auto u = pde_bounds_swig(law, with_r), v = pde_bounds_swig(perm, with_r);
            CHECK(std::abs(u.lower - v.lower) <= 1e-12);
            CHECK(std::abs(u.upper - v.upper) <= 1e-12);
        }
        const auto u = pde_bounds_npsem_lp(law), v = pde_bounds_npsem_lp(perm);
        CHECK(std::abs(u.lower - v.lower) <= 1e-10);
        CHECK(std::abs(u.upper - v.upper) <= 1e-10);
    }
}

TEST_CASE("assumption names round trip") {
    for (auto k : all_assumption_kinds()) {
        AssumptionSet s;
        s.kind = k;
        CHECK(parse_assumption_set(to_string(s)).kind == k);
    }
    CHECK(code_of([] { (void)parse_assumption_set("nonsense"); }) == ErrorCode::Config);
    CHECK(code_of([] { (void)IntervalEstimate::interval(1.0, 0.0, {}); }) == ErrorCode::Internal);
    CHECK(IntervalEstimate::interval(0.3, 0.3 + 1e-13, {}).point_identified);
}

#include "medbounds/cross_world_lp.hpp"

#include "medbounds/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <utility>

namespace medbounds {

namespace {

constexpr std::size_t kMaxLevels = 64;
constexpr double kDegenerateTol = 1e-12;

AssumptionSet label(AssumptionSet::Kind kind) {
    AssumptionSet set;
    set.kind = kind;
    return set;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool degenerate(const std::vector<double>& pmf) {
    return std::any_of(pmf.begin(), pmf.end(),
                       [](double v) { return v >= 1.0 - kDegenerateTol; });
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

// Flows on a spanning tree of the bipartite graph rows x cols, fixed by the
// marginals. Returns false when some flow is negative.
bool tree_flows(std::size_t p, const std::vector<std::size_t>& edges,
                const std::vector<double>& rows, const std::vector<double>& cols,
                std::vector<double>& pi) {
    std::vector<double> remaining(2 * p);
    for (std::size_t r = 0; r < p; ++r) remaining[r] = rows[r];
    for (std::size_t c = 0; c < p; ++c) remaining[p + c] = cols[c];
    std::vector<std::size_t> degree(2 * p, 0);
    for (auto e : edges) {
        ++degree[e / p];
        ++degree[p + e % p];
    }
    std::vector<char> used(edges.size(), 0);
    std::fill(pi.begin(), pi.end(), 0.0);
    for (std::size_t step = 0; step < edges.size(); ++step) {
        std::size_t leaf_edge = edges.size();
        std::size_t leaf = 0;
        for (std::size_t k = 0; k < edges.size() && leaf_edge == edges.size(); ++k) {
            if (used[k]) continue;
            const std::size_t u = edges[k] / p;
            const std::size_t v = p + edges[k] % p;
            if (degree[u] == 1) {
                leaf_edge = k;
                leaf = u;
            } else if (degree[v] == 1) {
                leaf_edge = k;
                leaf = v;
            }
        }
        if (leaf_edge == edges.size()) return false;
        const std::size_t u = edges[leaf_edge] / p;
        const std::size_t v = p + edges[leaf_edge] % p;
        const std::size_t other = leaf == u ? v : u;
        const double flow = remaining[leaf];
        if (flow < -1e-12) return false;
        pi[edges[leaf_edge]] = std::max(0.0, flow);
        remaining[leaf] = 0.0;
        remaining[other] -= flow;
        --degree[u];
        --degree[v];
        used[leaf_edge] = 1;
    }
    for (double r : remaining) {
        if (std::abs(r) > 1e-9) return false;
    }
    return true;
}

}  // namespace

CrossWorldLp build_cross_world_lp(std::vector<double> p_r_comparison,
                                  std::vector<double> p_r_baseline, const NestedMeans& x) {
    const std::size_t p = p_r_comparison.size();
    require(p >= 1 && p_r_baseline.size() == p && x.p == p && x.values.size() == p * p,
            ErrorCode::InvalidArgument, "cross-world LP inputs have inconsistent sizes");
    require(p <= kMaxLevels, ErrorCode::TooLarge,
            "R has " + std::to_string(p) + " levels; the LP supports at most 64");

    CrossWorldLp lp;
    lp.p = p;
    const std::size_t q = p - 1;
    lp.b = DenseMatrix(p * p, q * q);
    lp.d.assign(p * p, 0.0);
    for (std::size_t j = 0; j < q; ++j) {
        for (std::size_t k = 0; k < q; ++k) {
            lp.b(j * p + k, j * q + k) = 1.0;
            lp.b(j * p + q, j * q + k) = -1.0;
            lp.b(q * p + k, j * q + k) = -1.0;
            lp.b(p * p - 1, j * q + k) = 1.0;
        }
        lp.d[j * p + q] = p_r_comparison[j];
    }
    for (std::size_t k = 0; k < q; ++k) lp.d[q * p + k] = p_r_baseline[k];
    lp.d[p * p - 1] = p_r_comparison[q] + p_r_baseline[q] - 1.0;

    lp.x = x.values;
    for (double& v : lp.x) {
        if (std::isnan(v)) v = 0.0;
    }

    lp.pi_lo.resize(p * p);
    lp.pi_hi.resize(p * p);
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t rs = 0; rs < p; ++rs) {
            lp.pi_lo[r * p + rs] = std::max(0.0, p_r_comparison[r] + p_r_baseline[rs] - 1.0);
            lp.pi_hi[r * p + rs] = std::min(p_r_comparison[r], p_r_baseline[rs]);
        }
    }
    for (std::size_t j = 0; j < q; ++j) {
        for (std::size_t k = 0; k < q; ++k) {
            lp.delta_lo.push_back(lp.pi_lo[j * p + k]);
            lp.delta_hi.push_back(lp.pi_hi[j * p + k]);
        }
    }
    lp.p_r_comparison = std::move(p_r_comparison);
    lp.p_r_baseline = std::move(p_r_baseline);
    return lp;
}

CrossWorldLp build_cross_world_lp(const MediationLaw& law) {
    return build_cross_world_lp(law.r_marginal(kComparison), law.r_marginal(kBaseline),
                                nested_mean_matrix(law));
}

std::vector<double> pi_from_delta(const CrossWorldLp& lp, const std::vector<double>& delta) {
    require(delta.size() == lp.delta_size(), ErrorCode::InvalidArgument,
            "delta has the wrong dimension");
    std::vector<double> pi = lp.d;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        for (std::size_t k = 0; k < delta.size(); ++k) pi[i] += lp.b(i, k) * delta[k];
    }
    return pi;
}

double objective_at(const CrossWorldLp& lp, const std::vector<double>& delta) {
    const std::vector<double> pi = pi_from_delta(lp, delta);
    double value = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) value += lp.x[i] * pi[i];
    return value;
}

std::vector<double> independence_delta(const CrossWorldLp& lp) {
    std::vector<double> delta;
    delta.reserve(lp.delta_size());
    for (std::size_t j = 0; j + 1 < lp.p; ++j) {
        for (std::size_t k = 0; k + 1 < lp.p; ++k) {
            delta.push_back(lp.p_r_comparison[j] * lp.p_r_baseline[k]);
        }
    }
    return delta;
}

CrossWorldSolution simplex_solve(const CrossWorldLp& lp, Direction direction) {
    const std::size_t p = lp.p;
    CrossWorldSolution out;
    if (p == 1) {
        out.value = lp.x[0];
        return out;
    }
    const std::size_t n = lp.delta_size();
    const std::size_t q = p - 1;

    // delta entries are bounded directly; the 2p-1 remaining pi entries are rows.
    std::vector<std::size_t> row_entries;
    for (std::size_t j = 0; j < q; ++j) row_entries.push_back(j * p + q);
    for (std::size_t k = 0; k < p; ++k) row_entries.push_back(q * p + k);

    BoundedLp problem;
    problem.a = DenseMatrix(row_entries.size(), n);
    for (std::size_t i = 0; i < row_entries.size(); ++i) {
        const std::size_t e = row_entries[i];
        for (std::size_t k = 0; k < n; ++k) problem.a(i, k) = lp.b(e, k);
        problem.row_lo.push_back(lp.pi_lo[e] - lp.d[e]);
        problem.row_hi.push_back(lp.pi_hi[e] - lp.d[e]);
    }
    problem.col_lo = lp.delta_lo;
    problem.col_hi = lp.delta_hi;
    problem.cost.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < p * p; ++i) problem.cost[k] += lp.x[i] * lp.b(i, k);
    }

    const LpSolution sol = solve_bounded_lp(
        problem, direction == Direction::Minimize ? Sense::Minimize : Sense::Maximize);
    out.delta = sol.z;
    out.value = objective_at(lp, out.delta);
    out.iterations = sol.iterations;
    return out;
}

IntervalEstimate pde_bounds_npsem_lp(const CrossWorldLp& lp) {
    const AssumptionSet set = label(AssumptionSet::Kind::NpsemIeLp);
    if (lp.p == 1) return IntervalEstimate::point(lp.x[0], set);
    if (degenerate(lp.p_r_comparison) || degenerate(lp.p_r_baseline)) {
        return IntervalEstimate::point(objective_at(lp, independence_delta(lp)), set);
    }
    const double lower = simplex_solve(lp, Direction::Minimize).value;
    const double upper = simplex_solve(lp, Direction::Maximize).value;
    return IntervalEstimate::interval(std::min(lower, upper), std::max(lower, upper), set);
}

IntervalEstimate pde_bounds_npsem_lp(const MediationLaw& law) {
    return pde_bounds_npsem_lp(build_cross_world_lp(law));
}

double binary_r_objective(double p_comparison_1, double p_baseline_1, const NestedMeans& x,
                          double pi11) {
    auto entry = [&](std::size_t r, std::size_t rs) {
        const double v = x.at(r, rs);
        return std::isnan(v) ? 0.0 : v;
    };
    return entry(1, 1) * pi11 + entry(1, 0) * (p_comparison_1 - pi11) +
           entry(0, 1) * (p_baseline_1 - pi11) +
           entry(0, 0) * (1.0 - p_comparison_1 - p_baseline_1 + pi11);
}

IntervalEstimate pde_bounds_binary_r(double p_comparison_1, double p_baseline_1,
                                     const NestedMeans& x) {
    require(x.p == 2, ErrorCode::NotBinaryR, "closed-form bounds need binary R");
    const double lo_pi = std::max(0.0, p_comparison_1 + p_baseline_1 - 1.0);
    const double hi_pi = std::min(p_comparison_1, p_baseline_1);
    const double v1 = binary_r_objective(p_comparison_1, p_baseline_1, x, lo_pi);
    const double v2 = binary_r_objective(p_comparison_1, p_baseline_1, x, hi_pi);
    const AssumptionSet set = label(AssumptionSet::Kind::NpsemIeBinaryR);
    if (lo_pi == hi_pi) return IntervalEstimate::point(v1, set);
    return IntervalEstimate::interval(std::min(v1, v2), std::max(v1, v2), set);
}

IntervalEstimate pde_bounds_binary_r(const MediationLaw& law) {
    require(law.r_levels() == 2, ErrorCode::NotBinaryR,
            "closed-form bounds need binary R, got " + std::to_string(law.r_levels()) + " levels");
    return pde_bounds_binary_r(law.r_prob(kComparison, 1), law.r_prob(kBaseline, 1),
                               nested_mean_matrix(law));
}

IntervalEstimate enumerate_vertices_oracle(const CrossWorldLp& lp) {
    const std::size_t p = lp.p;
    require((p - 1) * (p - 1) <= 9, ErrorCode::TooLarge,
            "vertex enumeration is limited to (p-1)^2 <= 9");
    const AssumptionSet set = label(AssumptionSet::Kind::NpsemIeLp);
    if (p == 1) return IntervalEstimate::point(lp.x[0], set);

    const std::size_t edges_total = p * p;
    const std::size_t tree_size = 2 * p - 1;
    std::vector<char> pick(edges_total, 0);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(tree_size), 1);

    double lower = std::numeric_limits<double>::infinity();
    double upper = -lower;
    std::vector<double> pi(edges_total);
    std::vector<std::size_t> edges;
    do {
        edges.clear();
        for (std::size_t e = 0; e < edges_total; ++e) {
            if (pick[e]) edges.push_back(e);
        }
        UnionFind uf(2 * p);
        bool tree = true;
        for (auto e : edges) {
            if (!uf.unite(e / p, p + e % p)) {
                tree = false;
                break;
            }
        }
        if (!tree) continue;
        if (!tree_flows(p, edges, lp.p_r_comparison, lp.p_r_baseline, pi)) continue;
        double value = 0.0;
        for (std::size_t e = 0; e < edges_total; ++e) value += lp.x[e] * pi[e];
        lower = std::min(lower, value);
        upper = std::max(upper, value);
    } while (std::prev_permutation(pick.begin(), pick.end()));

    require(lower <= upper, ErrorCode::Infeasible, "no feasible coupling of the R marginals");
    return IntervalEstimate::interval(lower, upper, set);
}

std::string lp_text(const CrossWorldLp& lp) {
    const std::size_t p = lp.p;
    const std::size_t q = p - 1;
    auto var = [&](std::size_t k) {
        return "d_" + std::to_string(k / q + 1) + "_" + std::to_string(k % q + 1);
    };
    std::string out;
    out += "/* Cross-world coupling LP for R with p = " + std::to_string(p) + " levels. */\n";
    out += "/* pi = B delta + d, row-major over (r, r*); gamma0 = x' pi. */\n";
    out += "/* pr(R | a):  ";
    for (double v : lp.p_r_comparison) out += num(v) + " ";
    out += "*/\n/* pr(R | a*): ";
    for (double v : lp.p_r_baseline) out += num(v) + " ";
    out += "*/\n/* x: ";
    for (double v : lp.x) out += num(v) + " ";
    out += "*/\n/* d: ";
    for (double v : lp.d) out += num(v) + " ";
    out += "*/\n/* B (" + std::to_string(lp.b.rows) + " x " + std::to_string(lp.b.cols) + "):\n";
    for (std::size_t i = 0; i < lp.b.rows; ++i) {
        out += "   ";
        for (std::size_t k = 0; k < lp.b.cols; ++k) out += " " + num(lp.b(i, k));
        out += "\n";
    }
    out += "*/\n";

    double constant = 0.0;
    for (std::size_t i = 0; i < p * p; ++i) constant += lp.x[i] * lp.d[i];
    out += "/* objective constant x'd = " + num(constant) + " */\n";

    if (p == 1) {
        out += "max: 0;\n";
        return out;
    }
    const std::size_t n = lp.delta_size();
    out += "max:";
    for (std::size_t k = 0; k < n; ++k) {
        double c = 0.0;
        for (std::size_t i = 0; i < p * p; ++i) c += lp.x[i] * lp.b(i, k);
        out += " " + std::string(c < 0 ? "-" : "+") + num(std::abs(c)) + " " + var(k);
    }
    out += ";\n";
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t rs = 0; rs < p; ++rs) {
            const std::size_t e = r * p + rs;
            if (r < q && rs < q) continue;
            out += "pi_" + std::to_string(r + 1) + "_" + std::to_string(rs + 1) + ": " +
                   num(lp.pi_lo[e] - lp.d[e]) + " <=";
            bool any = false;
            for (std::size_t k = 0; k < n; ++k) {
                const double c = lp.b(e, k);
                if (c == 0.0) continue;
                out += " " + std::string(c < 0 ? "-" : "+") + num(std::abs(c)) + " " + var(k);
                any = true;
            }
            if (!any) out += " 0";
            out += " <= " + num(lp.pi_hi[e] - lp.d[e]) + ";\n";
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        out += num(lp.delta_lo[k]) + " <= " + var(k) + " <= " + num(lp.delta_hi[k]) + ";\n";
    }
    return out;
}

}  // namespace medbounds

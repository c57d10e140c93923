#include "medbounds/world.hpp"

#include "medbounds/errors.hpp"
#include "medbounds/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace medbounds {

namespace {

constexpr double kPmfTol = 1e-9;
constexpr double kMaxStates = 1e7;

void check_pmf(const std::vector<double>& p, const std::string& what) {
    require(!p.empty(), ErrorCode::InvalidArgument, what + " is empty");
    double total = 0.0;
    for (double v : p) {
        require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
                what + " has a negative or non-finite entry");
        total += v;
    }
    require(std::abs(total - 1.0) <= kPmfTol, ErrorCode::InvalidArgument,
            what + " does not sum to one");
}

void check_table(const std::vector<std::size_t>& table, std::size_t expected, std::size_t bound,
                 const std::string& what) {
    require(table.size() == expected, ErrorCode::InvalidArgument,
            what + " has " + std::to_string(table.size()) + " entries, expected " +
                std::to_string(expected));
    for (std::size_t v : table) {
        require(v < bound, ErrorCode::InvalidArgument, what + " has an out-of-range entry");
    }
}

std::vector<double> outer(const std::vector<double>& u, const std::vector<double>& v) {
    std::vector<double> out;
    out.reserve(u.size() * v.size());
    for (double a : u) {
        for (double b : v) out.push_back(a * b);
    }
    return out;
}

/// Index e < n goes through a random permutation of 0..n-1 so every level is
/// reached; larger indices are uniform.
std::vector<std::size_t> covering_map(Rng& rng, std::size_t eps, std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<std::size_t> out(eps);
    for (std::size_t e = 0; e < eps; ++e) out[e] = e < n ? perm[e] : rng.below(n);
    return out;
}

std::vector<std::size_t> shuffled(Rng& rng, std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    return perm;
}

/// North-west corner coupling of two pmfs after independent random reorderings.
std::vector<double> corner_coupling(Rng& rng, const std::vector<double>& pu,
                                    const std::vector<double>& pv) {
    const auto ou = shuffled(rng, pu.size());
    const auto ov = shuffled(rng, pv.size());
    std::vector<double> k(pu.size() * pv.size(), 0.0);
    std::size_t i = 0, j = 0;
    double ru = pu[ou[0]], rv = pv[ov[0]];
    while (i < pu.size() && j < pv.size()) {
        const double t = std::min(ru, rv);
        k[ou[i] * pv.size() + ov[j]] += t;
        ru -= t;
        rv -= t;
        if (ru <= rv) {
            if (++i < pu.size()) ru = pu[ou[i]];
        } else {
            if (++j < pv.size()) rv = pv[ov[j]];
        }
    }
    return k;
}

}  // namespace

std::size_t WorldSpec::r_levels() const {
    std::size_t n = 1;
    for (std::size_t k : r_components) n *= k;
    return n;
}

std::size_t WorldSpec::r_of(std::size_t x, std::size_t c, std::size_t h, std::size_t e) const {
    return g_r[((x * c_levels() + c) * h_levels() + h) * eps_r_size() + e];
}

std::size_t WorldSpec::m_of(std::size_t x, std::size_t r, std::size_t c, std::size_t e) const {
    return g_m[((x * r_levels() + r) * c_levels() + c) * eps_m_size() + e];
}

std::size_t WorldSpec::y_of(std::size_t x, std::size_t r, std::size_t m, std::size_t c,
                            std::size_t h, std::size_t e) const {
    return g_y[((((x * r_levels() + r) * m_levels + m) * c_levels() + c) * h_levels() + h) *
                   eps_y_size() +
               e];
}

double WorldSpec::coupling_prob(std::size_t em, std::size_t ey) const {
    if (coupling.empty()) return p_eps_m[kBaseline][em] * p_eps_y[kComparison][ey];
    return coupling[em * eps_y_size() + ey];
}

bool WorldSpec::has_latent_confounder() const {
    return std::count_if(p_h.begin(), p_h.end(), [](double v) { return v > 0.0; }) > 1;
}

bool WorldSpec::has_product_coupling(double tol) const {
    if (coupling.empty()) return true;
    for (std::size_t i = 0; i < eps_m_size(); ++i) {
        for (std::size_t j = 0; j < eps_y_size(); ++j) {
            const double prod = p_eps_m[kBaseline][i] * p_eps_y[kComparison][j];
            if (std::abs(coupling[i * eps_y_size() + j] - prod) > tol) return false;
        }
    }
    return true;
}

void WorldSpec::validate() const {
    require(!y_values.empty(), ErrorCode::InvalidArgument, "world has no outcome values");
    for (double v : y_values) {
        require(std::isfinite(v), ErrorCode::InvalidArgument, "outcome value is not finite");
    }
    require(m_levels > 0, ErrorCode::InvalidArgument, "world has no mediator levels");
    for (std::size_t k : r_components) {
        require(k > 0, ErrorCode::InvalidArgument, "R component with no levels");
    }
    require(p_comparison > 0.0 && p_comparison < 1.0, ErrorCode::InvalidArgument,
            "p_comparison must lie strictly between 0 and 1");
    check_pmf(p_c, "p_c");
    check_pmf(p_h, "p_h");
    check_pmf(p_eps_r, "p_eps_r");
    for (std::size_t x = 0; x < 2; ++x) {
        check_pmf(p_eps_m[x], "p_eps_m");
        check_pmf(p_eps_y[x], "p_eps_y");
    }
    require(p_eps_m[0].size() == p_eps_m[1].size() && p_eps_y[0].size() == p_eps_y[1].size(),
            ErrorCode::InvalidArgument, "disturbance supports must match across exposure levels");
    const std::size_t nr = r_levels();
    check_table(g_r, 2 * c_levels() * h_levels() * eps_r_size(), nr, "g_r");
    check_table(g_m, 2 * nr * c_levels() * eps_m_size(), m_levels, "g_m");
    check_table(g_y, 2 * nr * m_levels * c_levels() * h_levels() * eps_y_size(), y_values.size(),
                "g_y");
    if (!coupling.empty()) {
        require(coupling.size() == eps_m_size() * eps_y_size(), ErrorCode::InvalidArgument,
                "coupling has the wrong size");
        for (double v : coupling) {
            require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
                    "coupling has a negative entry");
        }
        for (std::size_t i = 0; i < eps_m_size(); ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < eps_y_size(); ++j) row += coupling[i * eps_y_size() + j];
            require(std::abs(row - p_eps_m[kBaseline][i]) <= kPmfTol, ErrorCode::InvalidArgument,
                    "coupling row sums differ from p_eps_m under the baseline");
        }
        for (std::size_t j = 0; j < eps_y_size(); ++j) {
            double col = 0.0;
            for (std::size_t i = 0; i < eps_m_size(); ++i) col += coupling[i * eps_y_size() + j];
            require(std::abs(col - p_eps_y[kComparison][j]) <= kPmfTol,
                    ErrorCode::InvalidArgument,
                    "coupling column sums differ from p_eps_y under the comparison");
        }
    }
}

double WorldSpec::state_count() const {
    return static_cast<double>(c_levels()) * static_cast<double>(h_levels()) *
           static_cast<double>(eps_r_size()) * static_cast<double>(eps_m_size()) *
           static_cast<double>(eps_m_size()) * static_cast<double>(eps_y_size());
}

WorldTruth enumerate_truth(const WorldSpec& spec, ZeroCellPolicy policy) {
    spec.validate();
    require(spec.state_count() <= kMaxStates, ErrorCode::TooLarge,
            "world has too many disturbance combinations to enumerate");

    const std::size_t nc = spec.c_levels(), nh = spec.h_levels(), ner = spec.eps_r_size();
    const std::size_t nem = spec.eps_m_size(), ney = spec.eps_y_size();
    const std::size_t nr = spec.r_levels(), nm = spec.m_levels, ny = spec.y_values.size();
    const auto& yv = spec.y_values;

    CompensatedSum gamma0, mean_a, mean_as, nie;
    std::vector<double> cross(nr * nr, 0.0);
    std::vector<std::vector<double>> joints(nc, std::vector<double>(2 * nr * nm * ny, 0.0));
    std::vector<double> pooled(2 * nr * nm * ny, 0.0);

    for (std::size_t c = 0; c < nc; ++c) {
        const double pc = spec.p_c[c];
        if (pc <= 0.0) continue;
        for (std::size_t h = 0; h < nh; ++h) {
            const double ph = spec.p_h[h];
            if (ph <= 0.0) continue;
            for (std::size_t er = 0; er < ner; ++er) {
                const double w0 = pc * ph * spec.p_eps_r[er];
                if (w0 <= 0.0) continue;
                const std::size_t ra = spec.r_of(kComparison, c, h, er);
                const std::size_t ras = spec.r_of(kBaseline, c, h, er);
                cross[ra * nr + ras] += w0;

                // Observed laws per arm, conditional on C = c.
                for (std::size_t x = 0; x < 2; ++x) {
                    const std::size_t r = x == kComparison ? ra : ras;
                    const double wx = ph * spec.p_eps_r[er];
                    for (std::size_t em = 0; em < nem; ++em) {
                        const double pem = spec.p_eps_m[x][em];
                        if (pem <= 0.0) continue;
                        const std::size_t m = spec.m_of(x, r, c, em);
                        for (std::size_t ey = 0; ey < ney; ++ey) {
                            const double pey = spec.p_eps_y[x][ey];
                            if (pey <= 0.0) continue;
                            const std::size_t y = spec.y_of(x, r, m, c, h, ey);
                            const double w = wx * pem * pey;
                            joints[c][((x * nr + r) * nm + m) * ny + y] += w;
                            if (x == kComparison) {
                                mean_a.add(pc * w * yv[y]);
                            } else {
                                mean_as.add(pc * w * yv[y]);
                            }
                        }
                    }
                }

                // Cross-world quantities.
                for (std::size_t em0 = 0; em0 < nem; ++em0) {
                    const std::size_t m_star = spec.m_of(kBaseline, ras, c, em0);
                    for (std::size_t ey = 0; ey < ney; ++ey) {
                        const double k = spec.coupling_prob(em0, ey);
                        if (k <= 0.0) continue;
                        const double y_cross = yv[spec.y_of(kComparison, ra, m_star, c, h, ey)];
                        gamma0.add(w0 * k * y_cross);
                        for (std::size_t em1 = 0; em1 < nem; ++em1) {
                            const double p1 = spec.p_eps_m[kComparison][em1];
                            if (p1 <= 0.0) continue;
                            const std::size_t m_a = spec.m_of(kComparison, ra, c, em1);
                            const double y_own = yv[spec.y_of(kComparison, ra, m_a, c, h, ey)];
                            nie.add(w0 * k * p1 * (y_own - y_cross));
                        }
                    }
                }
            }
        }
    }

    const LawShape shape{spec.y_values, nm, spec.r_components};
    std::vector<MediationLaw> laws;
    std::vector<double> weights;
    std::vector<std::size_t> patterns;
    for (std::size_t c = 0; c < nc; ++c) {
        if (spec.p_c[c] <= 0.0) continue;
        for (std::size_t k = 0; k < pooled.size(); ++k) pooled[k] += spec.p_c[c] * joints[c][k];
        laws.push_back(MediationLaw::from_joint(shape, joints[c], policy));
        weights.push_back(spec.p_c[c]);
        patterns.push_back(c);
    }
    StratifiedLaws strata = make_strata(std::move(laws), std::move(weights), std::move(patterns));
    strata.dropped_strata = nc - strata.size();
    MediationLaw population = MediationLaw::from_joint(shape, pooled, policy);

    const double te = population.mean_y_arm(kComparison) - population.mean_y_arm(kBaseline);
    return WorldTruth{gamma0.value(),
                      mean_a.value(),
                      mean_as.value(),
                      te,
                      gamma0.value() - mean_as.value(),
                      nie.value(),
                      std::move(population),
                      std::move(strata),
                      std::move(cross)};
}

DatasetCodecs world_codecs(const WorldSpec& spec) {
    DatasetCodecs codecs;
    if (spec.c_levels() > 1) {
        codecs.covariates = ProductCodec({CategoricalCodec::numbered("C", spec.c_levels())});
    }
    codecs.exposure = make_exposure_codec("A", "0", "1");
    std::vector<CategoricalCodec> rs;
    for (std::size_t j = 0; j < spec.r_components.size(); ++j) {
        rs.push_back(CategoricalCodec::numbered("R" + std::to_string(j + 1), spec.r_components[j]));
    }
    codecs.confounders = ProductCodec(std::move(rs));
    codecs.mediator = CategoricalCodec::numbered("M", spec.m_levels);
    codecs.outcome = OutcomeCodec::from_values("Y", spec.y_values);
    return codecs;
}

Dataset sample_dataset(const WorldSpec& spec, std::size_t n, std::uint64_t seed) {
    require(n >= 1, ErrorCode::InvalidArgument, "sample size must be at least 1");
    spec.validate();
    Rng rng(seed);
    std::vector<Record> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Record rec;
        rec.c = rng.categorical(spec.p_c);
        rec.a = rng.uniform() < spec.p_comparison ? kComparison : kBaseline;
        const std::size_t h = rng.categorical(spec.p_h);
        rec.r = spec.r_of(rec.a, rec.c, h, rng.categorical(spec.p_eps_r));
        rec.m = spec.m_of(rec.a, rec.r, rec.c, rng.categorical(spec.p_eps_m[rec.a]));
        rec.y = spec.y_of(rec.a, rec.r, rec.m, rec.c, h, rng.categorical(spec.p_eps_y[rec.a]));
        records.push_back(rec);
    }
    return Dataset(world_codecs(spec), std::move(records));
}

double monte_carlo_gamma0(const WorldSpec& spec, std::size_t draws, std::uint64_t seed,
                          double* standard_error) {
    spec.validate();
    require(draws > 1, ErrorCode::InvalidArgument, "need at least two draws");
    const std::vector<double> joint =
        spec.coupling.empty() ? outer(spec.p_eps_m[kBaseline], spec.p_eps_y[kComparison])
                              : spec.coupling;
    Rng rng(seed);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const std::size_t c = rng.categorical(spec.p_c);
        const std::size_t h = rng.categorical(spec.p_h);
        const std::size_t er = rng.categorical(spec.p_eps_r);
        const std::size_t k = rng.categorical(joint);
        const std::size_t em = k / spec.eps_y_size(), ey = k % spec.eps_y_size();
        const std::size_t ras = spec.r_of(kBaseline, c, h, er);
        const std::size_t ra = spec.r_of(kComparison, c, h, er);
        const std::size_t m = spec.m_of(kBaseline, ras, c, em);
        const double y = spec.y_values[spec.y_of(kComparison, ra, m, c, h, ey)];
        sum += y;
        sum_sq += y * y;
    }
    const double nd = static_cast<double>(draws);
    const double mean = sum / nd;
    if (standard_error) {
        const double var = std::max(0.0, (sum_sq - nd * mean * mean) / (nd - 1.0));
        *standard_error = std::sqrt(var / nd);
    }
    return mean;
}

WorldSpec random_world(const RandomWorldOptions& options, std::uint64_t seed) {
    Rng rng(seed);
    WorldSpec w;
    w.y_values = options.outcome == OutcomeStructure::AdditiveMR ? std::vector<double>{0.0, 1.0, 2.0}
                                                                 : options.y_values;
    require(!w.y_values.empty(), ErrorCode::InvalidArgument, "no outcome values");
    require(options.m_levels > 0 && options.c_levels > 0 && options.h_levels > 0,
            ErrorCode::InvalidArgument, "level counts must be positive");
    w.m_levels = options.m_levels;
    w.r_components = options.r_components;
    w.p_comparison = options.p_comparison;
    w.p_c = options.c_levels > 1 ? rng.dirichlet(options.c_levels) : std::vector<double>{1.0};
    w.p_h = options.h_levels > 1 ? rng.dirichlet(options.h_levels) : std::vector<double>{1.0};

    const std::size_t nr = w.r_levels(), nm = w.m_levels, ny = w.y_values.size();
    const std::size_t nc = w.c_levels(), nh = w.h_levels();

    // R(x) = g_r[x][c][h][e_r].
    switch (options.r_structure) {
        case RStructure::Generic:
        case RStructure::Deterministic: {
            const std::size_t ne = std::max(options.eps_r, nr);
            w.p_eps_r = rng.dirichlet(ne);
            w.g_r.assign(2 * nc * nh * ne, 0);
            for (std::size_t x = 0; x < 2; ++x) {
                for (std::size_t c = 0; c < nc; ++c) {
                    for (std::size_t h = 0; h < nh; ++h) {
                        const auto f = covering_map(rng, ne, nr);
                        std::copy(f.begin(), f.end(),
                                  w.g_r.begin() + static_cast<std::ptrdiff_t>(((x * nc + c) * nh + h) * ne));
                    }
                }
            }
            if (options.r_structure == RStructure::Deterministic) {
                const auto& map = options.deterministic_map;
                require(map.size() == nr, ErrorCode::InvalidArgument,
                        "deterministic map needs one entry per R level");
                for (std::size_t v : map) {
                    require(v < nr, ErrorCode::InvalidArgument, "deterministic map out of range");
                }
                const std::size_t half = nc * nh * ne;
                for (std::size_t k = 0; k < half; ++k) w.g_r[half + k] = map[w.g_r[k]];
            }
            break;
        }
        case RStructure::IndependentArms: {
            const std::size_t n0 = std::max(options.eps_r, nr);
            w.p_eps_r = outer(rng.dirichlet(n0), rng.dirichlet(n0));
            const std::size_t ne = n0 * n0;
            w.g_r.assign(2 * nc * nh * ne, 0);
            for (std::size_t c = 0; c < nc; ++c) {
                for (std::size_t h = 0; h < nh; ++h) {
                    const auto f0 = covering_map(rng, n0, nr);
                    const auto f1 = covering_map(rng, n0, nr);
                    for (std::size_t e1 = 0; e1 < n0; ++e1) {
                        for (std::size_t e2 = 0; e2 < n0; ++e2) {
                            const std::size_t e = e1 * n0 + e2;
                            w.g_r[((0 * nc + c) * nh + h) * ne + e] = f0[e1];
                            w.g_r[((1 * nc + c) * nh + h) * ne + e] = f1[e2];
                        }
                    }
                }
            }
            break;
        }
        case RStructure::MonotoneComponents: {
            // Per component j, e_j in {0, 1, 2}: R_j(a*) = [e_j = 0], R_j(a) = [e_j <= 1].
            const std::size_t k = w.r_components.size();
            require(k > 0, ErrorCode::InvalidArgument, "monotone R needs at least one component");
            for (std::size_t s : w.r_components) {
                require(s == 2, ErrorCode::InvalidArgument, "monotone R needs binary components");
            }
            std::vector<double> p{1.0};
            for (std::size_t j = 0; j < k; ++j) p = outer(p, rng.dirichlet(3));
            w.p_eps_r = std::move(p);
            const std::size_t ne = w.p_eps_r.size();
            const std::vector<std::size_t> threes(k, 3);
            w.g_r.assign(2 * nc * nh * ne, 0);
            for (std::size_t e = 0; e < ne; ++e) {
                const auto parts = decompose_index(threes, e);
                std::vector<std::size_t> r0(k), r1(k);
                for (std::size_t j = 0; j < k; ++j) {
                    r0[j] = parts[j] == 0 ? 1 : 0;
                    r1[j] = parts[j] <= 1 ? 1 : 0;
                }
                const std::size_t i0 = compose_index(w.r_components, r0);
                const std::size_t i1 = compose_index(w.r_components, r1);
                for (std::size_t ch = 0; ch < nc * nh; ++ch) {
                    w.g_r[ch * ne + e] = i0;
                    w.g_r[(nc * nh + ch) * ne + e] = i1;
                }
            }
            break;
        }
    }

    // M(x) = g_m[x][r][c][e_m].
    {
        const std::size_t ne = std::max(options.eps_m, nm);
        w.p_eps_m = {rng.dirichlet(ne), rng.dirichlet(ne)};
        w.g_m.assign(2 * nr * nc * ne, 0);
        for (std::size_t row = 0; row < 2 * nr * nc; ++row) {
            const auto f = covering_map(rng, ne, nm);
            std::copy(f.begin(), f.end(), w.g_m.begin() + static_cast<std::ptrdiff_t>(row * ne));
        }
    }

    // Y(x, m) = g_y[x][r][m][c][h][e_y].
    if (options.outcome == OutcomeStructure::AdditiveMR) {
        // Y = [u1 < t(x, m, c)] + [u2 < s(x, r, c, h)] with (u1, u2) independent.
        const std::size_t k = std::max<std::size_t>(options.eps_y, 2);
        const std::size_t ne = k * k;
        w.p_eps_y = {outer(rng.dirichlet(k), rng.dirichlet(k)),
                     outer(rng.dirichlet(k), rng.dirichlet(k))};
        std::vector<std::size_t> t(2 * nm * nc), s(2 * nr * nc * nh);
        for (auto& v : t) v = rng.below(k + 1);
        for (auto& v : s) v = rng.below(k + 1);
        w.g_y.assign(2 * nr * nm * nc * nh * ne, 0);
        for (std::size_t x = 0; x < 2; ++x) {
            for (std::size_t r = 0; r < nr; ++r) {
                for (std::size_t m = 0; m < nm; ++m) {
                    for (std::size_t c = 0; c < nc; ++c) {
                        for (std::size_t h = 0; h < nh; ++h) {
                            const std::size_t tv = t[(x * nm + m) * nc + c];
                            const std::size_t sv = s[((x * nr + r) * nc + c) * nh + h];
                            const std::size_t base =
                                ((((x * nr + r) * nm + m) * nc + c) * nh + h) * ne;
                            for (std::size_t u1 = 0; u1 < k; ++u1) {
                                for (std::size_t u2 = 0; u2 < k; ++u2) {
                                    w.g_y[base + u1 * k + u2] =
                                        (u1 < tv ? 1 : 0) + (u2 < sv ? 1 : 0);
                                }
                            }
                        }
                    }
                }
            }
        }
    } else {
        const std::size_t ne = std::max(options.eps_y, ny);
        w.p_eps_y = {rng.dirichlet(ne), rng.dirichlet(ne)};
        w.g_y.assign(2 * nr * nm * nc * nh * ne, 0);
        for (std::size_t row = 0; row < 2 * nr * nm * nc * nh; ++row) {
            const auto f = covering_map(rng, ne, ny);
            std::copy(f.begin(), f.end(), w.g_y.begin() + static_cast<std::ptrdiff_t>(row * ne));
        }
    }

    if (options.coupling == CouplingKind::Random) {
        const std::vector<double>& pm = w.p_eps_m[kBaseline];
        const std::vector<double>& py = w.p_eps_y[kComparison];
        const std::vector<double> corner = corner_coupling(rng, pm, py);
        const std::vector<double> prod = outer(pm, py);
        const double lambda = 0.2 + 0.8 * rng.uniform();
        w.coupling.resize(prod.size());
        for (std::size_t i = 0; i < prod.size(); ++i) {
            w.coupling[i] = lambda * corner[i] + (1.0 - lambda) * prod[i];
        }
    }
    w.validate();
    return w;
}

WorldSpec extreme_coupling_world(const std::vector<double>& p_m_star,
                                 const std::vector<std::vector<double>>& p_y_by_m,
                                 const std::vector<double>& y_values, Extreme extreme) {
    const std::size_t nm = p_m_star.size(), ny = y_values.size();
    check_pmf(p_m_star, "p_m_star");
    require(p_y_by_m.size() == nm, ErrorCode::MismatchedSupport,
            "need one outcome pmf per mediator level");
    for (const auto& row : p_y_by_m) {
        require(row.size() == ny, ErrorCode::MismatchedSupport,
                "outcome pmf does not match the outcome support");
        check_pmf(row, "outcome pmf");
    }
    double tuples = 1.0;
    for (std::size_t m = 0; m < nm; ++m) tuples *= static_cast<double>(ny);
    require(tuples <= 1e6, ErrorCode::TooLarge, "too many outcome tuples for an extreme world");
    const auto nt = static_cast<std::size_t>(tuples);

    std::vector<std::size_t> order(ny);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return y_values[i] < y_values[j]; });

    // joint[m][i][y]: pr{I(M(a*) = m) = i, Y(a, m) = y} at the requested extreme,
    // from the quantile construction on a shared uniform.
    std::vector<std::vector<double>> joint(nm, std::vector<double>(2 * ny, 0.0));
    for (std::size_t m = 0; m < nm; ++m) {
        const double p = p_m_star[m];
        // Interval of the uniform on which I = 1.
        const double i1_lo = extreme == Extreme::Comonotone ? 1.0 - p : 0.0;
        const double i1_hi = extreme == Extreme::Comonotone ? 1.0 : p;
        double lo = 0.0;
        for (std::size_t y : order) {
            const double hi = lo + p_y_by_m[m][y];
            const double in1 = std::max(0.0, std::min(hi, i1_hi) - std::max(lo, i1_lo));
            joint[m][ny + y] = in1;
            joint[m][y] = std::max(0.0, (hi - lo) - in1);
            lo = hi;
        }
    }

    // Given M(a*) = m, the outcomes Y(a, m') are drawn independently from
    // pr{Y(a, m') | I(M(a*) = m') = [m = m']}.
    std::vector<double> coupling(nm * nt, 0.0);
    const std::vector<std::size_t> sizes(nm, ny);
    for (std::size_t m = 0; m < nm; ++m) {
        if (p_m_star[m] <= 0.0) continue;
        for (std::size_t t = 0; t < nt; ++t) {
            const auto ys = decompose_index(sizes, t);
            double prob = p_m_star[m];
            for (std::size_t mp = 0; mp < nm && prob > 0.0; ++mp) {
                const std::size_t i = mp == m ? 1 : 0;
                const double pi = i == 1 ? p_m_star[mp] : 1.0 - p_m_star[mp];
                prob *= pi > 0.0 ? joint[mp][i * ny + ys[mp]] / pi : 0.0;
            }
            coupling[m * nt + t] = prob;
        }
    }
    std::vector<double> p_tuple(nt, 0.0);
    for (std::size_t m = 0; m < nm; ++m) {
        for (std::size_t t = 0; t < nt; ++t) p_tuple[t] += coupling[m * nt + t];
    }
    const double total = std::accumulate(p_tuple.begin(), p_tuple.end(), 0.0);
    for (double& v : p_tuple) v /= total;

    WorldSpec w;
    w.y_values = y_values;
    w.m_levels = nm;
    w.p_eps_m = {p_m_star, std::vector<double>(nm, 1.0 / static_cast<double>(nm))};
    w.p_eps_y = {p_tuple, p_tuple};
    w.coupling = std::move(coupling);
    w.g_r = {0, 0};
    w.g_m.resize(2 * nm);
    for (std::size_t x = 0; x < 2; ++x) {
        for (std::size_t e = 0; e < nm; ++e) w.g_m[x * nm + e] = e;
    }
    w.g_y.resize(2 * nm * nt);
    for (std::size_t x = 0; x < 2; ++x) {
        for (std::size_t m = 0; m < nm; ++m) {
            for (std::size_t t = 0; t < nt; ++t) {
                w.g_y[(x * nm + m) * nt + t] = decompose_index(sizes, t)[m];
            }
        }
    }
    w.validate();
    return w;
}

}  // namespace medbounds

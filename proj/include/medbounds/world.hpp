#pragma once

#include "medbounds/bounds.hpp"
#include "medbounds/categorical.hpp"
#include "medbounds/covariates.hpp"
#include "medbounds/mediation_law.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace medbounds {

/// Structural-equation world over finite supports with exactly known
/// counterfactuals.
///
///   C ~ p_c,  A ~ Bernoulli(p_comparison) independent of everything,
///   H ~ p_h   (hidden common cause of R and Y; a single point means none),
///   R(x)    = g_r[x][c][h][e_r]
///   M(x)    = g_m[x][R(x)][c][e_m[x]]
///   Y(x, m) = g_y[x][R(x)][m][c][h][e_y[x]]
///
/// Each exposure level x has its own mediator and outcome disturbance. The
/// pair (e_m[a*], e_y[a]) is the only one that can be dependent: its joint pmf
/// is `coupling` (empty means the product of the marginals). Every other
/// disturbance is independent. Single-world independences therefore hold for
/// any coupling, while the cross-world pair M(a*), Y(a, m) can be dependent.
/// A product coupling with no H is an independent-errors world.
struct WorldSpec {
    std::vector<double> y_values{0.0, 1.0};
    std::size_t m_levels = 2;
    std::vector<std::size_t> r_components;
    std::vector<double> p_c{1.0};
    double p_comparison = 0.5;
    std::vector<double> p_h{1.0};
    std::vector<double> p_eps_r{1.0};
    std::array<std::vector<double>, 2> p_eps_m{std::vector<double>{1.0}, std::vector<double>{1.0}};
    std::array<std::vector<double>, 2> p_eps_y{std::vector<double>{1.0}, std::vector<double>{1.0}};
    /// Row-major joint over (e_m under a*, e_y under a); empty for product.
    std::vector<double> coupling;

    std::vector<std::size_t> g_r;  // [x][c][h][e_r]
    std::vector<std::size_t> g_m;  // [x][r][c][e_m]
    std::vector<std::size_t> g_y;  // [x][r][m][c][h][e_y]

    std::size_t r_levels() const;
    std::size_t c_levels() const { return p_c.size(); }
    std::size_t h_levels() const { return p_h.size(); }
    std::size_t eps_r_size() const { return p_eps_r.size(); }
    std::size_t eps_m_size() const { return p_eps_m[0].size(); }
    std::size_t eps_y_size() const { return p_eps_y[0].size(); }

    std::size_t r_of(std::size_t x, std::size_t c, std::size_t h, std::size_t e) const;
    std::size_t m_of(std::size_t x, std::size_t r, std::size_t c, std::size_t e) const;
    std::size_t y_of(std::size_t x, std::size_t r, std::size_t m, std::size_t c, std::size_t h,
                     std::size_t e) const;
    /// pr(e_m[a*] = em, e_y[a] = ey).
    double coupling_prob(std::size_t em, std::size_t ey) const;

    bool has_latent_confounder() const;
    bool has_product_coupling(double tol = 1e-12) const;
    bool is_npsem_ie() const { return has_product_coupling() && !has_latent_confounder(); }

    /// Throws InvalidArgument on any malformed table or pmf.
    void validate() const;
    /// Size of the largest enumeration enumerate_truth performs.
    double state_count() const;

    bool operator==(const WorldSpec&) const = default;
};

struct WorldTruth {
    double gamma0 = 0.0;           // E[Y{a, M(a*)}]
    double mean_comparison = 0.0;  // E[Y(a)]
    double mean_baseline = 0.0;    // E[Y(a*)]
    double te = 0.0;               // E(Y | a) - E(Y | a*) from the population law
    double pde = 0.0;              // gamma0 - E[Y(a*)]
    double nie = 0.0;              // E[Y{a, M(a)} - Y{a, M(a*)}], enumerated jointly
    MediationLaw population_law;   // pooled over C
    StratifiedLaws strata;         // one law per covariate pattern
    /// pr{R(a) = r, R(a*) = r*}, row-major [r][r*].
    std::vector<double> r_cross_joint;
};

/// Exact enumeration over every combination of covariates and disturbances.
/// Throws TooLarge beyond 1e7 states.
WorldTruth enumerate_truth(const WorldSpec& spec, ZeroCellPolicy policy = ZeroCellPolicy::Error);

/// Codecs used for datasets drawn from a world: labels "0", "1", ...; the
/// exposure's baseline is "0".
DatasetCodecs world_codecs(const WorldSpec& spec);

/// n i.i.d. observational records. Deterministic given the seed.
Dataset sample_dataset(const WorldSpec& spec, std::size_t n, std::uint64_t seed);

/// Monte Carlo draws of Y{a, M(a*)}; used to cross-check enumeration.
double monte_carlo_gamma0(const WorldSpec& spec, std::size_t draws, std::uint64_t seed,
                          double* standard_error = nullptr);

enum class CouplingKind { Product, Random };
enum class RStructure { Generic, MonotoneComponents, Deterministic, IndependentArms };
enum class OutcomeStructure { Generic, AdditiveMR };

struct RandomWorldOptions {
    std::vector<double> y_values{0.0, 1.0};
    std::size_t m_levels = 2;
    std::vector<std::size_t> r_components{2};
    std::size_t c_levels = 1;
    std::size_t h_levels = 1;
    std::size_t eps_r = 4;
    std::size_t eps_m = 4;
    std::size_t eps_y = 4;
    CouplingKind coupling = CouplingKind::Product;
    RStructure r_structure = RStructure::Generic;
    /// For RStructure::Deterministic: R(a) = map[R(a*)].
    std::vector<std::size_t> deterministic_map;
    /// AdditiveMR forces y_values = {0, 1, 2} and an outcome mean additive in (m, r).
    OutcomeStructure outcome = OutcomeStructure::Generic;
    double p_comparison = 0.5;
};

/// Random world: Dirichlet(1, ..., 1) pmfs and uniform random lookup tables.
/// Every level of R and M is reachable from every parent configuration, so
/// population conditionals are all defined.
WorldSpec random_world(const RandomWorldOptions& options, std::uint64_t seed);

enum class Extreme { Comonotone, Countermonotone };

/// World without R or C whose cross-world pair realizes the given marginals of
/// M(a*) and each Y(a, m), with I{M(a*) = m} and Y(a, m) coupled at the
/// requested Fréchet extreme for every m.
WorldSpec extreme_coupling_world(const std::vector<double>& p_m_star,
                                 const std::vector<std::vector<double>>& p_y_by_m,
                                 const std::vector<double>& y_values, Extreme extreme);

/// TOML document: pmfs as arrays, lookup tables as nested arrays.
std::string world_to_toml(const WorldSpec& spec);
WorldSpec world_from_toml(const std::string& text);
WorldSpec load_world(const std::string& path);

}  // namespace medbounds

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mfdrift/network.hpp"

namespace mfdrift {

/// Where z sits at an equilibrium. Only the band edges zero both the drift
/// and the diffusion of z; `drift_only` marks the band center, where the
/// drift vanishes but the diffusion does not.
enum class EquilibriumKind { lower_edge, upper_edge, drift_only };

const char* to_string(EquilibriumKind kind);

struct EquilibriumPoint
{
    EquilibriumKind kind = EquilibriumKind::lower_edge;
    bool congested = false;  ///< root lies on the falling branch of the exit-flow curve
    double n_eq = 0.0;
    double z_eq = 0.0;
    double n_buf_eq = 0.0;
    /// |dn/dt|, |mu_z| + |s_z| and |dn_buf/dt| at the point (ito drift).
    double residual_n = 0.0;
    double residual_z = 0.0;
    double residual_buf = 0.0;

    double max_residual() const;
};

struct EquilibriumSet
{
    std::vector<EquilibriumPoint> points;        ///< edge equilibria, uncongested first
    std::vector<EquilibriumPoint> drift_points;  ///< band-center diagnostics
};

/// Equilibria of the noise-free single-region system at constant demand.
/// Roots are bracketed separately on the rising and falling branches of
/// g_mi + z_edge. Returns an empty set when the demand exceeds what any
/// branch can serve; throws NumericalError if a bracketed solve fails.
EquilibriumSet find_equilibrium(const RegionParams& params, double q_const);

struct LvState
{
    double n = 0.0;
    double z = 0.0;
    double n_buf = 0.0;
};

struct LvTerms
{
    double lv1 = 0.0;
    double lv2 = 0.0;
};

/// LV1 = P(z)(z - z_eq) - (core / (2 delta_minus))^2 with
/// P = -delta_plus + 2z + (delta_plus - 2z)^3, and
/// LV2 = 2(n - n_eq) dn/dt + 2(n_buf - n_buf_eq) dn_buf/dt.
/// Throws DomainError for a degenerate band at state.n.
LvTerms lv_terms(const LvState& state, const EquilibriumPoint& eq, const RegionParams& params,
                 double q_raw);

/// Generator of V = (n - n_eq)^2 + (z - z_eq)^2 + (n_buf - n_buf_eq)^2 under
/// the printed z dynamics, assembled from the drift and diffusion routines
/// rather than from lv_terms. Equals lv2 - sigma^2 lv1.
double lv_total(const LvState& state, const EquilibriumPoint& eq, const RegionParams& params,
                double q_raw, double sigma);

/// Box of states; z is given as positions in [0, 1] across the band at each
/// n, mapped inside the band by a relative margin.
struct StateGrid
{
    std::vector<double> n;
    std::vector<double> z_fraction;
    std::vector<double> n_buf;
    double edge_margin = 1e-6;
};

/// Uniform box [0, n_jam] x band x [0, buf_max].
StateGrid make_state_grid(const RegionParams& params, std::size_t n_points, std::size_t z_points,
                          std::size_t buf_points, double buf_max);

struct LvSample
{
    LvState state;
    double lv1 = 0.0;
    double lv2 = 0.0;
};

/// LV <= 0 reads sigma^2 lv1 >= lv2. States with lv1 < 0 and lv2 <= 0 cap
/// sigma from above, states with lv1 > 0 and lv2 > 0 bound it from below,
/// states with lv1 <= 0 and lv2 > 0 violate for every sigma, and states with
/// lv1 >= 0 and lv2 <= 0 hold for every sigma.
struct LvReport
{
    EquilibriumPoint eq;
    double q_raw = 0.0;
    std::size_t n_points = 0;
    std::size_t z_points = 0;
    std::size_t buf_points = 0;
    std::size_t evaluated = 0;
    std::size_t skipped_degenerate = 0;
    std::size_t upper_bound_states = 0;
    std::size_t lower_bound_states = 0;
    std::size_t violating_states = 0;
    std::size_t unconditional_states = 0;
    std::optional<double> sigma_max;
    std::optional<LvSample> binding_upper;
    std::optional<double> sigma_min;
    std::optional<LvSample> binding_lower;
    std::optional<LvSample> worst_violation;  ///< largest lv2 among violating states
    std::vector<LvSample> samples;            ///< grid order, kept when requested

    /// No state constrains sigma from above.
    bool vacuous() const { return !sigma_max.has_value(); }
    std::string summary() const;
};

/// Throws ConfigError for an empty grid.
LvReport sigma_bound(const EquilibriumPoint& eq, const RegionParams& params, double q_raw,
                     const StateGrid& grid, bool keep_samples = false);

/// Evaluate an explicit list of states (used for single-point checks).
LvReport sigma_bound(const EquilibriumPoint& eq, const RegionParams& params, double q_raw,
                     const std::vector<LvState>& states, bool keep_samples = false);

}  // namespace mfdrift

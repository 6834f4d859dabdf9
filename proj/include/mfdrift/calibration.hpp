#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfdrift/integrator.hpp"
#include "mfdrift/network.hpp"

namespace mfdrift {

/// Accumulation record of one region at uniform spacing, with the gated
/// inflow the n-balance needs. When the inflow was not observed, `q_in`
/// holds an assumed constant and `inflow_assumed` is set.
struct ObservationSeries
{
    std::vector<double> t;
    std::vector<double> n;
    std::vector<double> q_in;
    bool inflow_assumed = false;

    std::size_t size() const { return t.size(); }
    double spacing() const;
};

/// Throws ConfigError unless sizes agree, there are at least 10 points and
/// the spacing is uniform within 1e-9 relative.
void validate_observations(const ObservationSeries& obs);

/// Fill a missing inflow record with a constant and flag the series.
void assume_constant_inflow(ObservationSeries& obs, double q_in);

/// Every `stride`-th recorded sample of `region` on a simulated path.
ObservationSeries observations_from_path(const PathRecord& path, std::size_t region,
                                         std::size_t stride = 1);

struct Gaussian
{
    double mean = 0.0;
    double variance = 0.0;
};

/// One Euler step of z: (z + dt mu, s^2 dt) at the band of n_prev.
/// Throws DomainError for a degenerate band.
Gaussian transition_z(double n_prev, double z_prev, const RegionParams& params, double sigma,
                      double dt, DriftMode mode);

/// One Euler step of n driven by a z that is itself one Euler step past
/// z_lag: mean n_prev + dt (q_in - g_mi(n_prev) - z_lag - dt mu(z_lag)),
/// variance dt^2 s(z_lag)^2 dt.
Gaussian transition_n(double n_prev, double z_lag, double q_in_prev, const RegionParams& params,
                      double sigma, double dt, DriftMode mode);

enum class FilterScheme {
    /// Follows each particle's noise-free (n, z) Euler path through the
    /// interval, treats the integrated z noise about it as Gaussian, and draws
    /// the end-of-interval z conditioned on the observed n.
    interval_adapted,
    /// Bootstrap filter on the two-step-lagged Euler transitions.
    lagged_bootstrap,
};

const char* to_string(FilterScheme scheme);
FilterScheme filter_scheme_from_string(const std::string& text);

struct LikelihoodOptions
{
    std::size_t n_particles = 500;
    std::uint64_t seed = 1;
    FilterScheme scheme = FilterScheme::interval_adapted;
    /// Euler substeps assumed inside one observation interval; 0 takes the
    /// continuous-time limit for the noise moments and 16 substeps for the
    /// mean path.
    std::size_t substeps = 0;
    DriftMode mode = DriftMode::ito_correct;
    double variance_floor = 1e-12;  ///< vehicles^2, guards edge particles
};

struct LikelihoodEstimate
{
    double log_likelihood = 0.0;
    double std_error = 0.0;
    std::size_t resamples = 0;
    /// First step at which every particle had zero weight (log_likelihood is
    /// then -inf).
    std::optional<std::size_t> failed_step;
};

/// Sequential Monte Carlo estimate of log p(n_1..n_K | n_0, sigma). Particle
/// noise depends only on (seed, step, particle), so the estimate is a
/// deterministic function of sigma for a fixed seed.
LikelihoodEstimate log_likelihood(const ObservationSeries& obs, const RegionParams& params,
                                  double sigma, const LikelihoodOptions& options);

struct SwarmSettings
{
    double sigma_lo = 0.001;
    double sigma_hi = 1.0;
    std::size_t population = 12;
    std::size_t iterations = 12;
    double inertia = 0.7;
    double cognitive = 1.5;
    double social = 1.5;
    std::size_t refine_iterations = 30;
    double refine_tolerance = 1e-4;  ///< in log sigma
};

struct TraceEntry
{
    std::size_t iteration = 0;
    double best_sigma = 0.0;
    double best_log_likelihood = 0.0;
};

struct CalibrationResult
{
    double sigma_star = 0.0;
    double log_likelihood = 0.0;
    double std_error = 0.0;
    std::size_t evaluations = 0;
    std::vector<TraceEntry> trace;  ///< swarm iterations, then one entry for the refinement
    SwarmSettings search;
    LikelihoodOptions likelihood;
    bool inflow_assumed = false;
};

/// Particle swarm in log sigma over [sigma_lo, sigma_hi], then a golden
/// section search between the evaluated neighbours of the swarm's best point.
/// Throws NumericalError when the initial population has no finite value.
CalibrationResult calibrate(const ObservationSeries& obs, const RegionParams& params,
                            const SwarmSettings& search, const LikelihoodOptions& likelihood);

}  // namespace mfdrift

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mfdrift/mfd_core.hpp"
#include "mfdrift/variation.hpp"

namespace mfdrift {

struct RegionParams
{
    BoundarySpec boundary;
    double sigma = 0.04;
    double q_max = 10.0;  ///< buffer discharge cap, veh/s
    double m_soft = 1.0;  ///< smoothing constant of the gate, veh^2

    double n_jam() const noexcept { return boundary.n_jam; }
};

struct RegionState
{
    double n = 0.0;
    std::vector<double> n_by_dest;  ///< indexed by destination region
    double z = 0.0;
    double n_buf = 0.0;
    double w = 0.0;
};

/// theta[i][j]: share of demand generated in region i destined to j.
using TransferMatrix = std::vector<std::vector<double>>;

struct RegionDrift
{
    double dn = 0.0;
    std::vector<double> dn_by_dest;
    double mu_z = 0.0;
    double s_z = 0.0;
    double dn_buf = 0.0;
    double q_in = 0.0;          ///< gated inflow
    double g = 0.0;             ///< realized exit flow g_mi + z
    double transfer_in = 0.0;   ///< flow received from other regions
    double transfer_out = 0.0;  ///< share of g sent to other regions
};

/// x / sqrt(M + x^2)
inline double psi(double x, double m_soft) { return x / std::sqrt(m_soft + x * x); }

double effective_inflow(double n_buf, double n, double q_raw, const RegionParams& p);

/// Per-destination share of `g_realized`, proportional to the bucket sizes.
std::vector<double> outflow_split(const RegionState& state, double g_realized);

/// Realized exit flow g_mi(n) + z with n clamped into [0, n_jam].
double realized_exit_flow(const RegionState& state, const RegionParams& p);

std::vector<RegionDrift> drift_vector(const std::vector<RegionState>& states,
                                      const std::vector<RegionParams>& params,
                                      const TransferMatrix& theta,
                                      const std::vector<double>& q_raw, DriftMode mode);

std::vector<double> diffusion_vector(const std::vector<RegionState>& states,
                                     const std::vector<RegionParams>& params);

/// Throws ConfigError unless theta is square of size `regions`, non-negative
/// and row-stochastic.
void validate_transfer_matrix(const TransferMatrix& theta, std::size_t regions,
                              const std::string& field_path);

void validate_region(const RegionParams& p, const std::string& field_path);

}  // namespace mfdrift

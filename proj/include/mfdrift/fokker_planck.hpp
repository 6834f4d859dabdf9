#pragma once

#include <cstddef>
#include <vector>

#include "mfdrift/network.hpp"

namespace mfdrift {

/// Uniform finite-volume grid on [lower, upper]. Cell j covers
/// [lower + j h, lower + (j + 1) h].
struct Grid1D
{
    double lower = 0.0;
    double upper = 1.0;
    std::size_t n_cells = 200;

    double spacing() const { return (upper - lower) / static_cast<double>(n_cells); }
    double center(std::size_t j) const { return lower + (static_cast<double>(j) + 0.5) * spacing(); }
    double face(std::size_t j) const { return lower + static_cast<double>(j) * spacing(); }
};

/// Grid spanning the band at n with a relative margin `edge_margin` of the
/// band width on each side. Throws DomainError for a degenerate band and
/// ConfigError for fewer than 16 cells.
Grid1D band_grid(const RegionParams& params, double n_fixed, std::size_t n_cells,
                 double edge_margin = 1e-6);

/// Cell-average densities; mass is sum(values) * h.
struct DensityField
{
    std::vector<double> values;
    double t = 0.0;

    double mass(const Grid1D& grid) const;
    double mean(const Grid1D& grid) const;
    double variance(const Grid1D& grid) const;
};

/// Unit mass at z0, split linearly between the two nearest cell centers so
/// that the first moment is exact.
DensityField point_mass(const Grid1D& grid, double z0);

struct FpeCoefficients
{
    std::vector<double> drift;      ///< mu_z at cell centers
    std::vector<double> diffusion;  ///< s_z^2 at cell centers
};

FpeCoefficients fpe_coefficients_1d(double n_fixed, const Grid1D& grid, const RegionParams& params,
                                    DriftMode mode);

/// Largest stable explicit step: min(0.4 h^2 / max s^2, 0.5 h / max |mu|).
double admissible_fpe_dt(double n_fixed, const Grid1D& grid, const RegionParams& params,
                         DriftMode mode);

/// dP/dt of the flux-form operator on a Z line with zero-flux ends.
/// `face_drift` has one entry per interior face (size n-1); `diffusion` one
/// per cell. Advection is upwinded.
std::vector<double> fpe_operator_1d(const std::vector<double>& density,
                                    const std::vector<double>& face_drift,
                                    const std::vector<double>& diffusion, double h);

struct FpeSolution
{
    Grid1D grid;
    std::vector<DensityField> snapshots;  ///< one per requested time, in order
    std::size_t steps = 0;
    std::size_t renormalizations = 0;     ///< steps that flushed negative values
    double max_mass_error = 0.0;
};

/// Explicit solve of dP/dt = -d(mu P)/dz + 1/2 d^2(s^2 P)/dz^2 at fixed n.
/// The last step before each snapshot is shortened to land on it exactly.
/// Throws NumericalError naming the admissible step when dt_pde is too large.
FpeSolution solve_fpe_1d(const DensityField& initial, const Grid1D& grid, double n_fixed,
                         const RegionParams& params, const std::vector<double>& snapshot_times,
                         double dt_pde, DriftMode mode = DriftMode::ito_correct);

/// Probability mass of a density in each of the given bins (cells are
/// treated as uniform within themselves).
std::vector<double> bin_masses(const DensityField& density, const Grid1D& grid,
                               const std::vector<double>& edges);

/// Rectilinear (n, z, n_buf) grid. Each axis needs at least 3 ascending,
/// uniformly spaced nodes.
struct Grid3D
{
    std::vector<double> n;
    std::vector<double> z;
    std::vector<double> n_buf;

    std::size_t size() const { return n.size() * z.size() * n_buf.size(); }
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const
    {
        return (i * z.size() + j) * n_buf.size() + k;
    }
};

/// Right-hand side of the single-region Fokker-Planck equation at constant
/// demand q_raw: divergence of the (n, z, n_buf) drift flux plus diffusion in z.
/// Drift along n and n_buf uses centered face averages; the z direction uses
/// fpe_operator_1d. Nodes outside the band carry zero coefficients. Every
/// outer face is zero-flux, so the volume integral of the result vanishes.
std::vector<double> fpe_residual_full(const std::vector<double>& density, const Grid3D& grid,
                                      const RegionParams& params, double q_raw,
                                      DriftMode mode = DriftMode::ito_correct);

}  // namespace mfdrift

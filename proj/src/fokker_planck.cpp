#include "mfdrift/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfdrift/error.hpp"

namespace mfdrift {

namespace {

GammaDelta nondegenerate_band(const RegionParams& params, double n)
{
    const GammaDelta gd = gamma_delta(params.boundary, n);
    if (gd.degenerate) {
        std::ostringstream os;
        os << "degenerate band at n = " << n;
        throw DomainError(os.str());
    }
    return gd;
}

std::vector<double> face_drifts(const GammaDelta& gd, const Grid1D& grid, double sigma,
                                DriftMode mode)
{
    std::vector<double> out(grid.n_cells - 1);
    for (std::size_t j = 0; j + 1 < grid.n_cells; ++j) {
        out[j] = drift_diffusion(grid.face(j + 1), gd, sigma, mode).mu;
    }
    return out;
}

void check_uniform_axis(const std::vector<double>& axis, const char* name)
{
    if (axis.size() < 3) {
        throw ConfigError(std::string("fpe_residual_full: axis ") + name +
                          " needs at least 3 nodes for the stencil");
    }
    const double h = axis[1] - axis[0];
    if (!(h > 0.0)) {
        throw ConfigError(std::string("fpe_residual_full: axis ") + name + " must ascend");
    }
    for (std::size_t i = 1; i < axis.size(); ++i) {
        if (std::fabs(axis[i] - axis[i - 1] - h) > 1e-9 * std::max(1.0, std::fabs(h))) {
            throw ConfigError(std::string("fpe_residual_full: axis ") + name +
                              " must be uniformly spaced");
        }
    }
}

}  // namespace

Grid1D band_grid(const RegionParams& params, double n_fixed, std::size_t n_cells,
                 double edge_margin)
{
    if (n_cells < 16) {
        throw ConfigError("fpe grid needs at least 16 cells");
    }
    const GammaDelta gd = nondegenerate_band(params, n_fixed);
    const double eps = edge_margin * gd.delta_minus;
    return Grid1D{gd.gamma_minus + eps, gd.gamma_plus - eps, n_cells};
}

double DensityField::mass(const Grid1D& grid) const
{
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    return sum * grid.spacing();
}

double DensityField::mean(const Grid1D& grid) const
{
    double sum = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        sum += values[j] * grid.center(j);
    }
    return sum * grid.spacing() / mass(grid);
}

double DensityField::variance(const Grid1D& grid) const
{
    const double m = mean(grid);
    double sum = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        const double d = grid.center(j) - m;
        sum += values[j] * d * d;
    }
    return sum * grid.spacing() / mass(grid);
}

DensityField point_mass(const Grid1D& grid, double z0)
{
    DensityField out;
    out.values.assign(grid.n_cells, 0.0);
    const double h = grid.spacing();
    const double pos = std::clamp((z0 - grid.lower) / h - 0.5, 0.0,
                                  static_cast<double>(grid.n_cells - 1));
    const auto j = std::min(static_cast<std::size_t>(pos), grid.n_cells - 2);
    const double frac = pos - static_cast<double>(j);
    out.values[j] = (1.0 - frac) / h;
    out.values[j + 1] = frac / h;
    return out;
}

FpeCoefficients fpe_coefficients_1d(double n_fixed, const Grid1D& grid, const RegionParams& params,
                                    DriftMode mode)
{
    const GammaDelta gd = nondegenerate_band(params, n_fixed);
    FpeCoefficients out;
    out.drift.resize(grid.n_cells);
    out.diffusion.resize(grid.n_cells);
    for (std::size_t j = 0; j < grid.n_cells; ++j) {
        const DriftDiffusion dd = drift_diffusion(grid.center(j), gd, params.sigma, mode);
        out.drift[j] = dd.mu;
        out.diffusion[j] = dd.s * dd.s;
    }
    return out;
}

double admissible_fpe_dt(double n_fixed, const Grid1D& grid, const RegionParams& params,
                         DriftMode mode)
{
    const GammaDelta gd = nondegenerate_band(params, n_fixed);
    const FpeCoefficients c = fpe_coefficients_1d(n_fixed, grid, params, mode);
    double max_s2 = 0.0;
    for (double v : c.diffusion) {
        max_s2 = std::max(max_s2, v);
    }
    double max_mu = 0.0;
    for (double v : face_drifts(gd, grid, params.sigma, mode)) {
        max_mu = std::max(max_mu, std::fabs(v));
    }
    const double h = grid.spacing();
    double dt = std::numeric_limits<double>::infinity();
    if (max_s2 > 0.0) {
        dt = std::min(dt, 0.4 * h * h / max_s2);
    }
    if (max_mu > 0.0) {
        dt = std::min(dt, 0.5 * h / max_mu);
    }
    return dt;
}

std::vector<double> fpe_operator_1d(const std::vector<double>& density,
                                    const std::vector<double>& face_drift,
                                    const std::vector<double>& diffusion, double h)
{
    const std::size_t m = density.size();
    std::vector<double> out(m, 0.0);
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double mu = face_drift[j];
        const double advective = mu > 0.0 ? mu * density[j] : mu * density[j + 1];
        const double diffusive =
            -(diffusion[j + 1] * density[j + 1] - diffusion[j] * density[j]) / (2.0 * h);
        const double flux = advective + diffusive;
        out[j] -= flux / h;
        out[j + 1] += flux / h;
    }
    return out;
}

FpeSolution solve_fpe_1d(const DensityField& initial, const Grid1D& grid, double n_fixed,
                         const RegionParams& params, const std::vector<double>& snapshot_times,
                         double dt_pde, DriftMode mode)
{
    if (initial.values.size() != grid.n_cells) {
        throw ConfigError("solve_fpe_1d: initial density does not match the grid");
    }
    if (std::fabs(initial.mass(grid) - 1.0) > 1e-6) {
        throw ConfigError("solve_fpe_1d: initial mass must be 1");
    }
    if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end()) ||
        (!snapshot_times.empty() && snapshot_times.front() < initial.t)) {
        throw ConfigError("solve_fpe_1d: snapshot times must ascend from the initial time");
    }
    const double dt_max = admissible_fpe_dt(n_fixed, grid, params, mode);
    if (!(dt_pde > 0.0) || dt_pde > dt_max) {
        std::ostringstream os;
        os << "solve_fpe_1d: dt_pde = " << dt_pde << " violates the stability limit; use dt <= "
           << dt_max;
        throw NumericalError(os.str());
    }

    const GammaDelta gd = nondegenerate_band(params, n_fixed);
    const std::vector<double> mu = face_drifts(gd, grid, params.sigma, mode);
    const std::vector<double> s2 = fpe_coefficients_1d(n_fixed, grid, params, mode).diffusion;
    const double h = grid.spacing();

    FpeSolution out;
    out.grid = grid;
    DensityField p = initial;
    for (double target : snapshot_times) {
        while (p.t < target) {
            const double remaining = target - p.t;
            // Absorb a sliver below 1e-9 of a step into the current step.
            const double dt = remaining <= dt_pde * (1.0 + 1e-9) ? remaining : dt_pde;
            const std::vector<double> rate = fpe_operator_1d(p.values, mu, s2, h);
            bool negative = false;
            for (std::size_t j = 0; j < grid.n_cells; ++j) {
                p.values[j] += dt * rate[j];
                if (p.values[j] < 0.0) {
                    p.values[j] = 0.0;
                    negative = true;
                }
            }
            if (negative) {
                const double m = p.mass(grid);
                for (double& v : p.values) {
                    v /= m;
                }
                ++out.renormalizations;
            }
            p.t = dt == remaining ? target : p.t + dt;
            ++out.steps;
            const double err = std::fabs(p.mass(grid) - 1.0);
            out.max_mass_error = std::max(out.max_mass_error, err);
            if (!std::isfinite(err) || err > 1e-6) {
                throw NumericalError("solve_fpe_1d: mass drifted from 1", out.steps);
            }
        }
        out.snapshots.push_back(p);
    }
    return out;
}

std::vector<double> bin_masses(const DensityField& density, const Grid1D& grid,
                               const std::vector<double>& edges)
{
    if (edges.size() < 2) {
        throw ConfigError("bin_masses: need at least two edges");
    }
    std::vector<double> out(edges.size() - 1, 0.0);
    const double h = grid.spacing();
    for (std::size_t j = 0; j < grid.n_cells; ++j) {
        const double a = grid.face(j);
        const double b = a + h;
        for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
            const double overlap = std::min(b, edges[k + 1]) - std::max(a, edges[k]);
            if (overlap > 0.0) {
                out[k] += density.values[j] * overlap;
            }
        }
    }
    return out;
}

std::vector<double> fpe_residual_full(const std::vector<double>& density, const Grid3D& grid,
                                      const RegionParams& params, double q_raw, DriftMode mode)
{
    check_uniform_axis(grid.n, "n");
    check_uniform_axis(grid.z, "z");
    check_uniform_axis(grid.n_buf, "n_buf");
    if (density.size() != grid.size()) {
        throw ConfigError("fpe_residual_full: density size does not match the grid");
    }
    const std::size_t nn = grid.n.size();
    const std::size_t nz = grid.z.size();
    const std::size_t nb = grid.n_buf.size();
    const double hn = grid.n[1] - grid.n[0];
    const double hz = grid.z[1] - grid.z[0];
    const double hb = grid.n_buf[1] - grid.n_buf[0];

    // Node coefficients: drift of n and n_buf, and z diffusion.
    std::vector<double> fn(grid.size(), 0.0);
    std::vector<double> fb(grid.size(), 0.0);
    std::vector<double> s2(grid.size(), 0.0);
    const std::vector<RegionParams> ps{params};
    const TransferMatrix theta{{1.0}};
    for (std::size_t i = 0; i < nn; ++i) {
        const double n = std::clamp(grid.n[i], 0.0, params.n_jam());
        const GammaDelta gd = gamma_delta(params.boundary, n);
        for (std::size_t j = 0; j < nz; ++j) {
            const bool inside = !gd.degenerate && grid.z[j] > gd.gamma_minus &&
                                grid.z[j] < gd.gamma_plus;
            for (std::size_t k = 0; k < nb; ++k) {
                const std::size_t idx = grid.index(i, j, k);
                if (!inside) {
                    continue;
                }
                const RegionState st{n, {n}, grid.z[j], grid.n_buf[k], 0.0};
                const RegionDrift d = drift_vector({st}, ps, theta, {q_raw}, mode)[0];
                fn[idx] = d.dn;
                fb[idx] = d.dn_buf;
                s2[idx] = d.s_z * d.s_z;
            }
        }
    }

    std::vector<double> out(grid.size(), 0.0);
    // n and n_buf: centered face fluxes, zero on the outer faces.
    for (std::size_t i = 0; i + 1 < nn; ++i) {
        for (std::size_t j = 0; j < nz; ++j) {
            for (std::size_t k = 0; k < nb; ++k) {
                const std::size_t a = grid.index(i, j, k);
                const std::size_t b = grid.index(i + 1, j, k);
                const double flux = 0.5 * (fn[a] * density[a] + fn[b] * density[b]);
                out[a] -= flux / hn;
                out[b] += flux / hn;
            }
        }
    }
    for (std::size_t i = 0; i < nn; ++i) {
        for (std::size_t j = 0; j < nz; ++j) {
            for (std::size_t k = 0; k + 1 < nb; ++k) {
                const std::size_t a = grid.index(i, j, k);
                const std::size_t b = grid.index(i, j, k + 1);
                const double flux = 0.5 * (fb[a] * density[a] + fb[b] * density[b]);
                out[a] -= flux / hb;
                out[b] += flux / hb;
            }
        }
    }
    // z: the same operator as the 1-D solver, with drift at the face midpoints.
    std::vector<double> line(nz);
    std::vector<double> diff(nz);
    std::vector<double> mu(nz - 1);
    for (std::size_t i = 0; i < nn; ++i) {
        const double n = std::clamp(grid.n[i], 0.0, params.n_jam());
        const GammaDelta gd = gamma_delta(params.boundary, n);
        for (std::size_t j = 0; j + 1 < nz; ++j) {
            const double zf = 0.5 * (grid.z[j] + grid.z[j + 1]);
            const bool inside = !gd.degenerate && zf > gd.gamma_minus && zf < gd.gamma_plus;
            mu[j] = inside ? drift_diffusion(zf, gd, params.sigma, mode).mu : 0.0;
        }
        for (std::size_t k = 0; k < nb; ++k) {
            for (std::size_t j = 0; j < nz; ++j) {
                line[j] = density[grid.index(i, j, k)];
                diff[j] = s2[grid.index(i, j, k)];
            }
            const std::vector<double> rate = fpe_operator_1d(line, mu, diff, hz);
            for (std::size_t j = 0; j < nz; ++j) {
                out[grid.index(i, j, k)] += rate[j];
            }
        }
    }
    return out;
}

}  // namespace mfdrift

#include "mfdrift/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfdrift/error.hpp"

namespace mfdrift {

double effective_inflow(double n_buf, double n, double q_raw, const RegionParams& p)
{
    const double gate_buf = psi(n_buf, p.m_soft);
    const double gate_jam = std::max(psi(p.n_jam() - n, p.m_soft), 0.0);
    return (p.q_max * gate_buf + q_raw * (1.0 - gate_buf)) * gate_jam;
}

std::vector<double> outflow_split(const RegionState& state, double g_realized)
{
    std::vector<double> out(state.n_by_dest.size(), 0.0);
    if (!(state.n > 0.0)) {
        return out;
    }
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = state.n_by_dest[j] / state.n * g_realized;
    }
    return out;
}

double realized_exit_flow(const RegionState& state, const RegionParams& p)
{
    const double n = std::clamp(state.n, 0.0, p.n_jam());
    return characteristic_curves(p.boundary, n).g_mi + state.z;
}

std::vector<RegionDrift> drift_vector(const std::vector<RegionState>& states,
                                      const std::vector<RegionParams>& params,
                                      const TransferMatrix& theta,
                                      const std::vector<double>& q_raw, DriftMode mode)
{
    const std::size_t r = states.size();
    if (params.size() != r || theta.size() != r || q_raw.size() != r) {
        throw ConfigError("drift_vector: states, params, theta and demand sizes differ");
    }
    std::vector<RegionDrift> out(r);
    std::vector<std::vector<double>> split(r);
    for (std::size_t i = 0; i < r; ++i) {
        if (states[i].n_by_dest.size() != r || theta[i].size() != r) {
            throw ConfigError("drift_vector: per-destination vectors must match the region count");
        }
        const RegionParams& p = params[i];
        const double n = std::clamp(states[i].n, 0.0, p.n_jam());
        const GammaDelta gd = gamma_delta(p.boundary, n);
        const DriftDiffusion dd = drift_diffusion(states[i].z, gd, p.sigma, mode);
        RegionDrift& d = out[i];
        d.g = std::max(realized_exit_flow(states[i], p), 0.0);
        d.mu_z = dd.mu;
        d.s_z = dd.s;
        d.q_in = effective_inflow(states[i].n_buf, n, q_raw[i], p);
        d.dn_buf = q_raw[i] - d.q_in;
        split[i] = outflow_split(states[i], d.g);
        d.dn_by_dest.assign(r, 0.0);
        for (std::size_t j = 0; j < r; ++j) {
            d.dn_by_dest[j] = d.q_in * theta[i][j] - split[i][j];
            if (j != i) {
                d.transfer_out += split[i][j];
            }
        }
    }
    // Single-hop routing: arrivals from k join the receiver's internal bucket.
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t k = 0; k < r; ++k) {
            if (k != i) {
                out[i].transfer_in += split[k][i];
            }
        }
        out[i].dn_by_dest[i] += out[i].transfer_in;
        double dn = 0.0;
        for (double v : out[i].dn_by_dest) {
            dn += v;
        }
        out[i].dn = dn;
    }
    return out;
}

std::vector<double> diffusion_vector(const std::vector<RegionState>& states,
                                     const std::vector<RegionParams>& params)
{
    if (params.size() != states.size()) {
        throw ConfigError("diffusion_vector: states and params sizes differ");
    }
    std::vector<double> out(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double n = std::clamp(states[i].n, 0.0, params[i].n_jam());
        const GammaDelta gd = gamma_delta(params[i].boundary, n);
        out[i] = drift_diffusion(states[i].z, gd, params[i].sigma, DriftMode::ito_correct).s;
    }
    return out;
}

void validate_transfer_matrix(const TransferMatrix& theta, std::size_t regions,
                              const std::string& field_path)
{
    if (theta.size() != regions) {
        throw ConfigError(field_path, "expected " + std::to_string(regions) + " rows, got " +
                                          std::to_string(theta.size()));
    }
    for (std::size_t i = 0; i < regions; ++i) {
        const std::string row_path = field_path + "/" + std::to_string(i);
        if (theta[i].size() != regions) {
            throw ConfigError(row_path, "expected " + std::to_string(regions) + " columns");
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < regions; ++j) {
            if (!(theta[i][j] >= 0.0) || !std::isfinite(theta[i][j])) {
                throw ConfigError(row_path + "/" + std::to_string(j), "shares must be >= 0");
            }
            sum += theta[i][j];
        }
        if (std::fabs(sum - 1.0) > 1e-9) {
            std::ostringstream os;
            os << "row must sum to 1, sums to " << sum;
            throw ConfigError(row_path, os.str());
        }
    }
}

void validate_region(const RegionParams& p, const std::string& field_path)
{
    if (!(p.sigma >= 0.0) || !std::isfinite(p.sigma)) {
        throw ConfigError(field_path + "/sigma", "must be >= 0");
    }
    if (!(p.q_max > 0.0) || !std::isfinite(p.q_max)) {
        throw ConfigError(field_path + "/q_max", "must be > 0");
    }
    if (!(p.m_soft > 0.0) || !std::isfinite(p.m_soft)) {
        throw ConfigError(field_path + "/m_soft", "must be > 0");
    }
    validate_boundary(p.boundary, field_path + "/boundary");
}

}  // namespace mfdrift

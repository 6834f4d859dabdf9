#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mfdrift/demand.hpp"
#include "mfdrift/network.hpp"
#include "mfdrift/rng.hpp"

namespace mfdrift {

enum class IntegrationMode { euler_on_z, latent_w };

const char* to_string(IntegrationMode mode);
IntegrationMode integration_mode_from_string(const std::string& text);

struct SimConfig
{
    double dt = 0.5;
    double horizon = 5000.0;
    std::size_t n_paths = 1000;
    std::uint64_t master_seed = 42;
    IntegrationMode integration_mode = IntegrationMode::latent_w;
    DriftMode drift_mode = DriftMode::ito_correct;
    std::size_t record_stride = 10;
};

struct InitialState
{
    double n = 0.0;
    double z = 0.0;
    double n_buf = 0.0;
};

/// Everything that defines the dynamics, independent of run settings.
struct Model
{
    std::vector<RegionParams> regions;
    TransferMatrix theta;
    std::vector<DemandProfile> demand;
    std::vector<InitialState> initial;
};

struct Sample
{
    double n = 0.0;
    double z = 0.0;
    double g = 0.0;
    double n_buf = 0.0;
    double q_in = 0.0;
};

/// Integrated flows of one region over a path. Before clamping,
/// inflow - outflow + transfer_in = delta_n and raw_demand - inflow = delta_buf
/// hold step by step; the clamp terms hold whatever the clamps added.
struct FlowAudit
{
    double raw_demand = 0.0;
    double inflow = 0.0;
    double outflow = 0.0;
    double transfer_in = 0.0;
    double delta_n = 0.0;
    double delta_buf = 0.0;
    double clamp_n = 0.0;
    double clamp_buf = 0.0;

    double throughput() const noexcept { return raw_demand + inflow + transfer_in; }
    double flow_residual() const noexcept
    {
        return inflow - outflow + transfer_in + clamp_n - delta_n;
    }
    double buffer_residual() const noexcept { return raw_demand - inflow + clamp_buf - delta_buf; }
};

struct PathRecord
{
    std::size_t path_id = 0;
    std::uint64_t seed = 0;  ///< key of the path's random stream
    std::size_t regions = 0;
    std::vector<double> t;
    std::vector<Sample> samples;  ///< time-major: samples[k * regions + r]
    std::vector<FlowAudit> audit;

    const Sample& at(std::size_t k, std::size_t r) const { return samples[k * regions + r]; }
};

struct EnsembleResult
{
    std::vector<PathRecord> paths;
    std::size_t regions = 0;
    std::string fingerprint;
    std::uint64_t master_seed = 0;
};

/// Initial states: n split across destinations by theta rows, w placed so
/// that transform(w) reproduces z (for a degenerate band, the latent value
/// that yields z = 0 once the band opens).
std::vector<RegionState> initial_states(const Model& model);

/// Per-step bookkeeping filled by the step functions when non-null.
struct StepAudit
{
    std::vector<RegionDrift> drift;
    std::vector<double> clamp_n;
    std::vector<double> clamp_buf;
};

/// One Euler step on (n, n_by_dest, z, n_buf). z is clamped to
/// [gamma_minus + eps, gamma_plus - eps] at the new n, eps = 1e-6 * delta_minus,
/// and w is resynchronised from z.
std::vector<RegionState> step_euler(const std::vector<RegionState>& states, const Model& model,
                                    const std::vector<double>& q_raw, double dt,
                                    const std::vector<double>& xi, DriftMode mode,
                                    StepAudit* audit = nullptr);

/// One step with exact latent update w += sigma sqrt(dt) xi and z rebuilt
/// from w at the new n.
std::vector<RegionState> step_latent(const std::vector<RegionState>& states, const Model& model,
                                     const std::vector<double>& q_raw, double dt,
                                     const std::vector<double>& xi, DriftMode mode,
                                     StepAudit* audit = nullptr);

std::size_t step_count(const SimConfig& sim);

PathRecord run_path(const Model& model, const SimConfig& sim, std::size_t path_id);

/// Path k draws from SeedTree(master_seed).child("path", k). Threads are
/// capped by MFDRIFT_THREADS; output does not depend on the thread count.
EnsembleResult run_ensemble(const Model& model, const SimConfig& sim);

/// Number of worker threads honouring MFDRIFT_THREADS.
std::size_t worker_threads();

/// Euler-Maruyama samples of Z with n held fixed, for the requested times
/// (ascending). result[i][s] is sample s at times[i].
std::vector<std::vector<double>> sample_frozen_variation(const RegionParams& params, double n_fixed,
                                                         double z0, const std::vector<double>& times,
                                                         double dt, std::size_t n_samples,
                                                         DriftMode mode, std::uint64_t seed);

}  // namespace mfdrift

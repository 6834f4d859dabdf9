#include "mfdrift/integrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

#include "mfdrift/error.hpp"

namespace mfdrift {

namespace {

double clamp_into_band(double z, const GammaDelta& gd)
{
    const double eps = 1e-6 * gd.delta_minus;
    return std::clamp(z, gd.gamma_minus + eps, gd.gamma_plus - eps);
}

std::vector<RegionState> advance(const std::vector<RegionState>& states, const Model& model,
                                 const std::vector<double>& q_raw, double dt,
                                 const std::vector<double>& xi, DriftMode drift_mode,
                                 IntegrationMode mode, StepAudit* audit)
{
    const std::size_t r = states.size();
    if (xi.size() != r) {
        throw ConfigError("step: expected one normal draw per region");
    }
    auto drift = drift_vector(states, model.regions, model.theta, q_raw, drift_mode);
    std::vector<RegionState> next = states;
    std::vector<double> clamp_n(r, 0.0);
    std::vector<double> clamp_buf(r, 0.0);
    const double sqrt_dt = std::sqrt(dt);
    for (std::size_t i = 0; i < r; ++i) {
        const RegionParams& p = model.regions[i];
        const RegionState& s = states[i];
        RegionDrift& d = drift[i];
        RegionState& ns = next[i];

        // Discrete gates: one step never discharges more than the buffer
        // holds, and never carries n past n_jam. Held-back demand stays in
        // the buffer.
        const double buffer_short = -(s.n_buf + dt * d.dn_buf);
        const double overshoot = s.n + dt * d.dn - p.n_jam();
        const double excess = std::max(buffer_short, overshoot);
        if (excess > 0.0 && d.q_in > 0.0) {
            const double cut = std::min(d.q_in, excess / dt);
            d.q_in -= cut;
            d.dn_buf += cut;
            d.dn -= cut;
            for (std::size_t j = 0; j < r; ++j) {
                d.dn_by_dest[j] -= cut * model.theta[i][j];
            }
        }

        double total = 0.0;
        for (std::size_t j = 0; j < r; ++j) {
            double v = s.n_by_dest[j] + dt * d.dn_by_dest[j];
            if (v < 0.0) {
                clamp_n[i] -= v;
                v = 0.0;
            }
            ns.n_by_dest[j] = v;
            total += v;
        }
        if (total > p.n_jam()) {
            const double scale = p.n_jam() / total;
            for (double& v : ns.n_by_dest) {
                v *= scale;
            }
        }
        ns.n = 0.0;
        for (double v : ns.n_by_dest) {
            ns.n += v;
        }
        if (total > p.n_jam()) {
            clamp_n[i] += ns.n - total;
        }

        ns.n_buf = s.n_buf + dt * d.dn_buf;
        if (ns.n_buf < 0.0) {
            clamp_buf[i] = -ns.n_buf;
            ns.n_buf = 0.0;
        }

        const GammaDelta gd_new = gamma_delta(p.boundary, std::min(ns.n, p.n_jam()));
        if (gd_new.degenerate) {
            ns.z = 0.0;
            ns.w = s.w;
            continue;
        }
        if (mode == IntegrationMode::latent_w) {
            ns.w = step_latent_w(s.w, p.sigma, dt, xi[i]);
            ns.z = transform_w_to_z(ns.w, gd_new);
        } else {
            const GammaDelta gd_old = gamma_delta(p.boundary, std::clamp(s.n, 0.0, p.n_jam()));
            double z = gd_old.degenerate ? 0.0 : s.z + d.mu_z * dt + d.s_z * sqrt_dt * xi[i];
            if (!std::isfinite(z)) {
                ns.z = z;
                continue;
            }
            ns.z = clamp_into_band(z, gd_new);
            ns.w = inverse_transform(ns.z, gd_new);
        }
    }
    if (audit != nullptr) {
        audit->drift = std::move(drift);
        audit->clamp_n = std::move(clamp_n);
        audit->clamp_buf = std::move(clamp_buf);
    }
    return next;
}

Sample make_sample(const RegionState& s, const RegionParams& p, double q_raw)
{
    Sample out;
    out.n = s.n;
    out.z = s.z;
    out.g = realized_exit_flow(s, p);
    out.n_buf = s.n_buf;
    out.q_in = effective_inflow(s.n_buf, std::min(s.n, p.n_jam()), q_raw, p);
    return out;
}

}  // namespace

const char* to_string(IntegrationMode mode)
{
    return mode == IntegrationMode::latent_w ? "latent" : "euler";
}

IntegrationMode integration_mode_from_string(const std::string& text)
{
    if (text == "latent" || text == "latent_w") {
        return IntegrationMode::latent_w;
    }
    if (text == "euler" || text == "euler_on_z") {
        return IntegrationMode::euler_on_z;
    }
    throw ConfigError("integration_mode", "expected 'euler' or 'latent', got '" + text + "'");
}

std::vector<RegionState> initial_states(const Model& model)
{
    const std::size_t r = model.regions.size();
    std::vector<RegionState> out(r);
    for (std::size_t i = 0; i < r; ++i) {
        const RegionParams& p = model.regions[i];
        const InitialState init = i < model.initial.size() ? model.initial[i] : InitialState{};
        const std::string path = "initial/" + std::to_string(i);
        if (!(init.n >= 0.0 && init.n <= p.n_jam())) {
            throw ConfigError(path + "/n", "must lie in [0, n_jam]");
        }
        if (!(init.n_buf >= 0.0)) {
            throw ConfigError(path + "/n_buf", "must be >= 0");
        }
        RegionState& s = out[i];
        s.n_by_dest.assign(r, 0.0);
        for (std::size_t j = 0; j < r; ++j) {
            s.n_by_dest[j] = init.n * model.theta[i][j];
        }
        s.n = 0.0;
        for (double v : s.n_by_dest) {
            s.n += v;
        }
        s.n_buf = init.n_buf;
        const GammaDelta gd = gamma_delta(p.boundary, s.n);
        if (gd.degenerate) {
            if (init.z != 0.0) {
                throw ConfigError(path + "/z", "must be 0 where the band is degenerate");
            }
            s.z = 0.0;
            s.w = latent_for_fraction(p.boundary.eta);
        } else {
            if (!(init.z > gd.gamma_minus && init.z < gd.gamma_plus)) {
                throw ConfigError(path + "/z", "must lie strictly inside the band");
            }
            s.z = init.z;
            s.w = inverse_transform(init.z, gd);
        }
    }
    return out;
}

std::vector<RegionState> step_euler(const std::vector<RegionState>& states, const Model& model,
                                    const std::vector<double>& q_raw, double dt,
                                    const std::vector<double>& xi, DriftMode mode, StepAudit* audit)
{
    return advance(states, model, q_raw, dt, xi, mode, IntegrationMode::euler_on_z, audit);
}

std::vector<RegionState> step_latent(const std::vector<RegionState>& states, const Model& model,
                                     const std::vector<double>& q_raw, double dt,
                                     const std::vector<double>& xi, DriftMode mode, StepAudit* audit)
{
    return advance(states, model, q_raw, dt, xi, mode, IntegrationMode::latent_w, audit);
}

std::size_t step_count(const SimConfig& sim)
{
    return static_cast<std::size_t>(std::floor(sim.horizon / sim.dt + 1e-9));
}

PathRecord run_path(const Model& model, const SimConfig& sim, std::size_t path_id)
{
    if (!(sim.dt > 0.0) || !(sim.horizon >= 0.0) || sim.record_stride == 0) {
        throw ConfigError("sim", "need dt > 0, horizon >= 0 and record_stride >= 1");
    }
    const std::size_t r = model.regions.size();
    const SeedTree tree = SeedTree(sim.master_seed).child("path", path_id);
    RandomStream stream = tree.stream();

    PathRecord rec;
    rec.path_id = path_id;
    rec.seed = tree.key();
    rec.regions = r;
    rec.audit.assign(r, FlowAudit{});

    auto states = initial_states(model);
    const auto start = states;
    const std::size_t steps = step_count(sim);
    const std::size_t n_rec = steps / sim.record_stride + 2;
    rec.t.reserve(n_rec);
    rec.samples.reserve(n_rec * r);

    std::vector<double> q_raw(r);
    std::vector<double> xi(r);
    StepAudit audit;
    auto record = [&](double t) {
        rec.t.push_back(t);
        for (std::size_t i = 0; i < r; ++i) {
            rec.samples.push_back(make_sample(states[i], model.regions[i], q_raw[i]));
        }
    };
    auto demand_at = [&](double t) {
        for (std::size_t i = 0; i < r; ++i) {
            q_raw[i] = eval_demand(model.demand[i], t);
        }
    };

    demand_at(0.0);
    record(0.0);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * sim.dt;
        demand_at(t);
        for (std::size_t i = 0; i < r; ++i) {
            xi[i] = stream.standard_normal();
        }
        states = advance(states, model, q_raw, sim.dt, xi, sim.drift_mode, sim.integration_mode,
                         &audit);
        for (std::size_t i = 0; i < r; ++i) {
            const RegionState& s = states[i];
            if (!std::isfinite(s.n) || !std::isfinite(s.z) || !std::isfinite(s.n_buf)) {
                std::ostringstream os;
                os << "non-finite state in region " << i << " at t = " << t + sim.dt;
                throw NumericalError(os.str(), k);
            }
            FlowAudit& a = rec.audit[i];
            const RegionDrift& d = audit.drift[i];
            a.raw_demand += q_raw[i] * sim.dt;
            a.inflow += d.q_in * sim.dt;
            a.outflow += d.g * sim.dt;
            a.transfer_in += d.transfer_in * sim.dt;
            a.clamp_n += audit.clamp_n[i];
            a.clamp_buf += audit.clamp_buf[i];
        }
        const std::size_t done = k + 1;
        if (done % sim.record_stride == 0 || done == steps) {
            demand_at(static_cast<double>(done) * sim.dt);
            record(static_cast<double>(done) * sim.dt);
        }
    }
    for (std::size_t i = 0; i < r; ++i) {
        rec.audit[i].delta_n = states[i].n - start[i].n;
        rec.audit[i].delta_buf = states[i].n_buf - start[i].n_buf;
    }
    return rec;
}

std::size_t worker_threads()
{
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MFDRIFT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) {
            n = static_cast<std::size_t>(v);
        }
    }
    return n;
}

EnsembleResult run_ensemble(const Model& model, const SimConfig& sim)
{
    if (sim.n_paths == 0) {
        throw ConfigError("sim/n_paths", "must be >= 1");
    }
    EnsembleResult out;
    out.regions = model.regions.size();
    out.master_seed = sim.master_seed;
    out.paths.resize(sim.n_paths);

    std::atomic<std::size_t> next{0};
    std::mutex fail_mutex;
    std::vector<std::pair<std::size_t, std::string>> failures;
    auto worker = [&] {
        for (std::size_t k = next++; k < sim.n_paths; k = next++) {
            try {
                out.paths[k] = run_path(model, sim, k);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                failures.emplace_back(k, e.what());
            }
        }
    };
    const std::size_t n_threads = std::min(worker_threads(), sim.n_paths);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (!failures.empty()) {
        std::sort(failures.begin(), failures.end());
        std::ostringstream os;
        os << failures.size() << " path(s) failed:";
        for (std::size_t i = 0; i < failures.size() && i < 10; ++i) {
            os << " [" << failures[i].first << "] " << failures[i].second << ";";
        }
        throw NumericalError(os.str());
    }
    return out;
}

std::vector<std::vector<double>> sample_frozen_variation(const RegionParams& params, double n_fixed,
                                                         double z0, const std::vector<double>& times,
                                                         double dt, std::size_t n_samples,
                                                         DriftMode mode, std::uint64_t seed)
{
    const GammaDelta gd = gamma_delta(params.boundary, n_fixed);
    if (gd.degenerate) {
        throw DomainError("sample_frozen_variation: degenerate band at the fixed accumulation");
    }
    if (!(dt > 0.0) || !std::is_sorted(times.begin(), times.end())) {
        throw ConfigError("sample_frozen_variation: need dt > 0 and ascending times");
    }
    std::vector<std::vector<double>> out(times.size(), std::vector<double>(n_samples));
    std::vector<std::size_t> stop(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        stop[i] = static_cast<std::size_t>(std::llround(times[i] / dt));
    }
    const SeedTree tree(seed);
    const double sqrt_dt = std::sqrt(dt);
    for (std::size_t s = 0; s < n_samples; ++s) {
        RandomStream stream = tree.child("frozen", s).stream();
        double z = clamp_into_band(z0, gd);
        std::size_t step = 0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            for (; step < stop[i]; ++step) {
                const DriftDiffusion dd = drift_diffusion(z, gd, params.sigma, mode);
                z = clamp_into_band(z + dd.mu * dt + dd.s * sqrt_dt * stream.standard_normal(), gd);
            }
            out[i][s] = z;
        }
    }
    return out;
}

}  // namespace mfdrift

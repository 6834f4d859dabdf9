#include "mfdrift/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "mfdrift/error.hpp"
#include "mfdrift/rng.hpp"

namespace mfdrift {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

GammaDelta band_at(const RegionParams& p, double n)
{
    return gamma_delta(p.boundary, std::clamp(n, 0.0, p.n_jam()));
}

double g_mid(const RegionParams& p, double n)
{
    return characteristic_curves(p.boundary, std::clamp(n, 0.0, p.n_jam())).g_mi;
}

double clamp_into(double z, const GammaDelta& gd)
{
    if (gd.degenerate) {
        return 0.0;
    }
    const double eps = 1e-6 * gd.delta_minus;
    return std::clamp(z, gd.gamma_minus + eps, gd.gamma_plus - eps);
}

double log_normal_pdf(double x, const Gaussian& g)
{
    const double d = x - g.mean;
    return -0.5 * (std::log(2.0 * std::numbers::pi * g.variance) + d * d / g.variance);
}

/// Systematic resampling from one uniform; returns ancestor indices.
std::vector<std::size_t> systematic_resample(const std::vector<double>& weights, double u)
{
    const std::size_t m = weights.size();
    std::vector<std::size_t> out(m);
    double cumulative = weights[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double target = (static_cast<double>(i) + u) / static_cast<double>(m);
        while (target > cumulative && j + 1 < m) {
            cumulative += weights[++j];
        }
        out[i] = j;
    }
    return out;
}

struct WeightUpdate
{
    double log_increment = kNegInf;
    double relative_variance = 0.0;  ///< variance of the increments over their squared mean
};

/// Reweights normalised `weights` by exp(log_p) and renormalises; the
/// increment is log sum_i weights_i exp(log_p_i).
WeightUpdate update_weights(std::vector<double>& weights, const std::vector<double>& log_p)
{
    double max_lp = kNegInf;
    for (double v : log_p) {
        max_lp = std::max(max_lp, v);
    }
    WeightUpdate out;
    if (!std::isfinite(max_lp)) {
        return out;
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        mean += weights[i] * std::exp(log_p[i] - max_lp);
    }
    double second = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double r = std::exp(log_p[i] - max_lp);
        second += weights[i] * (r - mean) * (r - mean);
        weights[i] *= r / mean;
    }
    out.log_increment = max_lp + std::log(mean);
    out.relative_variance = second / (mean * mean);
    return out;
}

double effective_sample_size(const std::vector<double>& weights)
{
    double s = 0.0;
    for (double w : weights) {
        s += w * w;
    }
    return 1.0 / s;
}

struct IntervalMoments
{
    double var_i = 0.0;
    double cov = 0.0;  ///< between the integral and the end increment
    double var_dz = 0.0;
};

/// Noise moments of I = h sum_{i<m} (Z_i - zbar_i) and dZ = Z_m - zbar_m for
/// Euler steps of size h = dt / m with a constant diffusion s.
IntervalMoments interval_moments(double s, double dt, std::size_t m)
{
    IntervalMoments out;
    const double s2 = s * s;
    if (m == 0) {
        out.var_i = s2 * dt * dt * dt / 3.0;
        out.cov = 0.5 * s2 * dt * dt;
    } else {
        const double md = static_cast<double>(m);
        const double h = dt / md;
        out.var_i = s2 * h * h * h * (md - 1.0) * md * (2.0 * md - 1.0) / 6.0;
        out.cov = s2 * h * h * md * (md - 1.0) / 2.0;
    }
    out.var_dz = s2 * dt;
    return out;
}

/// Noise-free Euler path of (n, z) over one observation interval with the
/// drift and diffusion re-evaluated every substep and z clamped into the band
/// at the new n, as the integrator does. Frozen coefficients fail where the
/// band is born at n = 0 or drags a pinned particle along its edge, and a
/// linear n interpolation misses the exact flow balance a pinned particle
/// implies.
struct MeanPath
{
    double n_end = 0.0;
    double dz = 0.0;  ///< zbar_m - z
    double s2 = 0.0;  ///< mean squared diffusion over the substeps
};

/// Inflow at fraction f of the interval: linear between the records plus a
/// curvature term c f (f - 1) / 2 from the neighbouring record.
double inflow_at(double q0, double q1, double c, double f)
{
    return q0 + f * (q1 - q0) + 0.5 * c * f * (f - 1.0);
}

MeanPath mean_path(const RegionParams& p, double n0, double z, double q0, double q1, double c,
                   double sigma, DriftMode mode, double dt, std::size_t m)
{
    // The continuous limit is approximated on a fixed substep grid.
    const std::size_t steps = m == 0 ? 16 : m;
    const double h = dt / static_cast<double>(steps);
    MeanPath out;
    double n = std::clamp(n0, 0.0, p.n_jam());
    double zc = z;
    CharacteristicCurves cc = characteristic_curves(p.boundary, n);
    for (std::size_t j = 0; j < steps; ++j) {
        const double frac = static_cast<double>(j) / static_cast<double>(steps);
        const DriftDiffusion dd =
            drift_diffusion(zc, gamma_delta_from(cc, p.boundary.flow_floor), sigma, mode);
        out.s2 += dd.s * dd.s / static_cast<double>(steps);
        n = std::clamp(n + h * (inflow_at(q0, q1, c, frac) - cc.g_mi - zc), 0.0, p.n_jam());
        cc = characteristic_curves(p.boundary, n);
        zc = clamp_into(zc + dd.mu * h, gamma_delta_from(cc, p.boundary.flow_floor));
    }
    out.n_end = n;
    out.dz = zc - z;
    return out;
}

LikelihoodEstimate run_filter(const ObservationSeries& obs, const RegionParams& params,
                              double sigma, const LikelihoodOptions& opt)
{
    const std::size_t np = opt.n_particles;
    const double dt = obs.spacing();
    const SeedTree tree(opt.seed);
    LikelihoodEstimate est;

    // Initial particles spread uniformly across the band at n_0.
    std::vector<double> z(np);
    std::vector<double> z_prev(np);
    {
        const GammaDelta gd = band_at(params, obs.n[0]);
        RandomStream init = tree.child("init", 0).stream();
        for (std::size_t i = 0; i < np; ++i) {
            z[i] = clamp_into(gd.gamma_minus + init.uniform() * gd.delta_minus, gd);
            z_prev[i] = z[i];
        }
    }
    std::vector<double> weights(np, 1.0 / static_cast<double>(np));
    std::vector<double> log_p(np);
    std::vector<double> z_next(np);
    double var_sum = 0.0;

    for (std::size_t k = 1; k < obs.size(); ++k) {
        const double n0 = obs.n[k - 1];
        const double n1 = obs.n[k];
        const GammaDelta gd0 = band_at(params, n0);
        const GammaDelta gd1 = band_at(params, n1);
        const SeedTree step = tree.child("step", k);

        if (opt.scheme == FilterScheme::interval_adapted) {
            const auto& q = obs.q_in;
            double curv = 0.0;
            if (k + 1 < obs.size()) {
                curv = q[k + 1] - 2.0 * q[k] + q[k - 1];
            } else if (k >= 2) {
                curv = q[k] - 2.0 * q[k - 1] + q[k - 2];
            }
            // The curvature correction to the inflow integral doubles as the
            // quadrature error variance; it only matters where the noise
            // vanishes, as for a particle pinned to a band edge.
            double quad_err = 0.0;
            {
                const std::size_t steps = opt.substeps == 0 ? 16 : opt.substeps;
                for (std::size_t j = 0; j < steps; ++j) {
                    const double f = static_cast<double>(j) / static_cast<double>(steps);
                    quad_err += 0.5 * curv * f * (f - 1.0);
                }
                quad_err *= dt / static_cast<double>(steps);
            }
            for (std::size_t i = 0; i < np; ++i) {
                const MeanPath mp = mean_path(params, n0, z[i], q[k - 1], q[k], curv, sigma,
                                              opt.mode, dt, opt.substeps);
                // n1 = n_end - I with I = h sum_{i<m} (Z_i - zbar_i) the noise
                // part of the excursion, diffusion averaged along the path.
                const IntervalMoments mo = interval_moments(std::sqrt(mp.s2), dt, opt.substeps);
                const double i_obs = mp.n_end - n1;
                const double var_i = std::max(mo.var_i + quad_err * quad_err, opt.variance_floor);
                log_p[i] = log_normal_pdf(i_obs, {0.0, var_i});
                const double gain = mo.cov / var_i;
                const double mean = z[i] + mp.dz + gain * i_obs;
                const double var = std::max(mo.var_dz - gain * mo.cov, 0.0);
                RandomStream rs = step.child("particle", i).stream();
                z_next[i] = clamp_into(mean + std::sqrt(var) * rs.standard_normal(), gd1);
            }
        } else {
            for (std::size_t i = 0; i < np; ++i) {
                Gaussian tn = gd0.degenerate
                                  ? Gaussian{n0 + dt * (obs.q_in[k - 1] - g_mid(params, n0)), 0.0}
                                  : transition_n(n0, z_prev[i], obs.q_in[k - 1], params, sigma, dt,
                                                 opt.mode);
                tn.variance = std::max(tn.variance, opt.variance_floor);
                log_p[i] = log_normal_pdf(n1, tn);
                RandomStream rs = step.child("particle", i).stream();
                double zn = 0.0;
                if (!gd0.degenerate) {
                    const Gaussian tz = transition_z(n0, z[i], params, sigma, dt, opt.mode);
                    zn = tz.mean + std::sqrt(tz.variance) * rs.standard_normal();
                }
                z_next[i] = clamp_into(zn, gd1);
            }
        }

        const WeightUpdate wu = update_weights(weights, log_p);
        if (!std::isfinite(wu.log_increment)) {
            est.log_likelihood = kNegInf;
            est.failed_step = k;
            return est;
        }
        est.log_likelihood += wu.log_increment;
        var_sum += wu.relative_variance;

        if (opt.scheme == FilterScheme::lagged_bootstrap) {
            z_prev = z;
        }
        z.swap(z_next);
        if (effective_sample_size(weights) < 0.5 * static_cast<double>(np)) {
            RandomStream rs = step.child("resample", 0).stream();
            const auto anc = systematic_resample(weights, rs.uniform());
            std::vector<double> z_r(np);
            std::vector<double> zp_r(np);
            for (std::size_t i = 0; i < np; ++i) {
                z_r[i] = z[anc[i]];
                zp_r[i] = z_prev[anc[i]];
            }
            z.swap(z_r);
            z_prev.swap(zp_r);
            std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(np));
            ++est.resamples;
        }
    }
    est.std_error = std::sqrt(var_sum / static_cast<double>(np));
    return est;
}

}  // namespace

double ObservationSeries::spacing() const
{
    return t.size() < 2 ? 0.0 : (t.back() - t.front()) / static_cast<double>(t.size() - 1);
}

void validate_observations(const ObservationSeries& obs)
{
    if (obs.n.size() != obs.t.size() || obs.q_in.size() != obs.t.size()) {
        throw ConfigError("observations", "t, n and q_in must have the same length");
    }
    if (obs.size() < 10) {
        throw ConfigError("observations", "need at least 10 points");
    }
    const double dt = obs.spacing();
    if (!(dt > 0.0)) {
        throw ConfigError("observations/t", "timestamps must increase");
    }
    for (std::size_t k = 1; k < obs.size(); ++k) {
        if (std::fabs(obs.t[k] - obs.t[k - 1] - dt) > 1e-9 * dt) {
            std::ostringstream os;
            os << "spacing is not uniform at row " << k;
            throw ConfigError("observations/t", os.str());
        }
    }
    for (std::size_t k = 0; k < obs.size(); ++k) {
        if (!std::isfinite(obs.n[k]) || obs.n[k] < 0.0 || !std::isfinite(obs.q_in[k]) ||
            obs.q_in[k] < 0.0) {
            std::ostringstream os;
            os << "n and q_in must be finite and >= 0 (row " << k << ")";
            throw ConfigError("observations", os.str());
        }
    }
}

void assume_constant_inflow(ObservationSeries& obs, double q_in)
{
    obs.q_in.assign(obs.t.size(), q_in);
    obs.inflow_assumed = true;
}

ObservationSeries observations_from_path(const PathRecord& path, std::size_t region,
                                         std::size_t stride)
{
    if (region >= path.regions || stride == 0) {
        throw ConfigError("observations_from_path: bad region index or stride");
    }
    ObservationSeries out;
    for (std::size_t k = 0; k < path.t.size(); k += stride) {
        // The trailing record at the horizon may break uniform spacing.
        if (k > 0 && out.t.size() >= 2) {
            const double dt = out.t[1] - out.t[0];
            if (std::fabs(path.t[k] - out.t.back() - dt) > 1e-9 * dt) {
                break;
            }
        }
        const Sample& s = path.at(k, region);
        out.t.push_back(path.t[k]);
        out.n.push_back(s.n);
        out.q_in.push_back(s.q_in);
    }
    return out;
}

Gaussian transition_z(double n_prev, double z_prev, const RegionParams& params, double sigma,
                      double dt, DriftMode mode)
{
    const GammaDelta gd = band_at(params, n_prev);
    if (gd.degenerate) {
        throw DomainError("transition_z: degenerate band at n_prev");
    }
    const DriftDiffusion dd = drift_diffusion(z_prev, gd, sigma, mode);
    return {z_prev + dt * dd.mu, dd.s * dd.s * dt};
}

Gaussian transition_n(double n_prev, double z_lag, double q_in_prev, const RegionParams& params,
                      double sigma, double dt, DriftMode mode)
{
    const GammaDelta gd = band_at(params, n_prev);
    if (gd.degenerate) {
        throw DomainError("transition_n: degenerate band at n_prev");
    }
    const DriftDiffusion dd = drift_diffusion(z_lag, gd, sigma, mode);
    const double z_mean = z_lag + dt * dd.mu;
    return {n_prev + dt * (q_in_prev - g_mid(params, n_prev) - z_mean), dd.s * dd.s * dt * dt * dt};
}

const char* to_string(FilterScheme scheme)
{
    return scheme == FilterScheme::interval_adapted ? "interval_adapted" : "lagged_bootstrap";
}

FilterScheme filter_scheme_from_string(const std::string& text)
{
    if (text == "interval_adapted") {
        return FilterScheme::interval_adapted;
    }
    if (text == "lagged_bootstrap") {
        return FilterScheme::lagged_bootstrap;
    }
    throw ConfigError("filter scheme must be 'interval_adapted' or 'lagged_bootstrap', got '" +
                      text + "'");
}

LikelihoodEstimate log_likelihood(const ObservationSeries& obs, const RegionParams& params,
                                  double sigma, const LikelihoodOptions& options)
{
    validate_observations(obs);
    if (options.n_particles < 100) {
        throw ConfigError("likelihood/n_particles", "need at least 100 particles");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError("log_likelihood: sigma must be > 0");
    }
    return run_filter(obs, params, sigma, options);
}

CalibrationResult calibrate(const ObservationSeries& obs, const RegionParams& params,
                            const SwarmSettings& search, const LikelihoodOptions& likelihood)
{
    validate_observations(obs);
    if (!(search.sigma_lo > 0.0) || !(search.sigma_hi > search.sigma_lo)) {
        throw ConfigError("search", "need 0 < sigma_lo < sigma_hi");
    }
    if (search.population < 10) {
        throw ConfigError("search/population", "need at least 10 particles");
    }
    const double lo = std::log(search.sigma_lo);
    const double hi = std::log(search.sigma_hi);

    CalibrationResult result;
    result.search = search;
    result.likelihood = likelihood;
    result.inflow_assumed = obs.inflow_assumed;

    struct Eval
    {
        double x;
        double ll;
        double se;
    };
    std::vector<Eval> history;

    // Evaluations within a batch are independent; results land by index.
    auto evaluate_batch = [&](const std::vector<double>& xs) {
        std::vector<LikelihoodEstimate> out(xs.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < xs.size(); i = next++) {
                out[i] = log_likelihood(obs, params, std::exp(xs[i]), likelihood);
            }
        };
        const std::size_t threads = std::min(worker_threads(), xs.size());
        std::vector<std::thread> pool;
        for (std::size_t t = 1; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        worker();
        for (auto& th : pool) {
            th.join();
        }
        std::vector<double> ll(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            ll[i] = out[i].log_likelihood;
            history.push_back({xs[i], out[i].log_likelihood, out[i].std_error});
        }
        result.evaluations += xs.size();
        return ll;
    };

    const std::size_t pop = search.population;
    RandomStream rs = SeedTree(likelihood.seed).child("swarm", 0).stream();
    std::vector<double> x(pop);
    std::vector<double> v(pop);
    for (std::size_t i = 0; i < pop; ++i) {
        // Stratified start so the whole range is covered.
        x[i] = lo + (hi - lo) * (static_cast<double>(i) + rs.uniform()) / static_cast<double>(pop);
        v[i] = (hi - lo) * (rs.uniform() - 0.5) * 0.2;
    }
    std::vector<double> f = evaluate_batch(x);
    if (std::none_of(f.begin(), f.end(), [](double y) { return std::isfinite(y); })) {
        throw NumericalError(
            "calibrate: likelihood is -inf for the whole initial swarm; widen the sigma bounds or "
            "raise the particle count");
    }
    std::vector<double> p_best = x;
    std::vector<double> p_val = f;
    std::size_t g = static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
    double g_best = x[g];
    double g_val = f[g];
    result.trace.push_back({0, std::exp(g_best), g_val});

    for (std::size_t it = 1; it <= search.iterations; ++it) {
        for (std::size_t i = 0; i < pop; ++i) {
            const double r1 = rs.uniform();
            const double r2 = rs.uniform();
            v[i] = search.inertia * v[i] + search.cognitive * r1 * (p_best[i] - x[i]) +
                   search.social * r2 * (g_best - x[i]);
            x[i] = std::clamp(x[i] + v[i], lo, hi);
        }
        f = evaluate_batch(x);
        for (std::size_t i = 0; i < pop; ++i) {
            if (f[i] > p_val[i]) {
                p_val[i] = f[i];
                p_best[i] = x[i];
            }
            if (f[i] > g_val) {
                g_val = f[i];
                g_best = x[i];
            }
        }
        result.trace.push_back({it, std::exp(g_best), g_val});
    }

    // Bracket: nearest evaluated points on either side of the best.
    double a = lo;
    double b = hi;
    for (const Eval& e : history) {
        if (e.x < g_best && e.x > a) {
            a = e.x;
        }
        if (e.x > g_best && e.x < b) {
            b = e.x;
        }
    }
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = evaluate_batch({c})[0];
    double fd = evaluate_batch({d})[0];
    for (std::size_t it = 0; it < search.refine_iterations && b - a > search.refine_tolerance;
         ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = evaluate_batch({c})[0];
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = evaluate_batch({d})[0];
        }
    }
    for (const Eval& e : history) {
        if (e.ll > g_val) {
            g_val = e.ll;
            g_best = e.x;
        }
    }
    result.trace.push_back({search.iterations + 1, std::exp(g_best), g_val});

    result.sigma_star = std::exp(g_best);
    result.log_likelihood = g_val;
    for (const Eval& e : history) {
        if (e.x == g_best) {
            result.std_error = e.se;
            break;
        }
    }
    return result;
}

}  // namespace mfdrift

#include "mfdrift/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "mfdrift/error.hpp"

namespace mfdrift {

namespace {

double edge_flow(const RegionParams& p, double n, EquilibriumKind kind)
{
    const CharacteristicCurves c = characteristic_curves(p.boundary, n);
    switch (kind) {
        case EquilibriumKind::lower_edge: return c.g_lw;
        case EquilibriumKind::upper_edge: return c.g_up;
        case EquilibriumKind::drift_only: return 0.5 * (c.g_up + c.g_lw);
    }
    return c.g_mi;
}

double edge_z(const RegionParams& p, double n, EquilibriumKind kind)
{
    const GammaDelta gd = gamma_delta(p.boundary, n);
    if (gd.degenerate) {
        return 0.0;
    }
    switch (kind) {
        case EquilibriumKind::lower_edge: return gd.gamma_minus;
        case EquilibriumKind::upper_edge: return gd.gamma_plus;
        case EquilibriumKind::drift_only: return 0.5 * gd.delta_plus;
    }
    return 0.0;
}

double solve_bracketed(const std::function<double(double)>& f, double lo, double hi,
                       const char* what)
{
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_lo == 0.0) {
        return lo;
    }
    if (f_hi == 0.0) {
        return hi;
    }
    std::uintmax_t iterations = 200;
    const auto r = boost::math::tools::toms748_solve(
        f, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(50), iterations);
    if (iterations >= 200) {
        std::ostringstream os;
        os << what << ": root solve did not converge in [" << lo << ", " << hi << "], f = ["
           << f_lo << ", " << f_hi << "]";
        throw NumericalError(os.str());
    }
    return 0.5 * (r.first + r.second);
}

/// Gated inflow equals q at this n and n_buf, closed form in n_buf.
std::optional<double> buffer_at_equilibrium(const RegionParams& p, double n, double q)
{
    if (q == 0.0) {
        return 0.0;
    }
    const double jam_gate = std::max(psi(p.n_jam() - n, p.m_soft), 0.0);
    if (!(jam_gate > 0.0) || q >= p.q_max) {
        return std::nullopt;
    }
    const double y = (q / jam_gate - q) / (p.q_max - q);
    if (!(y >= 0.0) || y >= 1.0) {
        return std::nullopt;
    }
    return y * std::sqrt(p.m_soft) / std::sqrt(1.0 - y * y);
}

void fill_residuals(EquilibriumPoint& e, const RegionParams& p, double q)
{
    const RegionState st{e.n_eq, {e.n_eq}, e.z_eq, e.n_buf_eq, 0.0};
    const RegionDrift d = drift_vector({st}, {p}, {{1.0}}, {q}, DriftMode::ito_correct)[0];
    e.residual_n = std::fabs(d.dn);
    e.residual_z = std::fabs(d.mu_z) + std::fabs(d.s_z);
    e.residual_buf = std::fabs(d.dn_buf);
}

std::vector<EquilibriumPoint> roots_for(const RegionParams& p, double q, EquilibriumKind kind)
{
    std::vector<EquilibriumPoint> out;
    const double n_jam = p.n_jam();
    auto add = [&](double n, bool congested) {
        const auto b = buffer_at_equilibrium(p, n, q);
        if (!b) {
            return;
        }
        EquilibriumPoint e;
        e.kind = kind;
        e.congested = congested;
        e.n_eq = n;
        e.z_eq = edge_z(p, n, kind);
        e.n_buf_eq = *b;
        fill_residuals(e, p, q);
        out.push_back(e);
    };
    if (q == 0.0) {
        add(0.0, false);
        return out;
    }
    // Peak of the edge curve splits the rising and falling branches.
    const auto peak = boost::math::tools::brent_find_minima(
        [&](double n) { return -edge_flow(p, n, kind); }, 0.0, n_jam, 50);
    const double n_peak = peak.first;
    const double g_peak = -peak.second;
    const std::function<double(double)> f = [&](double n) { return edge_flow(p, n, kind) - q; };
    if (q > g_peak) {
        return out;
    }
    if (f(0.0) <= 0.0) {
        add(solve_bracketed(f, 0.0, n_peak, "rising branch"), false);
    }
    if (f(n_jam) <= 0.0 && n_peak < n_jam) {
        add(solve_bracketed(f, n_peak, n_jam, "falling branch"), true);
    }
    return out;
}

void classify(LvReport& report, const LvSample& s)
{
    ++report.evaluated;
    if (s.lv1 < 0.0 && s.lv2 <= 0.0) {
        ++report.upper_bound_states;
        const double bound = std::sqrt(s.lv2 / s.lv1);
        if (!report.sigma_max || bound < *report.sigma_max) {
            report.sigma_max = bound;
            report.binding_upper = s;
        }
    } else if (s.lv1 > 0.0 && s.lv2 > 0.0) {
        ++report.lower_bound_states;
        const double bound = std::sqrt(s.lv2 / s.lv1);
        if (!report.sigma_min || bound > *report.sigma_min) {
            report.sigma_min = bound;
            report.binding_lower = s;
        }
    } else if (s.lv2 > 0.0) {
        ++report.violating_states;
        if (!report.worst_violation || s.lv2 > report.worst_violation->lv2) {
            report.worst_violation = s;
        }
    } else {
        ++report.unconditional_states;
    }
}

}  // namespace

const char* to_string(EquilibriumKind kind)
{
    switch (kind) {
        case EquilibriumKind::lower_edge: return "lower_edge";
        case EquilibriumKind::upper_edge: return "upper_edge";
        case EquilibriumKind::drift_only: return "drift_only";
    }
    return "?";
}

double EquilibriumPoint::max_residual() const
{
    return std::max({residual_n, residual_z, residual_buf});
}

EquilibriumSet find_equilibrium(const RegionParams& params, double q_const)
{
    if (!(q_const >= 0.0) || !std::isfinite(q_const)) {
        throw ConfigError("find_equilibrium: demand must be finite and >= 0");
    }
    EquilibriumSet out;
    for (EquilibriumKind kind : {EquilibriumKind::lower_edge, EquilibriumKind::upper_edge}) {
        // Both edges meet at the empty network; report it once.
        if (q_const == 0.0 && kind == EquilibriumKind::upper_edge) {
            break;
        }
        for (const auto& e : roots_for(params, q_const, kind)) {
            out.points.push_back(e);
        }
    }
    std::stable_sort(out.points.begin(), out.points.end(),
                     [](const EquilibriumPoint& a, const EquilibriumPoint& b) {
                         return a.congested < b.congested;
                     });
    out.drift_points = roots_for(params, q_const, EquilibriumKind::drift_only);
    return out;
}

LvTerms lv_terms(const LvState& state, const EquilibriumPoint& eq, const RegionParams& params,
                 double q_raw)
{
    const GammaDelta gd = gamma_delta(params.boundary, state.n);
    if (gd.degenerate) {
        throw DomainError("lv_terms: degenerate band at the state's accumulation");
    }
    const double u = gd.delta_plus - 2.0 * state.z;
    const double poly = -gd.delta_plus + 2.0 * state.z + u * u * u;
    const double half_core = (gd.delta_minus * gd.delta_minus - u * u) / (2.0 * gd.delta_minus);
    const RegionState st{state.n, {state.n}, state.z, state.n_buf, 0.0};
    const RegionDrift d =
        drift_vector({st}, {params}, {{1.0}}, {q_raw}, DriftMode::ito_correct)[0];
    LvTerms out;
    out.lv1 = poly * (state.z - eq.z_eq) - half_core * half_core;
    out.lv2 = 2.0 * (state.n - eq.n_eq) * d.dn + 2.0 * (state.n_buf - eq.n_buf_eq) * d.dn_buf;
    return out;
}

double lv_total(const LvState& state, const EquilibriumPoint& eq, const RegionParams& params,
                double q_raw, double sigma)
{
    const GammaDelta gd = gamma_delta(params.boundary, state.n);
    if (gd.degenerate) {
        throw DomainError("lv_total: degenerate band at the state's accumulation");
    }
    RegionParams p = params;
    p.sigma = sigma;
    const RegionState st{state.n, {state.n}, state.z, state.n_buf, 0.0};
    const RegionDrift d = drift_vector({st}, {p}, {{1.0}}, {q_raw}, DriftMode::paper_literal)[0];
    return 2.0 * (state.n - eq.n_eq) * d.dn + 2.0 * (state.z - eq.z_eq) * d.mu_z +
           2.0 * (state.n_buf - eq.n_buf_eq) * d.dn_buf + d.s_z * d.s_z;
}

StateGrid make_state_grid(const RegionParams& params, std::size_t n_points, std::size_t z_points,
                          std::size_t buf_points, double buf_max)
{
    auto axis = [](double lo, double hi, std::size_t k) {
        std::vector<double> v(k);
        for (std::size_t i = 0; i < k; ++i) {
            v[i] = k == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
        }
        return v;
    };
    return StateGrid{axis(0.0, params.n_jam(), n_points), axis(0.0, 1.0, z_points),
                     axis(0.0, buf_max, buf_points)};
}

LvReport sigma_bound(const EquilibriumPoint& eq, const RegionParams& params, double q_raw,
                     const StateGrid& grid, bool keep_samples)
{
    if (grid.n.empty() || grid.z_fraction.empty() || grid.n_buf.empty()) {
        throw ConfigError("sigma_bound: empty state grid");
    }
    LvReport report;
    report.eq = eq;
    report.q_raw = q_raw;
    report.n_points = grid.n.size();
    report.z_points = grid.z_fraction.size();
    report.buf_points = grid.n_buf.size();
    for (double n : grid.n) {
        const GammaDelta gd = gamma_delta(params.boundary, n);
        if (gd.degenerate) {
            report.skipped_degenerate += grid.z_fraction.size() * grid.n_buf.size();
            continue;
        }
        const double eps = grid.edge_margin * gd.delta_minus;
        for (double f : grid.z_fraction) {
            const double z = gd.gamma_minus + eps + f * (gd.delta_minus - 2.0 * eps);
            for (double b : grid.n_buf) {
                LvSample s;
                s.state = {n, z, b};
                const LvTerms t = lv_terms(s.state, eq, params, q_raw);
                s.lv1 = t.lv1;
                s.lv2 = t.lv2;
                classify(report, s);
                if (keep_samples) {
                    report.samples.push_back(s);
                }
            }
        }
    }
    return report;
}

LvReport sigma_bound(const EquilibriumPoint& eq, const RegionParams& params, double q_raw,
                     const std::vector<LvState>& states, bool keep_samples)
{
    if (states.empty()) {
        throw ConfigError("sigma_bound: empty state list");
    }
    LvReport report;
    report.eq = eq;
    report.q_raw = q_raw;
    report.n_points = states.size();
    report.z_points = 1;
    report.buf_points = 1;
    for (const LvState& st : states) {
        if (gamma_delta(params.boundary, st.n).degenerate) {
            ++report.skipped_degenerate;
            continue;
        }
        LvSample s;
        s.state = st;
        const LvTerms t = lv_terms(st, eq, params, q_raw);
        s.lv1 = t.lv1;
        s.lv2 = t.lv2;
        classify(report, s);
        if (keep_samples) {
            report.samples.push_back(s);
        }
    }
    return report;
}

std::string LvReport::summary() const
{
    std::ostringstream os;
    os << "evaluated " << evaluated << " states (" << skipped_degenerate
       << " skipped on degenerate bands): " << upper_bound_states << " cap sigma, "
       << lower_bound_states << " floor sigma, " << violating_states << " violate for every sigma, "
       << unconditional_states << " hold for every sigma. ";
    if (sigma_max) {
        os << "sigma_max = " << *sigma_max;
    } else {
        os << "no state caps sigma (vacuous upper bound)";
    }
    if (sigma_min) {
        os << ", sigma_min = " << *sigma_min;
    }
    return os.str();
}

}  // namespace mfdrift

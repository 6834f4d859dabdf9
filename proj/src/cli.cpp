#include "mfdrift/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mfdrift/analysis.hpp"
#include "mfdrift/calibration.hpp"
#include "mfdrift/error.hpp"
#include "mfdrift/fokker_planck.hpp"
#include "mfdrift/io.hpp"
#include "mfdrift/scenario.hpp"
#include "mfdrift/stability.hpp"

namespace mfdrift {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Options shared by every scenario-driven subcommand.
struct ScenarioArgs
{
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::string mode;
    std::string drift;
    std::string out_dir = ".";
};

void add_scenario_options(CLI::App* cmd, ScenarioArgs& a, bool with_overrides)
{
    cmd->add_option("--config", a.config, "scenario JSON file");
    cmd->add_option("--preset", a.preset, "bundled scenario name");
    cmd->add_option("--out-dir", a.out_dir, "output directory")->capture_default_str();
    if (with_overrides) {
        cmd->add_option("--seed", a.seed, "master seed");
        cmd->add_option("--paths", a.paths, "number of sample paths");
        cmd->add_option("--dt", a.dt, "integration step, seconds");
        cmd->add_option("--horizon", a.horizon, "simulated time, seconds");
        cmd->add_option("--mode", a.mode, "integration mode")
            ->check(CLI::IsMember({"euler", "latent"}));
        cmd->add_option("--drift", a.drift, "drift formula")->check(CLI::IsMember({"ito", "paper"}));
    }
}

ScenarioConfig resolve_scenario(const ScenarioArgs& a)
{
    if (a.config.empty() == a.preset.empty()) {
        throw ConfigError("give exactly one of --config or --preset");
    }
    ScenarioConfig cfg = a.config.empty() ? load_preset(a.preset) : load_scenario(a.config);
    if (a.seed) {
        cfg.sim.master_seed = *a.seed;
    }
    if (a.paths) {
        cfg.sim.n_paths = *a.paths;
    }
    if (a.dt) {
        cfg.sim.dt = *a.dt;
    }
    if (a.horizon) {
        cfg.sim.horizon = *a.horizon;
    }
    if (!a.mode.empty()) {
        cfg.sim.integration_mode = integration_mode_from_string(a.mode);
    }
    if (!a.drift.empty()) {
        cfg.sim.drift_mode = drift_mode_from_string(a.drift);
    }
    // Overrides go through the same checks as the file.
    return scenario_from_json(scenario_to_json(cfg));
}

std::string path_in(const std::string& dir, const std::string& name)
{
    return (fs::path(dir) / name).string();
}

template <class Writer>
void write_csv(const std::string& path, Writer w)
{
    std::ostringstream os;
    w(os);
    write_text_file(path, os.str());
}

void write_json(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string tag(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

json quantiles_json(const std::vector<double>& x)
{
    return {{"q10", quantile(x, 0.1)}, {"q50", quantile(x, 0.5)}, {"q90", quantile(x, 0.9)},
            {"mean", mean(x)}};
}

int cmd_validate(const ScenarioArgs& a, std::ostream& out)
{
    const ScenarioConfig cfg = resolve_scenario(a);
    out << "ok: " << cfg.name << " (" << cfg.model.regions.size() << " region"
        << (cfg.model.regions.size() == 1 ? "" : "s") << ", fingerprint "
        << scenario_fingerprint(cfg) << ")\n";
    return 0;
}

int cmd_simulate(const ScenarioArgs& a, std::ostream& out)
{
    const ScenarioConfig cfg = resolve_scenario(a);
    const EnsembleResult ens = simulate(cfg);
    write_text_file(path_in(a.out_dir, "scenario.json"), serialize_scenario(cfg));
    write_csv(path_in(a.out_dir, "paths.csv"), [&](std::ostream& os) { write_paths_csv(os, ens); });

    json summary;
    summary["scenario"] = cfg.name;
    summary["fingerprint"] = ens.fingerprint;
    summary["master_seed"] = ens.master_seed;
    summary["n_paths"] = ens.paths.size();
    summary["regions"] = ens.regions;
    summary["steps"] = step_count(cfg.sim);
    summary["integration_mode"] = to_string(cfg.sim.integration_mode);
    summary["drift_mode"] = to_string(cfg.sim.drift_mode);
    json final_state = json::array();
    for (std::size_t r = 0; r < ens.regions; ++r) {
        final_state.push_back({{"region", r},
                               {"n", quantiles_json(samples_at_time(ens, cfg.sim.horizon,
                                                                    Variable::n, r))}});
    }
    summary["final_accumulation"] = final_state;
    summary["audit"] = audit_summary(ens);
    write_json(path_in(a.out_dir, "summary.json"), summary);
    out << "simulated " << ens.paths.size() << " paths of " << cfg.name << " into " << a.out_dir
        << "\n";
    return 0;
}

int cmd_analyze(const std::string& in_dir, const std::string& out_dir, std::ostream& out)
{
    const ScenarioConfig cfg = load_scenario(path_in(in_dir, "scenario.json"));
    std::ifstream is(path_in(in_dir, "paths.csv"), std::ios::binary);
    if (!is) {
        throw ConfigError(path_in(in_dir, "paths.csv"), "cannot open file");
    }
    const EnsembleResult ens = read_paths_csv(is);
    if (ens.regions != cfg.model.regions.size()) {
        throw ConfigError("paths.csv", "region count differs from scenario.json");
    }
    const AnalysisSpec& spec = cfg.analysis;
    const double t_eval = cfg.t_eval();
    json report;
    report["scenario"] = cfg.name;
    report["t_eval"] = t_eval;
    report["window"] = cfg.window();
    json regions = json::array();
    for (std::size_t r = 0; r < ens.regions; ++r) {
        const std::string prefix = ens.regions > 1 ? "region" + std::to_string(r) + "_" : "";
        json reg;
        reg["region"] = r;
        const double hi = spec.gridlock_high.value_or(0.75 * cfg.model.regions[r].n_jam());
        reg["gridlock_threshold"] = hi;
        reg["gridlock_fraction"] = gridlock_probability(ens, hi, t_eval, r);
        if (spec.gridlock_low) {
            reg["recovered_threshold"] = *spec.gridlock_low;
            reg["recovered_fraction"] = recovered_fraction(ens, *spec.gridlock_low, t_eval, r);
        }
        json spread = json::array();
        for (double level : spec.spread_levels) {
            const auto g = exit_flow_samples_at(ens, level, cfg.window(), r);
            json entry{{"n", level}, {"count", g.size()}};
            if (!g.empty()) {
                entry["iqr"] = interquartile_range(g);
                write_csv(path_in(out_dir, prefix + "exit_flow_n" + tag(level) + ".csv"),
                          [&](std::ostream& os) {
                              write_histogram_csv(os, make_histogram(g, spec.histogram_bins));
                          });
            }
            if (g.size() >= 3 && variance(g) > 0.0) {
                entry["skewness"] = sample_skewness(g);
            }
            spread.push_back(entry);
        }
        reg["spread"] = spread;
        if (spec.skew_level) {
            const auto g = exit_flow_samples_at(ens, *spec.skew_level, cfg.window(), r);
            json entry{{"n", *spec.skew_level}, {"count", g.size()}};
            if (g.size() >= 3 && variance(g) > 0.0) {
                entry["skewness"] = sample_skewness(g);
            }
            reg["skew"] = entry;
        }
        json skipped = json::array();
        for (double t : spec.marginal_times) {
            // A --horizon override can cut configured snapshot times off.
            if (t > ens.paths.front().t.back()) {
                skipped.push_back(t);
                continue;
            }
            for (Variable v : {Variable::n, Variable::z, Variable::g}) {
                write_csv(path_in(out_dir, prefix + "marginal_" + to_string(v) + "_t" + tag(t) +
                                               ".csv"),
                          [&](std::ostream& os) {
                              write_histogram_csv(
                                  os, marginal_at_time(ens, t, v, spec.histogram_bins, r));
                          });
            }
        }
        if (!skipped.empty()) {
            reg["marginal_times_beyond_horizon"] = skipped;
        }
        if (spec.hysteresis_lo && spec.hysteresis_hi) {
            const auto levels =
                linspace(*spec.hysteresis_lo, *spec.hysteresis_hi, spec.hysteresis_levels);
            const HysteresisCurve c = hysteresis_curve(ens, levels, r);
            write_csv(path_in(out_dir, prefix + "hysteresis.csv"),
                      [&](std::ostream& os) { write_hysteresis_csv(os, c); });
            std::vector<double> lv;
            std::vector<double> dec;
            for (std::size_t i = 0; i < levels.size(); ++i) {
                if (c.count[i] > 0) {
                    lv.push_back(levels[i]);
                    dec.push_back(c.mean_decrease[i]);
                }
            }
            json h{{"levels", levels.size()}, {"levels_with_crossings", lv.size()}};
            if (lv.size() >= 2) {
                h["spearman"] = spearman(lv, dec);
                h["min_mean_decrease"] = *std::min_element(dec.begin(), dec.end());
            }
            reg["hysteresis"] = h;
        }
        regions.push_back(reg);
    }
    report["regions"] = regions;
    if (ens.regions >= 2) {
        json corr;
        for (Variable v : {Variable::n, Variable::z, Variable::g}) {
            const Heatmap hm = joint_heatmap(ens, v, 0, 1, 0.0, cfg.sim.horizon);
            write_csv(path_in(out_dir, std::string("heatmap_") + to_string(v) + ".csv"),
                      [&](std::ostream& os) { write_heatmap_csv(os, hm); });
            corr[to_string(v)] = hm.pearson;
        }
        report["correlation_region0_region1"] = corr;
    }
    write_json(path_in(out_dir, "analysis.json"), report);
    out << "analysis of " << ens.paths.size() << " paths written to " << out_dir << "\n";
    return 0;
}

struct FpeArgs
{
    double n = 2000.0;
    std::optional<double> sigma;
    std::optional<double> z0;
    std::vector<double> times{50.0, 200.0};
    std::size_t cells = 400;
    std::optional<double> dt_pde;
    std::size_t region = 0;
};

int cmd_fpe(const ScenarioArgs& a, const FpeArgs& f, std::ostream& out)
{
    const ScenarioConfig cfg = resolve_scenario(a);
    if (f.region >= cfg.model.regions.size()) {
        throw ConfigError("--region", "no such region");
    }
    RegionParams p = cfg.model.regions[f.region];
    if (f.sigma) {
        p.sigma = *f.sigma;
    }
    const DriftMode mode = cfg.sim.drift_mode;
    const Grid1D grid = band_grid(p, f.n, f.cells);
    const GammaDelta gd = gamma_delta(p.boundary, f.n);
    const double z0 = f.z0.value_or(gd.gamma_minus + 0.5 * gd.delta_minus);
    const double dt = f.dt_pde.value_or(0.9 * admissible_fpe_dt(f.n, grid, p, mode));
    std::vector<double> times = f.times;
    std::sort(times.begin(), times.end());
    const FpeSolution sol = solve_fpe_1d(point_mass(grid, z0), grid, f.n, p, times, dt, mode);
    write_csv(path_in(a.out_dir, "density.csv"),
              [&](std::ostream& os) { write_density_csv(os, sol); });
    json snaps = json::array();
    for (const DensityField& d : sol.snapshots) {
        snaps.push_back({{"t", d.t},
                         {"mass", d.mass(grid)},
                         {"mean", d.mean(grid)},
                         {"variance", d.variance(grid)}});
    }
    write_json(path_in(a.out_dir, "fpe_summary.json"),
               {{"n_fixed", f.n},
                {"sigma", p.sigma},
                {"drift_mode", to_string(mode)},
                {"z0", z0},
                {"cells", f.cells},
                {"dt_pde", dt},
                {"steps", sol.steps},
                {"renormalizations", sol.renormalizations},
                {"max_mass_error", sol.max_mass_error},
                {"snapshots", snaps}});
    out << "solved " << sol.steps << " steps; density written to " << a.out_dir << "\n";
    return 0;
}

struct StabilityArgs
{
    std::optional<double> q;
    std::size_t n_points = 50;
    std::size_t z_points = 50;
    std::size_t buf_points = 10;
    std::optional<double> buf_max;
    std::size_t equilibrium = 0;
    bool field = false;
    std::size_t region = 0;
};

int cmd_stability(const ScenarioArgs& a, const StabilityArgs& s, std::ostream& out)
{
    const ScenarioConfig cfg = resolve_scenario(a);
    if (s.region >= cfg.model.regions.size()) {
        throw ConfigError("--region", "no such region");
    }
    const RegionParams& p = cfg.model.regions[s.region];
    const double q = s.q.value_or(eval_demand(cfg.model.demand[s.region], cfg.sim.horizon));
    const EquilibriumSet eqs = find_equilibrium(p, q);
    json j;
    j["q_const"] = q;
    j["equilibria"] = json::array();
    for (const auto& e : eqs.points) {
        j["equilibria"].push_back(to_json(e));
    }
    j["drift_equilibria"] = json::array();
    for (const auto& e : eqs.drift_points) {
        j["drift_equilibria"].push_back(to_json(e));
    }
    if (eqs.points.empty()) {
        j["report"] = nullptr;
        j["note"] = "no equilibrium: the demand exceeds what the exit-flow band can serve";
        write_json(path_in(a.out_dir, "stability.json"), j);
        out << "no equilibrium at q = " << q << "\n";
        return 0;
    }
    if (s.equilibrium >= eqs.points.size()) {
        throw ConfigError("--equilibrium", "index out of range (found " +
                                               std::to_string(eqs.points.size()) + ")");
    }
    const double buf_max = s.buf_max.value_or(2.0 * cfg.sim.horizon * q);
    const StateGrid grid = make_state_grid(p, s.n_points, s.z_points, s.buf_points, buf_max);
    const LvReport report = sigma_bound(eqs.points[s.equilibrium], p, q, grid, s.field);
    j["buf_max"] = buf_max;
    j["report"] = to_json(report);
    write_json(path_in(a.out_dir, "stability.json"), j);
    if (s.field) {
        write_csv(path_in(a.out_dir, "lv_field.csv"),
                  [&](std::ostream& os) { write_lv_field_csv(os, report, p.sigma); });
    }
    out << report.summary() << "\n";
    return 0;
}

struct ObserveArgs
{
    std::size_t path_id = 0;
    std::size_t stride = 1;
    std::optional<double> sigma;
    std::size_t region = 0;
};

int cmd_observe(const ScenarioArgs& a, const ObserveArgs& o, std::ostream& out)
{
    ScenarioConfig cfg = resolve_scenario(a);
    if (o.region >= cfg.model.regions.size()) {
        throw ConfigError("--region", "no such region");
    }
    if (o.sigma) {
        for (auto& r : cfg.model.regions) {
            r.sigma = *o.sigma;
        }
    }
    const PathRecord path = run_path(cfg.model, cfg.sim, o.path_id);
    const ObservationSeries obs = observations_from_path(path, o.region, o.stride);
    write_csv(path_in(a.out_dir, "observations.csv"),
              [&](std::ostream& os) { write_observations_csv(os, obs); });
    out << obs.size() << " observations at spacing " << obs.spacing() << " s written to "
        << a.out_dir << "\n";
    return 0;
}

struct CalibrateArgs
{
    std::string observations;
    std::size_t particles = 500;
    std::optional<std::size_t> substeps;
    std::string scheme = "interval_adapted";
    double sigma_lo = 0.001;
    double sigma_hi = 1.0;
    std::size_t population = 12;
    std::size_t iterations = 12;
    std::uint64_t filter_seed = 1;
    std::optional<double> assume_inflow;
    std::size_t region = 0;
};

int cmd_calibrate(const ScenarioArgs& a, const CalibrateArgs& c, std::ostream& out)
{
    const ScenarioConfig cfg = resolve_scenario(a);
    if (c.region >= cfg.model.regions.size()) {
        throw ConfigError("--region", "no such region");
    }
    std::ifstream is(c.observations, std::ios::binary);
    if (!is) {
        throw ConfigError(c.observations, "cannot open observations file");
    }
    ObservationSeries obs = read_observations_csv(is);
    if (obs.q_in.empty()) {
        if (!c.assume_inflow) {
            throw ConfigError(c.observations,
                              "no q_in column; pass --assume-inflow to use a constant inflow");
        }
        assume_constant_inflow(obs, *c.assume_inflow);
    }
    validate_observations(obs);
    LikelihoodOptions lo;
    lo.n_particles = c.particles;
    lo.seed = c.filter_seed;
    lo.scheme = filter_scheme_from_string(c.scheme);
    lo.mode = cfg.sim.drift_mode;
    lo.substeps = c.substeps.value_or(
        static_cast<std::size_t>(std::max(1.0, std::round(obs.spacing() / cfg.sim.dt))));
    SwarmSettings ss;
    ss.sigma_lo = c.sigma_lo;
    ss.sigma_hi = c.sigma_hi;
    ss.population = c.population;
    ss.iterations = c.iterations;
    const CalibrationResult r = calibrate(obs, cfg.model.regions[c.region], ss, lo);
    write_json(path_in(a.out_dir, "calibration.json"), to_json(r));
    if (r.inflow_assumed) {
        out << "warning: inflow was not observed; a constant inflow was assumed\n";
    }
    out << "sigma* = " << format_double(r.sigma_star) << " (log-likelihood "
        << r.log_likelihood << ")\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Stochastic MFD simulation, analysis and calibration"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "mfdrift 1.0.0");

    ScenarioArgs sa;
    auto* validate = app.add_subcommand("validate", "check a scenario and exit");
    add_scenario_options(validate, sa, true);

    auto* presets = app.add_subcommand("presets", "list bundled scenarios");
    std::string export_name;
    std::string export_path;
    auto* exp = app.add_subcommand("export-preset", "print a bundled scenario as JSON");
    exp->add_option("name", export_name, "preset name")->required();
    exp->add_option("-o,--output", export_path, "write to this file instead of stdout");

    auto* sim = app.add_subcommand("simulate", "run an ensemble; writes paths.csv and summary.json");
    add_scenario_options(sim, sa, true);

    std::string in_dir;
    std::string analyze_out;
    auto* ana = app.add_subcommand("analyze", "histograms, hysteresis, gridlock and heatmaps");
    ana->add_option("--in-dir", in_dir, "directory written by simulate")->required();
    ana->add_option("--out-dir", analyze_out, "output directory (default: --in-dir)");

    FpeArgs fa;
    auto* fpe = app.add_subcommand("fpe", "solve the fixed-n Fokker-Planck equation for z");
    add_scenario_options(fpe, sa, true);
    fpe->add_option("--n", fa.n, "fixed accumulation")->capture_default_str();
    fpe->add_option("--sigma", fa.sigma, "override the region's sigma");
    fpe->add_option("--z0", fa.z0, "initial z (default: band center)");
    fpe->add_option("--times", fa.times, "snapshot times, seconds")->delimiter(',');
    fpe->add_option("--cells", fa.cells, "grid cells (>= 16)")->capture_default_str();
    fpe->add_option("--dt-pde", fa.dt_pde, "time step (default: 0.9 of the stability limit)");
    fpe->add_option("--region", fa.region, "region index")->capture_default_str();

    StabilityArgs st;
    auto* stab = app.add_subcommand("stability", "equilibria and the Lyapunov sigma bound");
    add_scenario_options(stab, sa, true);
    stab->add_option("--q", st.q, "constant demand (default: demand at the horizon)");
    stab->add_option("--n-points", st.n_points, "accumulation grid points")->capture_default_str();
    stab->add_option("--z-points", st.z_points, "variation grid points")->capture_default_str();
    stab->add_option("--buf-points", st.buf_points, "buffer grid points")->capture_default_str();
    stab->add_option("--buf-max", st.buf_max, "buffer range (default: 2 * horizon * q)");
    stab->add_option("--equilibrium", st.equilibrium, "index into the equilibria found")
        ->capture_default_str();
    stab->add_flag("--field", st.field, "also write lv_field.csv");
    stab->add_option("--region", st.region, "region index")->capture_default_str();

    ObserveArgs oa;
    auto* obs = app.add_subcommand("observe", "write an observation series from one simulated path");
    add_scenario_options(obs, sa, true);
    obs->add_option("--path-id", oa.path_id, "path to observe")->capture_default_str();
    obs->add_option("--stride", oa.stride, "keep every stride-th record")->capture_default_str();
    obs->add_option("--sigma", oa.sigma, "override sigma in every region");
    obs->add_option("--region", oa.region, "region index")->capture_default_str();

    CalibrateArgs ca;
    auto* cal = app.add_subcommand("calibrate", "estimate sigma from an observation series");
    add_scenario_options(cal, sa, true);
    cal->add_option("--observations", ca.observations, "CSV with t,n[,q_in]")->required();
    cal->add_option("--particles", ca.particles, "filter particles")->capture_default_str();
    cal->add_option("--substeps", ca.substeps,
                    "Euler substeps per interval (default: spacing / dt; 0 = continuous)");
    cal->add_option("--scheme", ca.scheme, "particle filter variant")
        ->check(CLI::IsMember({"interval_adapted", "lagged_bootstrap"}))
        ->capture_default_str();
    cal->add_option("--sigma-lo", ca.sigma_lo, "lower search bound")->capture_default_str();
    cal->add_option("--sigma-hi", ca.sigma_hi, "upper search bound")->capture_default_str();
    cal->add_option("--population", ca.population, "swarm size")->capture_default_str();
    cal->add_option("--iterations", ca.iterations, "swarm iterations")->capture_default_str();
    cal->add_option("--filter-seed", ca.filter_seed, "seed of the particle noise")
        ->capture_default_str();
    cal->add_option("--assume-inflow", ca.assume_inflow, "constant inflow when q_in is absent");
    cal->add_option("--region", ca.region, "region index")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (validate->parsed()) {
            return cmd_validate(sa, out);
        }
        if (presets->parsed()) {
            for (const auto& name : preset_names()) {
                out << name << "\n";
            }
            return 0;
        }
        if (exp->parsed()) {
            const std::string text = serialize_scenario(load_preset(export_name));
            if (export_path.empty()) {
                out << text;
            } else {
                write_text_file(export_path, text);
            }
            return 0;
        }
        if (sim->parsed()) {
            return cmd_simulate(sa, out);
        }
        if (ana->parsed()) {
            return cmd_analyze(in_dir, analyze_out.empty() ? in_dir : analyze_out, out);
        }
        if (fpe->parsed()) {
            return cmd_fpe(sa, fa, out);
        }
        if (stab->parsed()) {
            return cmd_stability(sa, st, out);
        }
        if (obs->parsed()) {
            return cmd_observe(sa, oa, out);
        }
        if (cal->parsed()) {
            return cmd_calibrate(sa, ca, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    std::vector<const char*> argv{"mfdrift"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace mfdrift

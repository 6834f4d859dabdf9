#include "mfdrift/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "mfdrift/error.hpp"

namespace mfdrift {

using nlohmann::json;

namespace {

/// Reads one JSON object, remembering which keys were consumed so that
/// leftovers can be rejected.
class ObjectReader
{
  public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) {
            throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& at(const std::string& key)
    {
        if (!j_.contains(key)) {
            throw ConfigError(child(key), "required key is missing");
        }
        seen_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key)
    {
        const json& v = at(key);
        if (!v.is_number()) {
            throw ConfigError(child(key), "expected a number");
        }
        return v.get<double>();
    }
    double number(const std::string& key, double fallback)
    {
        return has(key) ? number(key) : fallback;
    }
    std::optional<double> optional_number(const std::string& key)
    {
        if (!has(key)) {
            return std::nullopt;
        }
        return number(key);
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback)
    {
        if (!has(key)) {
            return fallback;
        }
        const json& v = at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            throw ConfigError(child(key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::string string(const std::string& key, const std::string& fallback)
    {
        if (!has(key)) {
            return fallback;
        }
        const json& v = at(key);
        if (!v.is_string()) {
            throw ConfigError(child(key), "expected a string");
        }
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key)
    {
        std::vector<double> out;
        if (!has(key)) {
            return out;
        }
        const json& v = at(key);
        if (!v.is_array()) {
            throw ConfigError(child(key), "expected an array of numbers");
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                throw ConfigError(child(key) + "/" + std::to_string(i), "expected a number");
            }
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::string child(const std::string& key) const { return path_ + "/" + key; }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (seen_.count(it.key()) == 0) {
                throw ConfigError(child(it.key()), "unknown key");
            }
        }
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

MfdCurveSpec read_curve(const json& j, const std::string& path)
{
    ObjectReader r(j, path);
    MfdCurveSpec spec;
    const std::string family = r.string("family", "");
    spec.flow_scale = r.number("scale", 1.0);
    if (family == "polynomial") {
        spec.shape = PolynomialCurve{r.number("a"), r.number("b"), r.number("c")};
    } else if (family == "exponential") {
        spec.shape = ExponentialCurve{r.number("p1"), r.number("p2"), r.number("n_crt")};
    } else if (family == "tabulated") {
        TabulatedCurve t;
        const json& pts = r.at("points");
        if (!pts.is_array()) {
            throw ConfigError(r.child("points"), "expected an array of [n, flow] pairs");
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const json& p = pts[i];
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                throw ConfigError(r.child("points") + "/" + std::to_string(i),
                                  "expected [n, flow]");
            }
            t.points.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        spec.shape = std::move(t);
    } else {
        throw ConfigError(r.child("family"),
                          "expected 'polynomial', 'exponential' or 'tabulated', got '" + family + "'");
    }
    r.finish();
    return spec;
}

json write_curve(const MfdCurveSpec& spec)
{
    json j;
    if (const auto* p = std::get_if<PolynomialCurve>(&spec.shape)) {
        j = {{"family", "polynomial"}, {"a", p->a}, {"b", p->b}, {"c", p->c}};
    } else if (const auto* e = std::get_if<ExponentialCurve>(&spec.shape)) {
        j = {{"family", "exponential"}, {"p1", e->p1}, {"p2", e->p2}, {"n_crt", e->n_crt}};
    } else {
        json pts = json::array();
        for (const auto& p : std::get<TabulatedCurve>(spec.shape).points) {
            pts.push_back({p.n, p.flow});
        }
        j = {{"family", "tabulated"}, {"points", pts}};
    }
    j["scale"] = spec.flow_scale;
    return j;
}

BoundarySpec read_boundary(const json& j, const std::string& path)
{
    ObjectReader r(j, path);
    BoundarySpec b;
    b.eta = r.number("eta", 0.5);
    b.n_jam = r.number("n_jam", 10000.0);
    b.flow_floor = r.number("flow_floor", 1e-6);
    const bool banded = r.has("curve");
    const bool paired = r.has("upper") || r.has("lower");
    if (banded == paired) {
        throw ConfigError(path, "give either 'curve' with 'band_factor' or both 'upper' and 'lower'");
    }
    if (banded) {
        BandedCurve band;
        band.base = read_curve(r.at("curve"), r.child("curve"));
        band.band_factor = r.number("band_factor", 0.15);
        b.envelope = std::move(band);
    } else {
        CurvePair pair;
        pair.upper = read_curve(r.at("upper"), r.child("upper"));
        pair.lower = read_curve(r.at("lower"), r.child("lower"));
        b.envelope = std::move(pair);
    }
    r.finish();
    return b;
}

json write_boundary(const BoundarySpec& b)
{
    json j = {{"eta", b.eta}, {"n_jam", b.n_jam}, {"flow_floor", b.flow_floor}};
    if (const auto* band = std::get_if<BandedCurve>(&b.envelope)) {
        j["curve"] = write_curve(band->base);
        j["band_factor"] = band->band_factor;
    } else {
        const auto& pair = std::get<CurvePair>(b.envelope);
        j["upper"] = write_curve(pair.upper);
        j["lower"] = write_curve(pair.lower);
    }
    return j;
}

DemandProfile read_demand(const json& j, const std::string& path)
{
    if (!j.is_array()) {
        throw ConfigError(path, "expected an array of demand segments");
    }
    DemandProfile d;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string seg_path = path + "/" + std::to_string(i);
        ObjectReader r(j[i], seg_path);
        const std::string type = r.string("type", "");
        if (type == "constant") {
            ConstantSegment c;
            c.level = r.number("level");
            c.t0 = r.number("t0", 0.0);
            c.t1 = r.number("t1", std::numeric_limits<double>::infinity());
            d.segments.emplace_back(c);
        } else if (type == "pulse") {
            ParabolicPulse p;
            p.baseline = r.number("baseline", 0.0);
            p.amplitude = r.number("amplitude");
            p.t_peak = r.number("t_peak");
            p.half_width = r.number("half_width");
            d.segments.emplace_back(p);
        } else {
            throw ConfigError(r.child("type"), "expected 'constant' or 'pulse', got '" + type + "'");
        }
        r.finish();
    }
    return d;
}

json write_demand(const DemandProfile& d)
{
    json out = json::array();
    for (const auto& seg : d.segments) {
        if (const auto* c = std::get_if<ConstantSegment>(&seg)) {
            json j = {{"type", "constant"}, {"level", c->level}, {"t0", c->t0}};
            if (std::isfinite(c->t1)) {
                j["t1"] = c->t1;
            }
            out.push_back(j);
        } else {
            const auto& p = std::get<ParabolicPulse>(seg);
            out.push_back({{"type", "pulse"},
                           {"baseline", p.baseline},
                           {"amplitude", p.amplitude},
                           {"t_peak", p.t_peak},
                           {"half_width", p.half_width}});
        }
    }
    return out;
}

SimConfig read_sim(const json& j, const std::string& path)
{
    ObjectReader r(j, path);
    SimConfig s;
    s.dt = r.number("dt", s.dt);
    s.horizon = r.number("horizon", s.horizon);
    s.n_paths = r.unsigned_integer("n_paths", s.n_paths);
    s.master_seed = r.unsigned_integer("seed", s.master_seed);
    s.record_stride = r.unsigned_integer("record_stride", s.record_stride);
    try {
        s.integration_mode =
            integration_mode_from_string(r.string("integration_mode", to_string(s.integration_mode)));
        s.drift_mode = drift_mode_from_string(r.string("drift_mode", to_string(s.drift_mode)));
    } catch (const ConfigError& e) {
        throw ConfigError(path + "/" + e.field_path(), e.what());
    }
    r.finish();
    return s;
}

json write_sim(const SimConfig& s)
{
    return {{"dt", s.dt},
            {"horizon", s.horizon},
            {"n_paths", s.n_paths},
            {"seed", s.master_seed},
            {"record_stride", s.record_stride},
            {"integration_mode", to_string(s.integration_mode)},
            {"drift_mode", to_string(s.drift_mode)}};
}

AnalysisSpec read_analysis(const json& j, const std::string& path)
{
    ObjectReader r(j, path);
    AnalysisSpec a;
    a.window = r.optional_number("window");
    a.spread_levels = r.numbers("spread_levels");
    a.hysteresis_lo = r.optional_number("hysteresis_lo");
    a.hysteresis_hi = r.optional_number("hysteresis_hi");
    a.hysteresis_levels = r.unsigned_integer("hysteresis_levels", a.hysteresis_levels);
    a.gridlock_high = r.optional_number("gridlock_high");
    a.gridlock_low = r.optional_number("gridlock_low");
    a.t_eval = r.optional_number("t_eval");
    a.marginal_times = r.numbers("marginal_times");
    a.skew_level = r.optional_number("skew_level");
    a.histogram_bins = r.unsigned_integer("histogram_bins", a.histogram_bins);
    r.finish();
    return a;
}

json write_analysis(const AnalysisSpec& a)
{
    json j = json::object();
    auto put = [&j](const char* key, const std::optional<double>& v) {
        if (v) {
            j[key] = *v;
        }
    };
    put("window", a.window);
    if (!a.spread_levels.empty()) {
        j["spread_levels"] = a.spread_levels;
    }
    put("hysteresis_lo", a.hysteresis_lo);
    put("hysteresis_hi", a.hysteresis_hi);
    j["hysteresis_levels"] = a.hysteresis_levels;
    put("gridlock_high", a.gridlock_high);
    put("gridlock_low", a.gridlock_low);
    put("t_eval", a.t_eval);
    if (!a.marginal_times.empty()) {
        j["marginal_times"] = a.marginal_times;
    }
    put("skew_level", a.skew_level);
    j["histogram_bins"] = a.histogram_bins;
    return j;
}

std::uint64_t fnv1a(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

double ScenarioConfig::window() const
{
    return analysis.window.value_or(0.02 * model.regions.at(0).n_jam());
}

double ScenarioConfig::t_eval() const { return analysis.t_eval.value_or(sim.horizon); }

double ScenarioConfig::gridlock_high() const
{
    return analysis.gridlock_high.value_or(0.75 * model.regions.at(0).n_jam());
}

ScenarioConfig scenario_from_json(const json& doc)
{
    ObjectReader root(doc, "");
    ScenarioConfig c;
    c.name = root.string("name", "");
    c.description = root.string("description", "");

    const json& regions = root.at("regions");
    if (!regions.is_array() || regions.empty()) {
        throw ConfigError("/regions", "expected a non-empty array");
    }
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const std::string path = "/regions/" + std::to_string(i);
        ObjectReader r(regions[i], path);
        c.region_names.push_back(r.string("name", "region" + std::to_string(i + 1)));
        RegionParams p;
        p.boundary = read_boundary(r.at("boundary"), r.child("boundary"));
        p.sigma = r.number("sigma", p.sigma);
        p.q_max = r.number("q_max", p.q_max);
        p.m_soft = r.number("m_soft", p.m_soft);
        c.model.regions.push_back(std::move(p));
        c.model.demand.push_back(r.has("demand") ? read_demand(r.at("demand"), r.child("demand"))
                                                 : DemandProfile{});
        InitialState init;
        if (r.has("initial")) {
            ObjectReader ir(r.at("initial"), r.child("initial"));
            init.n = ir.number("n", 0.0);
            init.z = ir.number("z", 0.0);
            init.n_buf = ir.number("n_buf", 0.0);
            ir.finish();
        }
        c.model.initial.push_back(init);
        r.finish();
    }

    const std::size_t n_regions = c.model.regions.size();
    if (root.has("transfer")) {
        const json& t = root.at("transfer");
        if (!t.is_array()) {
            throw ConfigError("/transfer", "expected a square array of arrays");
        }
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!t[i].is_array()) {
                throw ConfigError("/transfer/" + std::to_string(i), "expected an array");
            }
            std::vector<double> row;
            for (std::size_t j = 0; j < t[i].size(); ++j) {
                if (!t[i][j].is_number()) {
                    throw ConfigError("/transfer/" + std::to_string(i) + "/" + std::to_string(j),
                                      "expected a number");
                }
                row.push_back(t[i][j].get<double>());
            }
            c.model.theta.push_back(std::move(row));
        }
    } else {
        c.model.theta.assign(n_regions, std::vector<double>(n_regions, 0.0));
        for (std::size_t i = 0; i < n_regions; ++i) {
            c.model.theta[i][i] = 1.0;
        }
    }

    if (root.has("simulation")) {
        c.sim = read_sim(root.at("simulation"), "/simulation");
    }
    if (root.has("analysis")) {
        c.analysis = read_analysis(root.at("analysis"), "/analysis");
    }
    root.finish();
    validate_scenario(c);
    return c;
}

void validate_scenario(const ScenarioConfig& c)
{
    const std::size_t n = c.model.regions.size();
    if (n == 0) {
        throw ConfigError("/regions", "at least one region is required");
    }
    for (std::size_t i = 0; i < n; ++i) {
        validate_region(c.model.regions[i], "/regions/" + std::to_string(i));
    }
    validate_transfer_matrix(c.model.theta, n, "/transfer");
    if (c.model.demand.size() != n || c.model.initial.size() != n) {
        throw ConfigError("/regions", "demand and initial state needed for every region");
    }
    const SimConfig& s = c.sim;
    if (!(s.dt > 0.0) || !std::isfinite(s.dt)) {
        throw ConfigError("/simulation/dt", "must be > 0");
    }
    if (!(s.horizon >= s.dt) || !std::isfinite(s.horizon)) {
        throw ConfigError("/simulation/horizon", "must be >= dt");
    }
    if (s.n_paths == 0) {
        throw ConfigError("/simulation/n_paths", "must be >= 1");
    }
    if (s.record_stride == 0) {
        throw ConfigError("/simulation/record_stride", "must be >= 1");
    }
    for (std::size_t i = 0; i < n; ++i) {
        validate_demand(c.model.demand[i], s.horizon,
                        "/regions/" + std::to_string(i) + "/demand");
    }
    // Reuses the integrator's checks on initial states.
    try {
        (void)initial_states(c.model);
    } catch (const ConfigError& e) {
        throw ConfigError("/regions/" + e.field_path(), e.what());
    }
    const AnalysisSpec& a = c.analysis;
    if (a.window && !(*a.window > 0.0)) {
        throw ConfigError("/analysis/window", "must be > 0");
    }
    if (a.hysteresis_lo && a.hysteresis_hi && !(*a.hysteresis_lo < *a.hysteresis_hi)) {
        throw ConfigError("/analysis/hysteresis_hi", "must exceed hysteresis_lo");
    }
    if (a.hysteresis_levels < 2) {
        throw ConfigError("/analysis/hysteresis_levels", "must be >= 2");
    }
    if (a.histogram_bins < 1) {
        throw ConfigError("/analysis/histogram_bins", "must be >= 1");
    }
    if (a.t_eval && !(*a.t_eval >= 0.0 && *a.t_eval <= s.horizon)) {
        throw ConfigError("/analysis/t_eval", "must lie within the horizon");
    }
}

ScenarioConfig parse_scenario(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("JSON parse error: ") + e.what());
    }
    return scenario_from_json(doc);
}

ScenarioConfig load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot open scenario file '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

json scenario_to_json(const ScenarioConfig& c)
{
    json regions = json::array();
    for (std::size_t i = 0; i < c.model.regions.size(); ++i) {
        const RegionParams& p = c.model.regions[i];
        const InitialState& init = c.model.initial[i];
        regions.push_back({{"name", c.region_names.at(i)},
                           {"boundary", write_boundary(p.boundary)},
                           {"sigma", p.sigma},
                           {"q_max", p.q_max},
                           {"m_soft", p.m_soft},
                           {"demand", write_demand(c.model.demand[i])},
                           {"initial", {{"n", init.n}, {"z", init.z}, {"n_buf", init.n_buf}}}});
    }
    return {{"name", c.name},
            {"description", c.description},
            {"regions", regions},
            {"transfer", c.model.theta},
            {"simulation", write_sim(c.sim)},
            {"analysis", write_analysis(c.analysis)}};
}

std::string serialize_scenario(const ScenarioConfig& c) { return scenario_to_json(c).dump(2) + "\n"; }

std::string scenario_fingerprint(const ScenarioConfig& c)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(scenario_to_json(c).dump())));
    return buf;
}

EnsembleResult simulate(const ScenarioConfig& config)
{
    EnsembleResult out = run_ensemble(config.model, config.sim);
    out.fingerprint = scenario_fingerprint(config);
    return out;
}

}  // namespace mfdrift

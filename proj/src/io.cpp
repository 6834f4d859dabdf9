#include "mfdrift/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "mfdrift/error.hpp"

namespace mfdrift {

namespace {

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
            cell.pop_back();
        }
        std::size_t start = 0;
        while (start < cell.size() && cell[start] == ' ') {
            ++start;
        }
        out.push_back(cell.substr(start));
    }
    return out;
}

double parse_number(const std::string& text, std::size_t line, const std::string& column)
{
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ConfigError("line " + std::to_string(line) + ", column " + column,
                          "not a number: '" + text + "'");
    }
    return v;
}

/// Column name -> index; throws when a required column is missing.
std::map<std::string, std::size_t> header_index(const std::string& header,
                                                const std::vector<std::string>& required)
{
    std::map<std::string, std::size_t> idx;
    const auto cells = split_csv(header);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::string name = cells[i];
        // Tolerate a UTF-8 byte order mark on the first column.
        if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) {
            name = name.substr(3);
        }
        idx[name] = i;
    }
    for (const auto& r : required) {
        if (!idx.count(r)) {
            throw ConfigError("line 1", "missing required column '" + r + "'");
        }
    }
    return idx;
}

nlohmann::json sample_json(const LvSample& s)
{
    return {{"n", s.state.n}, {"z", s.state.z}, {"n_buf", s.state.n_buf}, {"lv1", s.lv1},
            {"lv2", s.lv2}};
}

nlohmann::json optional_number(const std::optional<double>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string format_double(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_paths_csv(std::ostream& os, const EnsembleResult& ens)
{
    os << "path_id,t,region_id,n,z,g,n_buf,q_in\n";
    for (const PathRecord& p : ens.paths) {
        for (std::size_t k = 0; k < p.t.size(); ++k) {
            for (std::size_t r = 0; r < p.regions; ++r) {
                const Sample& s = p.at(k, r);
                os << p.path_id << ',' << format_double(p.t[k]) << ',' << r << ','
                   << format_double(s.n) << ',' << format_double(s.z) << ','
                   << format_double(s.g) << ',' << format_double(s.n_buf) << ','
                   << format_double(s.q_in) << '\n';
            }
        }
    }
}

EnsembleResult read_paths_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) {
        throw ConfigError("paths csv", "empty input");
    }
    const auto idx =
        header_index(line, {"path_id", "t", "region_id", "n", "z", "g", "n_buf", "q_in"});
    struct Row
    {
        std::size_t path;
        double t;
        std::size_t region;
        Sample s;
    };
    std::vector<Row> rows;
    std::size_t line_no = 1;
    std::size_t regions = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto c = split_csv(line);
        if (c.size() < idx.size()) {
            throw ConfigError("line " + std::to_string(line_no), "too few columns");
        }
        auto num = [&](const char* name) { return parse_number(c[idx.at(name)], line_no, name); };
        Row r;
        r.path = static_cast<std::size_t>(num("path_id"));
        r.t = num("t");
        r.region = static_cast<std::size_t>(num("region_id"));
        r.s = {num("n"), num("z"), num("g"), num("n_buf"), num("q_in")};
        regions = std::max(regions, r.region + 1);
        rows.push_back(r);
    }
    EnsembleResult ens;
    ens.regions = regions;
    for (const Row& r : rows) {
        if (ens.paths.empty() || ens.paths.back().path_id != r.path) {
            PathRecord p;
            p.path_id = r.path;
            p.regions = regions;
            p.audit.resize(regions);
            ens.paths.push_back(std::move(p));
        }
        PathRecord& p = ens.paths.back();
        if (r.region == 0) {
            p.t.push_back(r.t);
        }
        if (p.samples.size() != (p.t.size() - 1) * regions + r.region) {
            throw ConfigError("paths csv", "rows must be ordered by path, time and region");
        }
        p.samples.push_back(r.s);
    }
    return ens;
}

ObservationSeries read_observations_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) {
        throw ConfigError("observations csv", "empty input");
    }
    const auto idx = header_index(line, {"t", "n"});
    const bool has_q = idx.count("q_in") > 0;
    ObservationSeries obs;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto c = split_csv(line);
        if (c.size() < idx.size()) {
            throw ConfigError("line " + std::to_string(line_no), "too few columns");
        }
        obs.t.push_back(parse_number(c[idx.at("t")], line_no, "t"));
        obs.n.push_back(parse_number(c[idx.at("n")], line_no, "n"));
        if (has_q) {
            obs.q_in.push_back(parse_number(c[idx.at("q_in")], line_no, "q_in"));
        }
    }
    return obs;
}

void write_observations_csv(std::ostream& os, const ObservationSeries& obs)
{
    os << "t,n,q_in\n";
    for (std::size_t k = 0; k < obs.size(); ++k) {
        os << format_double(obs.t[k]) << ',' << format_double(obs.n[k]) << ','
           << format_double(obs.q_in[k]) << '\n';
    }
}

void write_histogram_csv(std::ostream& os, const Histogram& h)
{
    os << "bin_center,density\n";
    const auto centers = h.centers();
    for (std::size_t i = 0; i < centers.size(); ++i) {
        os << format_double(centers[i]) << ',' << format_double(h.density[i]) << '\n';
    }
}

void write_hysteresis_csv(std::ostream& os, const HysteresisCurve& c)
{
    os << "n,mean_decrease,stderr,count\n";
    for (std::size_t i = 0; i < c.levels.size(); ++i) {
        os << format_double(c.levels[i]) << ',' << format_double(c.mean_decrease[i]) << ','
           << format_double(c.std_error[i]) << ',' << c.count[i] << '\n';
    }
}

void write_heatmap_csv(std::ostream& os, const Heatmap& h)
{
    os << "x_bin,y_bin,count\n";
    for (std::size_t i = 0; i < h.nx(); ++i) {
        const double x = 0.5 * (h.x_edges[i] + h.x_edges[i + 1]);
        for (std::size_t j = 0; j < h.ny(); ++j) {
            const double y = 0.5 * (h.y_edges[j] + h.y_edges[j + 1]);
            os << format_double(x) << ',' << format_double(y) << ',' << h.at(i, j) << '\n';
        }
    }
}

void write_density_csv(std::ostream& os, const FpeSolution& sol)
{
    os << "t,z,density\n";
    for (const DensityField& d : sol.snapshots) {
        for (std::size_t j = 0; j < d.values.size(); ++j) {
            os << format_double(d.t) << ',' << format_double(sol.grid.center(j)) << ','
               << format_double(d.values[j]) << '\n';
        }
    }
}

void write_lv_field_csv(std::ostream& os, const LvReport& report, double sigma)
{
    os << "n,z,n_buf,lv,lv1,lv2\n";
    for (const LvSample& s : report.samples) {
        os << format_double(s.state.n) << ',' << format_double(s.state.z) << ','
           << format_double(s.state.n_buf) << ',' << format_double(s.lv2 - sigma * sigma * s.lv1)
           << ',' << format_double(s.lv1) << ',' << format_double(s.lv2) << '\n';
    }
}

nlohmann::json to_json(const EquilibriumPoint& e)
{
    return {{"kind", to_string(e.kind)},
            {"congested", e.congested},
            {"n_eq", e.n_eq},
            {"z_eq", e.z_eq},
            {"n_buf_eq", e.n_buf_eq},
            {"residual_n", e.residual_n},
            {"residual_z", e.residual_z},
            {"residual_buf", e.residual_buf}};
}

nlohmann::json to_json(const LvReport& r)
{
    nlohmann::json j;
    j["equilibrium"] = to_json(r.eq);
    j["q_raw"] = r.q_raw;
    j["grid"] = {{"n_points", r.n_points}, {"z_points", r.z_points}, {"buf_points", r.buf_points}};
    j["evaluated"] = r.evaluated;
    j["skipped_degenerate"] = r.skipped_degenerate;
    j["states"] = {{"cap_sigma", r.upper_bound_states},
                   {"floor_sigma", r.lower_bound_states},
                   {"violate_all_sigma", r.violating_states},
                   {"hold_all_sigma", r.unconditional_states}};
    j["sigma_max"] = optional_number(r.sigma_max);
    j["sigma_min"] = optional_number(r.sigma_min);
    j["binding_upper"] = r.binding_upper ? sample_json(*r.binding_upper) : nlohmann::json(nullptr);
    j["binding_lower"] = r.binding_lower ? sample_json(*r.binding_lower) : nlohmann::json(nullptr);
    j["worst_violation"] =
        r.worst_violation ? sample_json(*r.worst_violation) : nlohmann::json(nullptr);
    j["vacuous_upper_bound"] = r.vacuous();
    j["summary"] = r.summary();
    return j;
}

nlohmann::json to_json(const CalibrationResult& r)
{
    nlohmann::json trace = nlohmann::json::array();
    for (const TraceEntry& t : r.trace) {
        trace.push_back({{"iteration", t.iteration},
                         {"best_sigma", t.best_sigma},
                         {"best_log_likelihood", t.best_log_likelihood}});
    }
    nlohmann::json j;
    j["sigma_star"] = r.sigma_star;
    j["log_likelihood"] = r.log_likelihood;
    j["std_error"] = r.std_error;
    j["evaluations"] = r.evaluations;
    j["inflow_assumed"] = r.inflow_assumed;
    if (r.inflow_assumed) {
        j["warning"] = "inflow was not observed; a constant inflow was assumed";
    }
    j["search"] = {{"sigma_lo", r.search.sigma_lo},
                   {"sigma_hi", r.search.sigma_hi},
                   {"population", r.search.population},
                   {"iterations", r.search.iterations},
                   {"inertia", r.search.inertia},
                   {"cognitive", r.search.cognitive},
                   {"social", r.search.social}};
    j["likelihood"] = {{"n_particles", r.likelihood.n_particles},
                       {"seed", r.likelihood.seed},
                       {"scheme", to_string(r.likelihood.scheme)},
                       {"substeps", r.likelihood.substeps},
                       {"drift_mode", to_string(r.likelihood.mode)}};
    j["trace"] = trace;
    return j;
}

nlohmann::json audit_summary(const EnsembleResult& ens)
{
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t r = 0; r < ens.regions; ++r) {
        FlowAudit total;
        double worst_flow = 0.0;
        double worst_buf = 0.0;
        double worst_clamp = 0.0;
        for (const PathRecord& p : ens.paths) {
            const FlowAudit& a = p.audit[r];
            total.raw_demand += a.raw_demand;
            total.inflow += a.inflow;
            total.outflow += a.outflow;
            total.transfer_in += a.transfer_in;
            total.delta_n += a.delta_n;
            total.delta_buf += a.delta_buf;
            total.clamp_n += a.clamp_n;
            total.clamp_buf += a.clamp_buf;
            const double tp = a.throughput();
            if (tp > 0.0) {
                worst_flow = std::max(worst_flow, std::fabs(a.flow_residual()) / tp);
                worst_buf = std::max(worst_buf, std::fabs(a.buffer_residual()) / tp);
                worst_clamp = std::max(
                    worst_clamp, (std::fabs(a.clamp_n) + std::fabs(a.clamp_buf)) / tp);
            }
        }
        out.push_back({{"region", r},
                       {"raw_demand", total.raw_demand},
                       {"inflow", total.inflow},
                       {"outflow", total.outflow},
                       {"transfer_in", total.transfer_in},
                       {"clamp_n", total.clamp_n},
                       {"clamp_buf", total.clamp_buf},
                       {"worst_flow_residual", worst_flow},
                       {"worst_buffer_residual", worst_buf},
                       {"worst_clamp_share", worst_clamp}});
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& text)
{
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path());
    }
    std::ofstream os(p, std::ios::binary);
    os << text;
    if (!os) {
        throw Error("cannot write " + path);
    }
}

std::string read_text_file(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw ConfigError(path, "cannot open file");
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace mfdrift

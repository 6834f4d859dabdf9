#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mfdrift/integrator.hpp"

namespace mfdrift {

/// Optional analysis settings; unset values fall back to defaults derived
/// from the first region (see the accessors).
struct AnalysisSpec
{
    std::optional<double> window;           ///< half-width for conditional samples
    std::vector<double> spread_levels;      ///< accumulations for exit-flow histograms
    std::optional<double> hysteresis_lo;
    std::optional<double> hysteresis_hi;
    std::size_t hysteresis_levels = 16;
    std::optional<double> gridlock_high;    ///< threshold for the congested fraction
    std::optional<double> gridlock_low;     ///< threshold for the recovered fraction
    std::optional<double> t_eval;
    std::vector<double> marginal_times;
    std::optional<double> skew_level;       ///< accumulation for the skewness probe
    std::size_t histogram_bins = 40;
};

struct ScenarioConfig
{
    std::string name;
    std::string description;
    std::vector<std::string> region_names;
    Model model;
    SimConfig sim;
    AnalysisSpec analysis;

    double window() const;
    double t_eval() const;
    double gridlock_high() const;
};

/// Parse and fully validate. Unknown keys are rejected; errors carry a JSON
/// pointer to the offending field (parse errors carry line and column).
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig scenario_from_json(const nlohmann::json& doc);
ScenarioConfig load_scenario(const std::string& path);

nlohmann::json scenario_to_json(const ScenarioConfig& config);
std::string serialize_scenario(const ScenarioConfig& config);

/// Structural checks beyond the schema (dimensions, curves, demand).
void validate_scenario(const ScenarioConfig& config);

/// 16 hex digits identifying the canonical serialized form.
std::string scenario_fingerprint(const ScenarioConfig& config);

std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
std::string preset_json(const std::string& name);
ScenarioConfig load_preset(const std::string& name);

/// Runs the ensemble and stamps the scenario fingerprint onto it.
EnsembleResult simulate(const ScenarioConfig& config);

}  // namespace mfdrift

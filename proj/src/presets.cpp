#include <map>

#include "mfdrift/error.hpp"
#include "mfdrift/scenario.hpp"

namespace mfdrift {

namespace {

// Demand magnitudes are shape approximations of peak-hour profiles, not
// measured data.
const std::map<std::string, std::string>& preset_table()
{
    static const std::map<std::string, std::string> table = {
        {"single-polynomial", R"json({
  "name": "single-polynomial",
  "description": "One reservoir with a cubic exit-flow curve and a symmetric 15% band; a peak-hour pulse drives it past the critical accumulation, then a lower constant demand lets it recover.",
  "regions": [{
    "name": "region1",
    "boundary": {
      "curve": {"family": "polynomial", "a": 3.298e-11, "b": -7.37423e-7, "c": 4.52e-3},
      "band_factor": 0.15, "eta": 0.5, "n_jam": 10000
    },
    "sigma": 0.04, "q_max": 12, "m_soft": 1,
    "demand": [
      {"type": "pulse", "baseline": 0, "amplitude": 8.5, "t_peak": 1250, "half_width": 1250},
      {"type": "constant", "level": 3.5}
    ]
  }],
  "simulation": {"dt": 0.5, "horizon": 5000, "n_paths": 1000, "seed": 42, "record_stride": 10,
                 "integration_mode": "latent", "drift_mode": "ito"},
  "analysis": {"spread_levels": [2000, 3000, 4000, 5000, 6000], "hysteresis_lo": 3000,
               "hysteresis_hi": 6000, "hysteresis_levels": 16, "marginal_times": [500, 3000],
               "skew_level": 4000}
})json"},
        {"single-exponential", R"json({
  "name": "single-exponential",
  "description": "One reservoir with exponential upper and lower exit-flow curves fitted in vehicles per minute; a peak-hour pulse carries paths to the tipping accumulation, after which some recover and some run into gridlock.",
  "regions": [{
    "name": "region1",
    "boundary": {
      "upper": {"family": "exponential", "p1": 4.7093e-2, "p2": 1.4137, "n_crt": 1408.4875, "scale": 0.016666666666666666},
      "lower": {"family": "exponential", "p1": 1.5874e-3, "p2": 1.8538, "n_crt": 1502.2319, "scale": 0.016666666666666666},
      "eta": 0.5, "n_jam": 8000
    },
    "sigma": 0.04, "q_max": 12, "m_soft": 1,
    "demand": [
      {"type": "constant", "level": 3.0},
      {"type": "pulse", "baseline": 0, "amplitude": 6.0, "t_peak": 2000, "half_width": 1000}
    ]
  }],
  "simulation": {"dt": 0.5, "horizon": 5000, "n_paths": 1000, "seed": 42, "record_stride": 10,
                 "integration_mode": "latent", "drift_mode": "ito"},
  "analysis": {"gridlock_high": 6000, "gridlock_low": 1000, "spread_levels": [500, 1000, 1500, 2000]}
})json"},
        {"skew-eta-0.8", R"json({
  "name": "skew-eta-0.8",
  "description": "Cubic exit-flow curve with the expectation curve placed at 80% of the band; exit-flow samples at fixed accumulation should skew negative.",
  "regions": [{
    "name": "region1",
    "boundary": {
      "curve": {"family": "polynomial", "a": 3.298e-11, "b": -7.37423e-7, "c": 4.52e-3},
      "band_factor": 0.15, "eta": 0.8, "n_jam": 10000
    },
    "sigma": 0.04, "q_max": 12, "m_soft": 1,
    "demand": [
      {"type": "pulse", "baseline": 0, "amplitude": 8.5, "t_peak": 1250, "half_width": 1250},
      {"type": "constant", "level": 3.5}
    ]
  }],
  "simulation": {"dt": 0.5, "horizon": 5000, "n_paths": 1000, "seed": 42, "record_stride": 10,
                 "integration_mode": "latent", "drift_mode": "ito"},
  "analysis": {"skew_level": 2000, "spread_levels": [1000, 2000, 3000]}
})json"},
        {"skew-eta-0.2", R"json({
  "name": "skew-eta-0.2",
  "description": "Cubic exit-flow curve with the expectation curve placed at 20% of the band; exit-flow samples at fixed accumulation should skew positive.",
  "regions": [{
    "name": "region1",
    "boundary": {
      "curve": {"family": "polynomial", "a": 3.298e-11, "b": -7.37423e-7, "c": 4.52e-3},
      "band_factor": 0.15, "eta": 0.2, "n_jam": 10000
    },
    "sigma": 0.04, "q_max": 12, "m_soft": 1,
    "demand": [
      {"type": "pulse", "baseline": 0, "amplitude": 8.5, "t_peak": 1250, "half_width": 1250},
      {"type": "constant", "level": 3.5}
    ]
  }],
  "simulation": {"dt": 0.5, "horizon": 5000, "n_paths": 1000, "seed": 42, "record_stride": 10,
                 "integration_mode": "latent", "drift_mode": "ito"},
  "analysis": {"skew_level": 2000, "spread_levels": [1000, 2000, 3000]}
})json"},
        {"two-region", R"json({
  "name": "two-region",
  "description": "Two coupled reservoirs with cubic exit-flow curves; 70% of region 1 trips continue into region 2 and 50% of region 2 trips continue into region 1; demand peaks are staggered.",
  "regions": [
    {
      "name": "region1",
      "boundary": {
        "curve": {"family": "polynomial", "a": 3.298e-11, "b": -7.37423e-7, "c": 4.52e-3},
        "band_factor": 0.15, "eta": 0.5, "n_jam": 10000
      },
      "sigma": 0.04, "q_max": 12, "m_soft": 1,
      "demand": [
        {"type": "constant", "level": 1.0},
        {"type": "pulse", "baseline": 0, "amplitude": 3.0, "t_peak": 1200, "half_width": 900}
      ]
    },
    {
      "name": "region2",
      "boundary": {
        "curve": {"family": "polynomial", "a": 3.298e-11, "b": -7.37423e-7, "c": 4.52e-3},
        "band_factor": 0.15, "eta": 0.5, "n_jam": 10000
      },
      "sigma": 0.04, "q_max": 12, "m_soft": 1,
      "demand": [
        {"type": "constant", "level": 1.0},
        {"type": "pulse", "baseline": 0, "amplitude": 3.0, "t_peak": 2000, "half_width": 900}
      ]
    }
  ],
  "transfer": [[0.3, 0.7], [0.5, 0.5]],
  "simulation": {"dt": 0.5, "horizon": 4000, "n_paths": 1000, "seed": 42, "record_stride": 10,
                 "integration_mode": "latent", "drift_mode": "ito"},
  "analysis": {"spread_levels": [1000, 2000, 3000]}
})json"},
    };
    return table;
}

}  // namespace

std::vector<std::string> preset_names()
{
    std::vector<std::string> out;
    for (const auto& [name, text] : preset_table()) {
        out.push_back(name);
    }
    return out;
}

bool is_preset(const std::string& name) { return preset_table().count(name) > 0; }

std::string preset_json(const std::string& name)
{
    const auto it = preset_table().find(name);
    if (it == preset_table().end()) {
        std::string known;
        for (const auto& n : preset_names()) {
            known += (known.empty() ? "" : ", ") + n;
        }
        throw ConfigError("preset", "unknown preset '" + name + "' (known: " + known + ")");
    }
    return it->second;
}

ScenarioConfig load_preset(const std::string& name) { return parse_scenario(preset_json(name)); }

}  // namespace mfdrift

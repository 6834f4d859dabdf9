#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace mfdrift {

/// `level` on [t0, t1), zero elsewhere.
struct ConstantSegment
{
    double level = 0.0;
    double t0 = 0.0;
    double t1 = std::numeric_limits<double>::infinity();
};

/// baseline + amplitude * max(0, 1 - ((t - t_peak) / half_width)^2)
struct ParabolicPulse
{
    double baseline = 0.0;
    double amplitude = 0.0;
    double t_peak = 0.0;
    double half_width = 1.0;
};

using DemandSegment = std::variant<ConstantSegment, ParabolicPulse>;

/// Raw demand q_raw(t): sum of all segments.
struct DemandProfile
{
    std::vector<DemandSegment> segments;
};

double eval_demand(const DemandProfile& profile, double t);

/// Throws ConfigError if the profile is negative anywhere on [0, horizon].
void validate_demand(const DemandProfile& profile, double horizon, const std::string& field_path);

}  // namespace mfdrift

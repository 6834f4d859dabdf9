#include "mfdrift/demand.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfdrift/error.hpp"

namespace mfdrift {

double eval_demand(const DemandProfile& profile, double t)
{
    double q = 0.0;
    for (const auto& seg : profile.segments) {
        if (const auto* c = std::get_if<ConstantSegment>(&seg)) {
            if (t >= c->t0 && t < c->t1) {
                q += c->level;
            }
        } else {
            const auto& p = std::get<ParabolicPulse>(seg);
            const double x = (t - p.t_peak) / p.half_width;
            q += p.baseline + p.amplitude * std::max(0.0, 1.0 - x * x);
        }
    }
    return q;
}

void validate_demand(const DemandProfile& profile, double horizon, const std::string& field_path)
{
    for (std::size_t i = 0; i < profile.segments.size(); ++i) {
        const std::string path = field_path + "/" + std::to_string(i);
        if (const auto* c = std::get_if<ConstantSegment>(&profile.segments[i])) {
            if (!std::isfinite(c->level) || !(c->t1 >= c->t0) || std::isnan(c->t1)) {
                throw ConfigError(path, "constant segment needs finite level and t1 >= t0");
            }
        } else {
            const auto& p = std::get<ParabolicPulse>(profile.segments[i]);
            if (!std::isfinite(p.baseline) || !std::isfinite(p.amplitude) ||
                !std::isfinite(p.t_peak) || !(p.half_width > 0.0)) {
                throw ConfigError(path, "pulse needs finite values and half_width > 0");
            }
        }
    }
    constexpr int kGrid = 2000;
    for (int k = 0; k <= kGrid; ++k) {
        const double t = horizon * k / kGrid;
        const double q = eval_demand(profile, t);
        if (!(q >= 0.0)) {
            std::ostringstream os;
            os << "demand is negative at t = " << t << " (" << q << ")";
            throw ConfigError(field_path, os.str());
        }
    }
}

}  // namespace mfdrift

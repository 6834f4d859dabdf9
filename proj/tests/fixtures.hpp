#pragma once

#include "mfdrift/network.hpp"
#include "mfdrift/scenario.hpp"

namespace fixtures {

inline mfdrift::MfdCurveSpec constant_curve(double level)
{
    return {mfdrift::TabulatedCurve{{{0.0, level}, {20000.0, level}}}, 1.0};
}

/// Flat base curve `level` with a +-`half_width` band, so gamma = +-half_width
/// at every n when eta = 0.5.
inline mfdrift::RegionParams flat_band(double level, double half_width, double sigma = 0.1)
{
    mfdrift::RegionParams p;
    p.boundary.envelope = mfdrift::BandedCurve{constant_curve(level), half_width / level};
    p.boundary.eta = 0.5;
    p.boundary.n_jam = 10000.0;
    p.sigma = sigma;
    p.q_max = 5.0;
    p.m_soft = 1.0;
    return p;
}

inline mfdrift::GammaDelta band(double gamma_plus, double gamma_minus)
{
    mfdrift::GammaDelta gd;
    gd.gamma_plus = gamma_plus;
    gd.gamma_minus = gamma_minus;
    gd.delta_minus = gamma_plus - gamma_minus;
    gd.delta_plus = gamma_plus + gamma_minus;
    return gd;
}

inline mfdrift::RegionParams polynomial_region()
{
    return mfdrift::load_preset("single-polynomial").model.regions.at(0);
}

}  // namespace fixtures

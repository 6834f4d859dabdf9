#include "mfdrift/mfd_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfdrift/error.hpp"

namespace mfdrift {

namespace {

template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double eval_tabulated(const TabulatedCurve& curve, double n)
{
    const auto& pts = curve.points;
    if (pts.empty()) {
        return 0.0;
    }
    if (n <= pts.front().n) {
        return pts.front().flow;
    }
    if (n >= pts.back().n) {
        return pts.back().flow;
    }
    const auto upper = std::upper_bound(pts.begin(), pts.end(), n,
                                        [](double x, const CurvePoint& p) { return x < p.n; });
    const auto lower = upper - 1;
    const double frac = (n - lower->n) / (upper->n - lower->n);
    return lower->flow + frac * (upper->flow - lower->flow);
}

double slope_tabulated(const TabulatedCurve& curve, double n)
{
    const auto& pts = curve.points;
    if (pts.size() < 2 || n < pts.front().n || n >= pts.back().n) {
        return 0.0;
    }
    const auto upper = std::upper_bound(pts.begin(), pts.end(), n,
                                        [](double x, const CurvePoint& p) { return x < p.n; });
    const auto lower = upper - 1;
    return (upper->flow - lower->flow) / (upper->n - lower->n);
}

double golden_section_max(const MfdCurveSpec& spec, double lo, double hi)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = eval_curve(spec, c);
    double fd = eval_curve(spec, d);
    const double tol = 1e-10 * std::max(1.0, hi - lo);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval_curve(spec, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval_curve(spec, d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double eval_curve(const MfdCurveSpec& spec, double n)
{
    if (!(n >= 0.0)) {
        throw DomainError("eval_curve: accumulation must be >= 0, got " + std::to_string(n));
    }
    const double raw = std::visit(
        overloaded{
            [n](const PolynomialCurve& p) { return ((p.a * n + p.b) * n + p.c) * n; },
            [n](const ExponentialCurve& e) {
                if (n == 0.0) {
                    return 0.0;
                }
                const double log_n = std::log(n);
                const double ratio_pow = std::exp(e.p2 * (log_n - std::log(e.n_crt)));
                return e.p1 * std::exp(e.p2 * log_n - ratio_pow);
            },
            [n](const TabulatedCurve& t) { return eval_tabulated(t, n); },
        },
        spec.shape);
    return raw * spec.flow_scale;
}

double curve_slope(const MfdCurveSpec& spec, double n)
{
    if (!(n >= 0.0)) {
        throw DomainError("curve_slope: accumulation must be >= 0");
    }
    const double raw = std::visit(
        overloaded{
            [n](const PolynomialCurve& p) { return (3.0 * p.a * n + 2.0 * p.b) * n + p.c; },
            [n, &spec](const ExponentialCurve& e) {
                if (n == 0.0) {
                    if (e.p2 > 1.0) return 0.0;
                    if (e.p2 == 1.0) return e.p1;
                    return std::numeric_limits<double>::infinity();
                }
                const double g = eval_curve(spec, n) / spec.flow_scale;
                return g * (e.p2 / n) * (1.0 - std::pow(n / e.n_crt, e.p2));
            },
            [n](const TabulatedCurve& t) { return slope_tabulated(t, n); },
        },
        spec.shape);
    return raw * spec.flow_scale;
}

CharacteristicCurves characteristic_curves(const BoundarySpec& spec, double n)
{
    if (!(n >= 0.0 && n <= spec.n_jam)) {
        std::ostringstream os;
        os << "characteristic_curves: accumulation " << n << " outside [0, " << spec.n_jam << "]";
        throw DomainError(os.str());
    }
    CharacteristicCurves out;
    std::visit(overloaded{
                   [&](const CurvePair& pair) {
                       out.g_up = eval_curve(pair.upper, n);
                       out.g_lw = eval_curve(pair.lower, n);
                   },
                   [&](const BandedCurve& band) {
                       const double g = eval_curve(band.base, n);
                       out.g_up = (1.0 + band.band_factor) * g;
                       out.g_lw = (1.0 - band.band_factor) * g;
                   },
               },
               spec.envelope);
    out.g_mi = out.g_lw + spec.eta * (out.g_up - out.g_lw);
    return out;
}

GammaDelta gamma_delta_from(const CharacteristicCurves& curves, double flow_floor)
{
    GammaDelta gd;
    gd.gamma_plus = curves.g_up - curves.g_mi;
    gd.gamma_minus = curves.g_lw - curves.g_mi;
    gd.delta_minus = gd.gamma_plus - gd.gamma_minus;
    gd.delta_plus = gd.gamma_plus + gd.gamma_minus;
    gd.degenerate = !(gd.delta_minus >= flow_floor);
    return gd;
}

GammaDelta gamma_delta(const BoundarySpec& spec, double n)
{
    return gamma_delta_from(characteristic_curves(spec, n), spec.flow_floor);
}

double critical_accumulation(const MfdCurveSpec& spec, double n_jam)
{
    auto no_max = [](const std::string& why) {
        return DomainError("critical_accumulation: no interior maximum on [0, n_jam]: " + why);
    };
    return std::visit(
        overloaded{
            [&](const PolynomialCurve& p) {
                // Roots of g'(n) = 3a n^2 + 2b n + c with g''(n) = 6a n + 2b < 0.
                std::vector<double> roots;
                if (p.a == 0.0) {
                    if (p.b != 0.0) {
                        roots.push_back(-p.c / (2.0 * p.b));
                    }
                } else {
                    const double qa = 3.0 * p.a;
                    const double qb = 2.0 * p.b;
                    const double disc = qb * qb - 4.0 * qa * p.c;
                    if (disc >= 0.0) {
                        // Stable quadratic roots.
                        const double s = std::sqrt(disc);
                        const double q = -0.5 * (qb + std::copysign(s, qb));
                        roots.push_back(q / qa);
                        if (q != 0.0) {
                            roots.push_back(p.c / q);
                        }
                    }
                }
                double best = std::numeric_limits<double>::quiet_NaN();
                for (double r : roots) {
                    if (r > 0.0 && r < n_jam && 6.0 * p.a * r + 2.0 * p.b < 0.0) {
                        if (std::isnan(best) || r < best) {
                            best = r;
                        }
                    }
                }
                if (std::isnan(best)) {
                    throw no_max("polynomial is monotone on the domain");
                }
                return best;
            },
            [&](const ExponentialCurve& e) {
                // d/dn [p2 ln n - (n/n_crt)^p2] = 0  =>  n = n_crt.
                if (!(e.p2 > 0.0) || !(e.n_crt > 0.0) || e.n_crt >= n_jam) {
                    throw no_max("n_crt outside the domain");
                }
                return e.n_crt;
            },
            [&](const TabulatedCurve& t) {
                if (t.points.size() < 3) {
                    throw no_max("fewer than three table points");
                }
                const double lo = std::max(0.0, t.points.front().n);
                const double hi = std::min(n_jam, t.points.back().n);
                const double arg = golden_section_max(spec, lo, hi);
                const double peak = eval_curve(spec, arg);
                const double tol = 1e-12 * std::max(1.0, std::fabs(peak));
                if (!(peak > eval_curve(spec, lo) + tol && peak > eval_curve(spec, hi) + tol)) {
                    throw no_max("tabulated curve is monotone on the domain");
                }
                return arg;
            },
        },
        spec.shape);
}

void validate_curve(const MfdCurveSpec& spec, double n_jam, const std::string& field_path)
{
    if (!(spec.flow_scale > 0.0) || !std::isfinite(spec.flow_scale)) {
        throw ConfigError(field_path + "/scale", "must be a positive finite number");
    }
    std::visit(overloaded{
                   [&](const PolynomialCurve& p) {
                       if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.c)) {
                           throw ConfigError(field_path, "polynomial coefficients must be finite");
                       }
                   },
                   [&](const ExponentialCurve& e) {
                       if (!(e.p1 >= 0.0) || !(e.p2 > 0.0) || !(e.n_crt > 0.0) ||
                           !std::isfinite(e.p1) || !std::isfinite(e.p2) || !std::isfinite(e.n_crt)) {
                           throw ConfigError(field_path, "exponential requires p1 >= 0, p2 > 0, n_crt > 0");
                       }
                   },
                   [&](const TabulatedCurve& t) {
                       if (t.points.size() < 2) {
                           throw ConfigError(field_path + "/points", "needs at least two points");
                       }
                       for (std::size_t i = 0; i < t.points.size(); ++i) {
                           if (!std::isfinite(t.points[i].n) || !std::isfinite(t.points[i].flow)) {
                               throw ConfigError(field_path + "/points/" + std::to_string(i),
                                                 "non-finite value");
                           }
                           if (i > 0 && !(t.points[i].n > t.points[i - 1].n)) {
                               throw ConfigError(field_path + "/points/" + std::to_string(i),
                                                 "accumulations must be strictly increasing");
                           }
                       }
                   },
               },
               spec.shape);
    constexpr int kGrid = 1000;
    for (int i = 0; i <= kGrid; ++i) {
        const double n = n_jam * i / kGrid;
        const double g = eval_curve(spec, n);
        if (!(g >= 0.0) || !std::isfinite(g)) {
            std::ostringstream os;
            os << "curve is negative or non-finite at n = " << n << " (value " << g << ")";
            throw ConfigError(field_path, os.str());
        }
    }
}

void validate_boundary(const BoundarySpec& spec, const std::string& field_path)
{
    if (!(spec.n_jam > 0.0) || !std::isfinite(spec.n_jam)) {
        throw ConfigError(field_path + "/n_jam", "must be positive");
    }
    if (!(spec.eta > 0.0 && spec.eta < 1.0)) {
        throw ConfigError(field_path + "/eta", "must lie in (0, 1)");
    }
    if (!(spec.flow_floor > 0.0)) {
        throw ConfigError(field_path + "/flow_floor", "must be positive");
    }
    std::visit(overloaded{
                   [&](const CurvePair& pair) {
                       validate_curve(pair.upper, spec.n_jam, field_path + "/upper");
                       validate_curve(pair.lower, spec.n_jam, field_path + "/lower");
                   },
                   [&](const BandedCurve& band) {
                       if (!(band.band_factor >= 0.0 && band.band_factor < 1.0)) {
                           throw ConfigError(field_path + "/band_factor", "must lie in [0, 1)");
                       }
                       validate_curve(band.base, spec.n_jam, field_path + "/curve");
                   },
               },
               spec.envelope);
    constexpr int kGrid = 1000;
    for (int i = 0; i <= kGrid; ++i) {
        const double n = spec.n_jam * i / kGrid;
        const auto c = characteristic_curves(spec, n);
        if (!(c.g_up >= c.g_lw) || !(c.g_lw >= 0.0)) {
            std::ostringstream os;
            os << "requires g_up >= g_lw >= 0; violated at n = " << n << " (g_up " << c.g_up
               << ", g_lw " << c.g_lw << ")";
            throw ConfigError(field_path, os.str());
        }
    }
}

const MfdCurveSpec& reference_curve(const BoundarySpec& spec)
{
    if (const auto* band = std::get_if<BandedCurve>(&spec.envelope)) {
        return band->base;
    }
    return std::get<CurvePair>(spec.envelope).upper;
}

}  // namespace mfdrift

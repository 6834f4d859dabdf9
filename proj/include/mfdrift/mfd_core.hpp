#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mfdrift {

/// g(n) = a n^3 + b n^2 + c n
struct PolynomialCurve
{
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// g(n) = p1 n^p2 exp(-(n / n_crt)^p2)
struct ExponentialCurve
{
    double p1 = 0.0;
    double p2 = 1.0;
    double n_crt = 1.0;
};

struct CurvePoint
{
    double n = 0.0;
    double flow = 0.0;
};

/// Piecewise-linear curve through sorted points, clamped outside the table.
struct TabulatedCurve
{
    std::vector<CurvePoint> points;
};

/// One exit-flow curve. `flow_scale` converts the family's native flow unit
/// into vehicles per second (1.0 when the coefficients are already per second).
struct MfdCurveSpec
{
    std::variant<PolynomialCurve, ExponentialCurve, TabulatedCurve> shape;
    double flow_scale = 1.0;
};

/// Two explicit boundary curves.
struct CurvePair
{
    MfdCurveSpec upper;
    MfdCurveSpec lower;
};

/// A single base curve g with g_up = (1 + beta) g and g_lw = (1 - beta) g.
struct BandedCurve
{
    MfdCurveSpec base;
    double band_factor = 0.15;
};

struct BoundarySpec
{
    std::variant<CurvePair, BandedCurve> envelope;
    double eta = 0.5;          ///< position of g_mi inside the band, (0, 1)
    double n_jam = 10000.0;    ///< vehicles
    double flow_floor = 1e-6;  ///< band widths below this are degenerate
};

struct CharacteristicCurves
{
    double g_up = 0.0;
    double g_lw = 0.0;
    double g_mi = 0.0;
};

/// Signed distances of the band edges from g_mi and their combinations.
/// gamma_minus is <= 0 (lower edge minus g_mi).
struct GammaDelta
{
    double gamma_plus = 0.0;
    double gamma_minus = 0.0;
    double delta_minus = 0.0;  ///< gamma_plus - gamma_minus, the band width
    double delta_plus = 0.0;   ///< gamma_plus + gamma_minus
    bool degenerate = false;
};

/// Throws DomainError for n < 0.
double eval_curve(const MfdCurveSpec& spec, double n);

/// dg/dn. Tabulated curves return the slope of the active segment.
double curve_slope(const MfdCurveSpec& spec, double n);

/// Throws DomainError outside [0, n_jam].
CharacteristicCurves characteristic_curves(const BoundarySpec& spec, double n);

GammaDelta gamma_delta(const BoundarySpec& spec, double n);

/// Build Gamma/Delta directly from curve values (used by tests and grids).
GammaDelta gamma_delta_from(const CharacteristicCurves& curves, double flow_floor = 1e-6);

/// Location of the interior maximum on [0, n_jam]. Throws DomainError when
/// the curve has no interior maximum there.
double critical_accumulation(const MfdCurveSpec& spec, double n_jam);

/// Check curve and boundary invariants on a dense grid; throws ConfigError
/// naming `field_path` on failure.
void validate_curve(const MfdCurveSpec& spec, double n_jam, const std::string& field_path);
void validate_boundary(const BoundarySpec& spec, const std::string& field_path);

/// The mid curve used for critical-point queries: g_mi as a standalone
/// function is not a single family, so this returns the band's base curve
/// when banded, else the upper curve.
const MfdCurveSpec& reference_curve(const BoundarySpec& spec);

}  // namespace mfdrift

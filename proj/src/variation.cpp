#include "mfdrift/variation.hpp"

#include <cmath>
#include <sstream>

#include "mfdrift/error.hpp"

namespace mfdrift {

namespace {

// logistic(x) = 1 / (1 + e^-x) = (tanh(x/2) + 1) / 2
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double transform_w_to_z(double w, const GammaDelta& gd)
{
    if (gd.degenerate) {
        return 0.0;
    }
    // Anchor at the nearer edge so saturated w keeps relative precision.
    if (w > 0.0) {
        return gd.gamma_plus - logistic(-2.0 * w) * gd.delta_minus;
    }
    return gd.gamma_minus + logistic(2.0 * w) * gd.delta_minus;
}

double inverse_transform(double z, const GammaDelta& gd)
{
    if (gd.degenerate) {
        throw DomainError("inverse_transform: degenerate band");
    }
    const double lo = z - gd.gamma_minus;
    const double hi = gd.gamma_plus - z;
    if (!(lo > 0.0 && hi > 0.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "inverse_transform: z = " << z << " not inside (" << gd.gamma_minus << ", "
           << gd.gamma_plus << ")";
        throw DomainError(os.str());
    }
    return 0.5 * std::log(lo / hi);
}

double latent_for_fraction(double fraction)
{
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw DomainError("latent_for_fraction: fraction must lie in (0, 1)");
    }
    return std::atanh(2.0 * fraction - 1.0);
}

DriftDiffusion drift_diffusion(double z, const GammaDelta& gd, double sigma, DriftMode mode)
{
    if (gd.degenerate) {
        return {};
    }
    const double u = gd.delta_plus - 2.0 * z;
    // core = 4 (z - gamma_minus)(gamma_plus - z); vanishes at both edges.
    const double core = gd.delta_minus * gd.delta_minus - u * u;
    const double half_var = 0.5 * sigma * sigma;
    DriftDiffusion out;
    out.s = sigma * core / (2.0 * gd.delta_minus);
    if (mode == DriftMode::ito_correct) {
        out.mu = half_var * u * core / (gd.delta_minus * gd.delta_minus);
    } else {
        out.mu = -half_var * (-u + u * u * u);
    }
    return out;
}

const char* to_string(DriftMode mode)
{
    return mode == DriftMode::ito_correct ? "ito" : "paper";
}

DriftMode drift_mode_from_string(const std::string& text)
{
    if (text == "ito" || text == "ito_correct") {
        return DriftMode::ito_correct;
    }
    if (text == "paper" || text == "paper_literal") {
        return DriftMode::paper_literal;
    }
    throw ConfigError("drift_mode", "expected 'ito' or 'paper', got '" + text + "'");
}

}  // namespace mfdrift

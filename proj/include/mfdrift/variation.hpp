#pragma once

#include <cmath>
#include <string>

#include "mfdrift/mfd_core.hpp"

namespace mfdrift {

/// Which formula supplies the drift of Z. `ito_correct` is the drift obtained
/// by applying Ito's lemma to the tanh transform; `paper_literal` omits the
/// 1/delta_minus^2 scaling and agrees with it only when delta_minus == 1.
enum class DriftMode { ito_correct, paper_literal };

struct VariationState
{
    double w = 0.0;
    double z = 0.0;
};

struct DriftDiffusion
{
    double mu = 0.0;
    double s = 0.0;
};

/// Z = gamma_minus + (tanh(w) + 1) / 2 * delta_minus, strictly inside the band.
/// Returns 0 for a degenerate band.
double transform_w_to_z(double w, const GammaDelta& gd);

/// Inverse of transform_w_to_z. Throws DomainError unless
/// gamma_minus < z < gamma_plus.
double inverse_transform(double z, const GammaDelta& gd);

/// Latent value that places Z at the band position `fraction` in (0, 1),
/// where 0 is the lower edge. Independent of the band width.
double latent_for_fraction(double fraction);

/// Drift and diffusion of Z. Degenerate bands give (0, 0).
DriftDiffusion drift_diffusion(double z, const GammaDelta& gd, double sigma, DriftMode mode);

inline double step_latent_w(double w, double sigma, double dt, double xi)
{
    return w + sigma * std::sqrt(dt) * xi;
}

const char* to_string(DriftMode mode);
DriftMode drift_mode_from_string(const std::string& text);

}  // namespace mfdrift

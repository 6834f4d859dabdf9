#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mfdrift/integrator.hpp"

namespace mfdrift {

/// Densities are per unit of the sampled variable; sum(density * width) == 1.
struct Histogram
{
    std::vector<double> edges;
    std::vector<double> density;
    std::vector<std::size_t> counts;
    std::size_t sample_count = 0;

    std::vector<double> centers() const;
    double integral() const;
};

/// Equal-width bins over [min, max] of the samples. A constant sample set
/// becomes a single occupied bin of tiny width around the value.
Histogram make_histogram(const std::vector<double>& samples, std::size_t bins);
Histogram make_histogram(const std::vector<double>& samples, const std::vector<double>& edges);

enum class Variable { n, z, g };
Variable variable_from_string(const std::string& text);
const char* to_string(Variable v);

/// Exit-flow samples from all paths and recorded times with |n - n_star| <= window.
std::vector<double> exit_flow_samples_at(const EnsembleResult& ens, double n_star, double window,
                                         std::size_t region = 0);

/// Throws DomainError when the window holds no samples.
Histogram exit_flow_distribution_at(const EnsembleResult& ens, double n_star, double window,
                                    std::size_t bins = 40, std::size_t region = 0);

/// One sample per path at the recorded time nearest `t`.
std::vector<double> samples_at_time(const EnsembleResult& ens, double t, Variable var,
                                    std::size_t region = 0);
Histogram marginal_at_time(const EnsembleResult& ens, double t, Variable var,
                           std::size_t bins = 40, std::size_t region = 0);

struct HysteresisCurve
{
    std::vector<double> levels;
    std::vector<double> mean_decrease;  ///< NaN where count == 0
    std::vector<double> std_error;      ///< NaN where count < 2
    std::vector<std::size_t> count;
};

/// Per path and level: G at the first upcrossing minus G at the first later
/// downcrossing, both linearly interpolated between records.
HysteresisCurve hysteresis_curve(const EnsembleResult& ens, const std::vector<double>& levels,
                                 std::size_t region = 0);
std::vector<double> linspace(double lo, double hi, std::size_t count);

/// Fraction of paths with n(t_eval) >= threshold.
double gridlock_probability(const EnsembleResult& ens, double threshold, double t_eval,
                            std::size_t region = 0);
/// Fraction of paths with n(t_eval) < threshold.
double recovered_fraction(const EnsembleResult& ens, double threshold, double t_eval,
                          std::size_t region = 0);

/// Adjusted Fisher-Pearson skewness. Throws DomainError for fewer than three
/// samples or zero variance.
double sample_skewness(const std::vector<double>& samples);

struct Heatmap
{
    std::vector<double> x_edges;
    std::vector<double> y_edges;
    std::vector<std::size_t> counts;  ///< row-major [x_bin * ny + y_bin]
    std::size_t sample_count = 0;
    double pearson = 0.0;

    std::size_t nx() const { return x_edges.size() - 1; }
    std::size_t ny() const { return y_edges.size() - 1; }
    std::size_t at(std::size_t i, std::size_t j) const { return counts[i * ny() + j]; }
};

/// Pairs (var in region_a, var in region_b) across paths and recorded times
/// in [t_lo, t_hi]. Throws DomainError for single-region ensembles.
std::pair<std::vector<double>, std::vector<double>> paired_samples(
    const EnsembleResult& ens, Variable var, std::size_t region_a, std::size_t region_b,
    double t_lo, double t_hi);
Heatmap joint_heatmap(const EnsembleResult& ens, Variable var, std::size_t region_a,
                      std::size_t region_b, double t_lo, double t_hi, std::size_t bins = 30);

double mean(const std::vector<double>& x);
double variance(const std::vector<double>& x);
double pearson(const std::vector<double>& x, const std::vector<double>& y);
double spearman(const std::vector<double>& x, const std::vector<double>& y);
/// Linear-interpolation quantile (type 7) of unsorted samples.
double quantile(std::vector<double> x, double p);
double interquartile_range(const std::vector<double>& x);

}  // namespace mfdrift

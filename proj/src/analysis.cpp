#include "mfdrift/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mfdrift/error.hpp"

namespace mfdrift {

namespace {

double value_of(const Sample& s, Variable v)
{
    switch (v) {
    case Variable::n:
        return s.n;
    case Variable::z:
        return s.z;
    case Variable::g:
        return s.g;
    }
    return 0.0;
}

std::size_t nearest_record(const PathRecord& p, double t)
{
    const auto it = std::lower_bound(p.t.begin(), p.t.end(), t);
    if (it == p.t.begin()) {
        return 0;
    }
    if (it == p.t.end()) {
        return p.t.size() - 1;
    }
    const std::size_t hi = static_cast<std::size_t>(it - p.t.begin());
    return (t - p.t[hi - 1] <= p.t[hi] - t) ? hi - 1 : hi;
}

void check_time(const EnsembleResult& ens, double t)
{
    if (ens.paths.empty() || ens.paths.front().t.empty()) {
        throw DomainError("ensemble is empty");
    }
    const auto& times = ens.paths.front().t;
    if (!(t >= times.front() && t <= times.back())) {
        throw DomainError("time " + std::to_string(t) + " outside the recorded horizon");
    }
}

std::size_t bin_index(const std::vector<double>& edges, double x)
{
    const std::size_t nb = edges.size() - 1;
    if (x <= edges.front()) {
        return 0;
    }
    if (x >= edges.back()) {
        return nb - 1;
    }
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    return std::min(static_cast<std::size_t>(it - edges.begin()) - 1, nb - 1);
}

std::vector<double> auto_edges(const std::vector<double>& samples, std::size_t bins)
{
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    double lo = *lo_it;
    double hi = *hi_it;
    if (!(hi > lo)) {
        const double h = 1e-9 * std::max(1.0, std::fabs(lo));
        lo -= h * bins;
        hi += h * bins;
    }
    return linspace(lo, hi, bins + 1);
}

std::vector<double> ranks(const std::vector<double>& x)
{
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) {
            ++j;
        }
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    return r;
}

}  // namespace

std::vector<double> Histogram::centers() const
{
    std::vector<double> c(density.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = 0.5 * (edges[i] + edges[i + 1]);
    }
    return c;
}

double Histogram::integral() const
{
    double s = 0.0;
    for (std::size_t i = 0; i < density.size(); ++i) {
        s += density[i] * (edges[i + 1] - edges[i]);
    }
    return s;
}

Histogram make_histogram(const std::vector<double>& samples, const std::vector<double>& edges)
{
    if (edges.size() < 2) {
        throw DomainError("histogram needs at least two edges");
    }
    Histogram h;
    h.edges = edges;
    h.counts.assign(edges.size() - 1, 0);
    h.density.assign(edges.size() - 1, 0.0);
    h.sample_count = samples.size();
    for (double x : samples) {
        ++h.counts[bin_index(edges, x)];
    }
    if (!samples.empty()) {
        for (std::size_t i = 0; i < h.counts.size(); ++i) {
            h.density[i] = static_cast<double>(h.counts[i]) /
                           (static_cast<double>(samples.size()) * (edges[i + 1] - edges[i]));
        }
    }
    return h;
}

Histogram make_histogram(const std::vector<double>& samples, std::size_t bins)
{
    if (samples.empty()) {
        throw DomainError("histogram of an empty sample");
    }
    if (bins == 0) {
        throw DomainError("histogram needs at least one bin");
    }
    return make_histogram(samples, auto_edges(samples, bins));
}

Variable variable_from_string(const std::string& text)
{
    if (text == "n") return Variable::n;
    if (text == "z") return Variable::z;
    if (text == "g") return Variable::g;
    throw ConfigError("variable", "expected n, z or g, got '" + text + "'");
}

const char* to_string(Variable v)
{
    switch (v) {
    case Variable::n:
        return "n";
    case Variable::z:
        return "z";
    case Variable::g:
        return "g";
    }
    return "?";
}

std::vector<double> exit_flow_samples_at(const EnsembleResult& ens, double n_star, double window,
                                         std::size_t region)
{
    if (!(window > 0.0)) {
        throw DomainError("window must be > 0");
    }
    std::vector<double> out;
    for (const auto& p : ens.paths) {
        for (std::size_t k = 0; k < p.t.size(); ++k) {
            const Sample& s = p.at(k, region);
            if (std::fabs(s.n - n_star) <= window) {
                out.push_back(s.g);
            }
        }
    }
    return out;
}

Histogram exit_flow_distribution_at(const EnsembleResult& ens, double n_star, double window,
                                    std::size_t bins, std::size_t region)
{
    const auto samples = exit_flow_samples_at(ens, n_star, window, region);
    if (samples.empty()) {
        throw DomainError("no exit-flow samples within the window around n = " +
                          std::to_string(n_star));
    }
    return make_histogram(samples, bins);
}

std::vector<double> samples_at_time(const EnsembleResult& ens, double t, Variable var,
                                    std::size_t region)
{
    check_time(ens, t);
    std::vector<double> out;
    out.reserve(ens.paths.size());
    for (const auto& p : ens.paths) {
        out.push_back(value_of(p.at(nearest_record(p, t), region), var));
    }
    return out;
}

Histogram marginal_at_time(const EnsembleResult& ens, double t, Variable var, std::size_t bins,
                           std::size_t region)
{
    return make_histogram(samples_at_time(ens, t, var, region), bins);
}

std::vector<double> linspace(double lo, double hi, std::size_t count)
{
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    out.back() = hi;
    return out;
}

HysteresisCurve hysteresis_curve(const EnsembleResult& ens, const std::vector<double>& levels,
                                 std::size_t region)
{
    HysteresisCurve h;
    h.levels = levels;
    const std::size_t nl = levels.size();
    std::vector<double> sum(nl, 0.0);
    std::vector<double> sum_sq(nl, 0.0);
    h.count.assign(nl, 0);
    for (const auto& p : ens.paths) {
        const std::size_t nk = p.t.size();
        for (std::size_t l = 0; l < nl; ++l) {
            const double level = levels[l];
            std::size_t k = 0;
            double g_up = 0.0;
            bool up = false;
            for (; k + 1 < nk; ++k) {
                const Sample& a = p.at(k, region);
                const Sample& b = p.at(k + 1, region);
                if (a.n < level && b.n >= level) {
                    const double f = (level - a.n) / (b.n - a.n);
                    g_up = a.g + f * (b.g - a.g);
                    up = true;
                    ++k;
                    break;
                }
            }
            if (!up) {
                continue;
            }
            for (; k + 1 < nk; ++k) {
                const Sample& a = p.at(k, region);
                const Sample& b = p.at(k + 1, region);
                if (a.n >= level && b.n < level) {
                    const double f = (a.n - level) / (a.n - b.n);
                    const double g_down = a.g + f * (b.g - a.g);
                    const double d = g_up - g_down;
                    sum[l] += d;
                    sum_sq[l] += d * d;
                    ++h.count[l];
                    break;
                }
            }
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    h.mean_decrease.assign(nl, nan);
    h.std_error.assign(nl, nan);
    for (std::size_t l = 0; l < nl; ++l) {
        const double c = static_cast<double>(h.count[l]);
        if (h.count[l] > 0) {
            h.mean_decrease[l] = sum[l] / c;
        }
        if (h.count[l] > 1) {
            const double var = std::max(0.0, (sum_sq[l] - sum[l] * sum[l] / c) / (c - 1.0));
            h.std_error[l] = std::sqrt(var / c);
        }
    }
    return h;
}

double gridlock_probability(const EnsembleResult& ens, double threshold, double t_eval,
                            std::size_t region)
{
    const auto n = samples_at_time(ens, t_eval, Variable::n, region);
    const auto hits = std::count_if(n.begin(), n.end(), [&](double x) { return x >= threshold; });
    return static_cast<double>(hits) / static_cast<double>(n.size());
}

double recovered_fraction(const EnsembleResult& ens, double threshold, double t_eval,
                          std::size_t region)
{
    const auto n = samples_at_time(ens, t_eval, Variable::n, region);
    const auto hits = std::count_if(n.begin(), n.end(), [&](double x) { return x < threshold; });
    return static_cast<double>(hits) / static_cast<double>(n.size());
}

double sample_skewness(const std::vector<double>& x)
{
    const std::size_t n = x.size();
    if (n < 3) {
        throw DomainError("skewness needs at least three samples");
    }
    const double m = mean(x);
    double m2 = 0.0;
    double m3 = 0.0;
    for (double v : x) {
        const double d = v - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    if (!(m2 > 0.0)) {
        throw DomainError("skewness is undefined for constant samples");
    }
    const double nn = static_cast<double>(n);
    return std::sqrt(nn * (nn - 1.0)) / (nn - 2.0) * m3 / std::pow(m2, 1.5);
}

std::pair<std::vector<double>, std::vector<double>> paired_samples(
    const EnsembleResult& ens, Variable var, std::size_t region_a, std::size_t region_b,
    double t_lo, double t_hi)
{
    if (ens.regions < 2) {
        throw DomainError("joint analysis needs an ensemble with at least two regions");
    }
    if (region_a >= ens.regions || region_b >= ens.regions) {
        throw DomainError("region index out of range");
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& p : ens.paths) {
        for (std::size_t k = 0; k < p.t.size(); ++k) {
            if (p.t[k] >= t_lo && p.t[k] <= t_hi) {
                xs.push_back(value_of(p.at(k, region_a), var));
                ys.push_back(value_of(p.at(k, region_b), var));
            }
        }
    }
    return {xs, ys};
}

Heatmap joint_heatmap(const EnsembleResult& ens, Variable var, std::size_t region_a,
                      std::size_t region_b, double t_lo, double t_hi, std::size_t bins)
{
    const auto [xs, ys] = paired_samples(ens, var, region_a, region_b, t_lo, t_hi);
    if (xs.empty()) {
        throw DomainError("no samples in the requested time range");
    }
    Heatmap h;
    h.x_edges = auto_edges(xs, bins);
    h.y_edges = auto_edges(ys, bins);
    h.counts.assign(bins * bins, 0);
    h.sample_count = xs.size();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        ++h.counts[bin_index(h.x_edges, xs[i]) * bins + bin_index(h.y_edges, ys[i])];
    }
    h.pearson = pearson(xs, ys);
    return h;
}

double mean(const std::vector<double>& x)
{
    if (x.empty()) {
        throw DomainError("mean of an empty sample");
    }
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(const std::vector<double>& x)
{
    if (x.size() < 2) {
        throw DomainError("variance needs at least two samples");
    }
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) {
        s += (v - m) * (v - m);
    }
    return s / static_cast<double>(x.size() - 1);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw DomainError("pearson: need two equally long samples of size >= 2");
    }
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0 && syy > 0.0)) {
        throw DomainError("pearson: zero variance");
    }
    return sxy / std::sqrt(sxx * syy);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y)
{
    return pearson(ranks(x), ranks(y));
}

double quantile(std::vector<double> x, double p)
{
    if (x.empty()) {
        throw DomainError("quantile of an empty sample");
    }
    std::sort(x.begin(), x.end());
    const double h = (static_cast<double>(x.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double interquartile_range(const std::vector<double>& x)
{
    return quantile(x, 0.75) - quantile(x, 0.25);
}

}  // namespace mfdrift

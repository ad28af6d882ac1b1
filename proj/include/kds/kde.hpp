#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "kds/error.hpp"

namespace kds {

inline constexpr int kDefaultKdeGrid = 100;

struct Bandwidth {
    double h = 0.0;
    bool degenerate = false; // zero spread; h is the fallback value
};

namespace detail {

inline void require_finite(std::span<const double> xs)
{
    if (std::ranges::any_of(xs, [](double x) { return !std::isfinite(x); }))
        throw Error(ErrorCode::invalid_argument, "samples must be finite");
}

inline Bandwidth fallback_bandwidth(double x) noexcept
{
    return {std::max(1.0, 0.01 * std::abs(x)), true};
}

inline std::vector<double> normalized_weights(std::span<const double> samples, std::span<const double> weights)
{
    if (weights.size() != samples.size())
        throw Error(ErrorCode::invalid_argument, "weights and samples differ in length");
    if (std::ranges::any_of(weights, [](double w) { return !(w >= 0.0) || !std::isfinite(w); }))
        throw Error(ErrorCode::invalid_argument, "weights must be finite and non-negative");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0))
        throw Error(ErrorCode::invalid_argument, "weights must have positive sum");
    std::vector<double> w(weights.begin(), weights.end());
    for (auto& v : w)
        v /= total;
    return w;
}

} // namespace detail

/// h = 1.06 * sd * n^(-1/5), sd with the n-1 denominator. Identical samples yield
/// the fallback max(1, 0.01*|x1|) flagged as degenerate.
inline Bandwidth scott_bandwidth(std::span<const double> samples)
{
    const auto n = samples.size();
    if (n < 2)
        throw Error(ErrorCode::insufficient_samples, "bandwidth needs at least two samples");
    detail::require_finite(samples);
    const auto [lo, hi] = std::ranges::minmax(samples);
    if (lo == hi)
        return detail::fallback_bandwidth(samples.front());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : samples)
        ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return {1.06 * sd * std::pow(static_cast<double>(n), -0.2), false};
}

/// Weighted variant: reliability-weighted sd and Kish effective sample size.
/// Reduces to the unweighted rule for equal weights.
inline Bandwidth scott_bandwidth(std::span<const double> samples, std::span<const double> weights)
{
    if (samples.size() < 2)
        throw Error(ErrorCode::insufficient_samples, "bandwidth needs at least two samples");
    detail::require_finite(samples);
    const auto w = detail::normalized_weights(samples, weights);
    double mean = 0.0;
    double w2 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        mean += w[i] * samples[i];
        w2 += w[i] * w[i];
    }
    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    double ss = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0)
            continue;
        lo = any ? std::min(lo, samples[i]) : samples[i];
        hi = any ? std::max(hi, samples[i]) : samples[i];
        any = true;
        ss += w[i] * (samples[i] - mean) * (samples[i] - mean);
    }
    if (lo == hi || w2 >= 1.0)
        return detail::fallback_bandwidth(lo);
    const double sd = std::sqrt(ss / (1.0 - w2));
    return {1.06 * sd * std::pow(1.0 / w2, -0.2), false};
}

/// exp(-(x - x')^2 / (2 sigma^2)).
inline double gaussian_kernel(double x, double x_prime, double variance) noexcept
{
    const double d = x - x_prime;
    return std::exp(-(d * d) / (2.0 * variance));
}

/// Grid-evaluated Gaussian KDE. The density is normalized numerically so that its
/// trapezoid integral over the grid is 1; `cdf` is filled by kds::cdf().
class KdeModel {
public:
    std::vector<double> grid;
    std::vector<double> density;
    std::vector<double> cdf;
    double bandwidth = 0.0;
    double kernel_variance = 0.0; // h^2 / 2
    std::vector<double> samples;
    std::vector<double> weights;  // sum to 1
    double normalizer = 1.0;      // trapezoid integral of the raw kernel sum

    /// Raw kernel sum at x, before normalization.
    [[nodiscard]] double raw_density(double x) const noexcept
    {
        double acc = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i)
            acc += weights[i] * gaussian_kernel(x, samples[i], kernel_variance);
        return acc;
    }

    /// Normalized density at an arbitrary abscissa.
    [[nodiscard]] double evaluate(double x) const noexcept { return raw_density(x) / normalizer; }

    [[nodiscard]] bool has_cdf() const noexcept { return cdf.size() == grid.size() && !cdf.empty(); }

    /// Linear interpolant of the (grid, cdf) polyline, clamped to [0, 1].
    [[nodiscard]] double cdf_at(double x) const
    {
        require_cdf();
        if (x <= grid.front())
            return 0.0;
        if (x >= grid.back())
            return 1.0;
        const auto it = std::ranges::upper_bound(grid, x);
        const auto j = static_cast<std::size_t>(it - grid.begin());
        const double t = (x - grid[j - 1]) / (grid[j] - grid[j - 1]);
        return cdf[j - 1] + t * (cdf[j] - cdf[j - 1]);
    }

    /// Inverse of cdf_at. Flat stretches resolve to their leftmost abscissa.
    [[nodiscard]] double quantile(double p) const
    {
        require_cdf();
        if (!(p > 0.0))
            return grid.front();
        if (p >= 1.0)
            return grid.back();
        const auto it = std::ranges::lower_bound(cdf, p);
        const auto j = static_cast<std::size_t>(it - cdf.begin());
        if (cdf[j] == p)
            return grid[j];
        const double t = (p - cdf[j - 1]) / (cdf[j] - cdf[j - 1]);
        return grid[j - 1] + t * (grid[j] - grid[j - 1]);
    }

private:
    void require_cdf() const
    {
        if (!has_cdf())
            throw Error(ErrorCode::invalid_argument, "KDE model has no CDF");
    }
};

inline double trapezoid(std::span<const double> x, std::span<const double> y) noexcept
{
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return acc;
}

/// Weighted KDE on grid_size points spanning [min - 3h, max + 3h] of the
/// positively weighted samples.
inline KdeModel estimate_density(std::span<const double> samples, std::span<const double> weights, double h,
                                 int grid_size = kDefaultKdeGrid)
{
    if (samples.empty())
        throw Error(ErrorCode::insufficient_samples, "density needs at least one sample");
    if (!(h > 0.0) || !std::isfinite(h))
        throw Error(ErrorCode::invalid_argument, "bandwidth must be positive");
    if (grid_size < 2)
        throw Error(ErrorCode::invalid_argument, "grid needs at least two points");
    detail::require_finite(samples);

    KdeModel m;
    m.bandwidth = h;
    m.kernel_variance = h * h / 2.0;
    m.samples.assign(samples.begin(), samples.end());
    m.weights = detail::normalized_weights(samples, weights);

    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (m.weights[i] <= 0.0)
            continue;
        lo = any ? std::min(lo, samples[i]) : samples[i];
        hi = any ? std::max(hi, samples[i]) : samples[i];
        any = true;
    }
    const double start = lo - 3.0 * h;
    const double stop = hi + 3.0 * h;
    const double step = (stop - start) / (grid_size - 1);
    m.grid.resize(grid_size);
    for (int g = 0; g < grid_size; ++g)
        m.grid[g] = start + g * step;
    m.grid.back() = stop;

    m.density.resize(grid_size);
    for (int g = 0; g < grid_size; ++g)
        m.density[g] = m.raw_density(m.grid[g]);
    m.normalizer = trapezoid(m.grid, m.density);
    if (!(m.normalizer > 0.0))
        throw Error(ErrorCode::invalid_argument, "density vanished on the grid");
    for (auto& d : m.density)
        d /= m.normalizer;
    return m;
}

inline KdeModel estimate_density(std::span<const double> samples, double h, int grid_size = kDefaultKdeGrid)
{
    const std::vector<double> ones(samples.size(), 1.0);
    return estimate_density(samples, ones, h, grid_size);
}

/// Cumulative trapezoid integral, endpoint-normalized so cdf[0] = 0 and cdf[last] = 1.
inline KdeModel cdf(KdeModel model)
{
    const auto n = model.grid.size();
    if (n < 2 || model.density.size() != n)
        throw Error(ErrorCode::invalid_argument, "density not populated");
    model.cdf.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        model.cdf[i] = model.cdf[i - 1] +
                       0.5 * (model.density[i] + model.density[i - 1]) * (model.grid[i] - model.grid[i - 1]);
    const double total = model.cdf.back();
    for (auto& c : model.cdf)
        c /= total;
    model.cdf.back() = 1.0;
    return model;
}

inline double quantile(const KdeModel& model, double p) { return model.quantile(p); }

} // namespace kds

#pragma once

#include <algorithm>
#include <deque>
#include <numeric>
#include <span>
#include <vector>

#include "kds/error.hpp"
#include "kds/image.hpp"

namespace kds {

/// (2k+1)x(2k+1) non-negative weights; w(p, q) is stored at (p + k, q + k).
class FilterKernel {
public:
    FilterKernel(int radius, Grid<double> weights) : radius_(radius), weights_(std::move(weights))
    {
        if (radius < 0)
            throw Error(ErrorCode::invalid_argument, "kernel radius must be non-negative");
        const int side = 2 * radius + 1;
        if (weights_.rows() != side || weights_.cols() != side)
            throw Error(ErrorCode::invalid_argument, "kernel must be (2k+1)x(2k+1)");
        if (std::ranges::any_of(weights_.values(), [](double w) { return !(w >= 0.0); }))
            throw Error(ErrorCode::invalid_argument, "kernel weights must be non-negative");
        sum_ = std::accumulate(weights_.values().begin(), weights_.values().end(), 0.0);
        if (!(sum_ > 0.0))
            throw Error(ErrorCode::invalid_argument, "kernel weights must have positive sum");
    }

    static FilterKernel uniform(int radius)
    {
        if (radius < 0)
            throw Error(ErrorCode::invalid_argument, "kernel radius must be non-negative");
        return {radius, Grid<double>(2 * radius + 1, 2 * radius + 1, 1.0)};
    }

    [[nodiscard]] int radius() const noexcept { return radius_; }
    [[nodiscard]] double weight(int p, int q) const noexcept { return weights_(p + radius_, q + radius_); }
    [[nodiscard]] double weight_sum() const noexcept { return sum_; }

private:
    int radius_;
    Grid<double> weights_;
    double sum_ = 0.0;
};

enum class FilterMode { weighted_mean, minimum };

/// Normalized weighted mean over the replicate-padded neighbourhood.
template <typename T>
RealImage weighted_mean_filter(const Grid<T>& img, const FilterKernel& kernel)
{
    const int k = kernel.radius();
    const double norm = kernel.weight_sum();
    RealImage out(img.rows(), img.cols());
    for (int i = 0; i < img.rows(); ++i) {
        for (int j = 0; j < img.cols(); ++j) {
            double acc = 0.0;
            for (int p = -k; p <= k; ++p)
                for (int q = -k; q <= k; ++q)
                    acc += kernel.weight(p, q) * static_cast<double>(img.clamped(i + p, j + q));
            out(i, j) = acc / norm;
        }
    }
    return out;
}

inline RealImage weighted_mean_filter(const SliceImage& slice, const FilterKernel& kernel)
{
    return weighted_mean_filter(slice.pixels, kernel);
}

namespace detail {

// Running minimum over a clamp-padded line, monotonic-deque variant.
template <typename T>
void sliding_min(std::span<const T> in, std::span<T> out, int k)
{
    const int n = static_cast<int>(in.size());
    const auto at = [&](int p) { return in[std::clamp(p, 0, n - 1)]; };
    std::deque<int> window;
    for (int p = -k; p < n + k; ++p) {
        while (!window.empty() && at(window.back()) >= at(p))
            window.pop_back();
        window.push_back(p);
        const int i = p - k;
        if (i < 0)
            continue;
        while (window.front() < i - k)
            window.pop_front();
        out[i] = at(window.front());
    }
}

} // namespace detail

/// Minimum over the (2k+1)x(2k+1) replicate-padded window. The box minimum is
/// separable, so rows are filtered first and columns second.
template <typename T>
Grid<T> min_filter(const Grid<T>& img, int k)
{
    if (k < 0)
        throw Error(ErrorCode::invalid_argument, "min filter radius must be non-negative");
    if (k == 0 || img.empty())
        return img;
    const int rows = img.rows();
    const int cols = img.cols();
    Grid<T> horiz(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const auto offset = static_cast<std::size_t>(r) * cols;
        detail::sliding_min<T>(img.values().subspan(offset, cols), horiz.values().subspan(offset, cols), k);
    }
    Grid<T> out(rows, cols);
    std::vector<T> column(rows);
    std::vector<T> filtered(rows);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r)
            column[r] = horiz(r, c);
        detail::sliding_min<T>(column, filtered, k);
        for (int r = 0; r < rows; ++r)
            out(r, c) = filtered[r];
    }
    return out;
}

inline SliceImage min_filter(const SliceImage& slice, int k)
{
    return {min_filter(slice.pixels, k), slice.bit_depth};
}

/// Dispatch on mode; the minimum filter uses the kernel's radius only.
inline RealImage apply_filter(const SliceImage& slice, FilterMode mode, const FilterKernel& kernel)
{
    switch (mode) {
    case FilterMode::minimum: return to_real(min_filter(slice.pixels, kernel.radius()));
    case FilterMode::weighted_mean: return weighted_mean_filter(slice.pixels, kernel);
    }
    throw Error(ErrorCode::invalid_argument, "unknown filter mode");
}

} // namespace kds

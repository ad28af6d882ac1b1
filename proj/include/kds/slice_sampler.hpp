#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "kds/error.hpp"
#include "kds/kde.hpp"

namespace kds {

enum class SamplerMode { area_quantile, index_weighted };

inline constexpr std::string_view to_string(SamplerMode m) noexcept
{
    return m == SamplerMode::area_quantile ? "area" : "index";
}

inline constexpr int kDefaultSliceCount = 8;

struct SamplingPlan {
    int n_select = kDefaultSliceCount;
    int n_intervals = kDefaultSliceCount;
    SamplerMode mode = SamplerMode::area_quantile;
    int kde_grid = kDefaultKdeGrid;

    /// Equal-probability CDF breakpoints k / n_intervals, k = 0..n_intervals.
    [[nodiscard]] std::vector<double> breakpoints() const
    {
        if (n_intervals < 1)
            throw Error(ErrorCode::invalid_argument, "need at least one interval");
        std::vector<double> b(n_intervals + 1);
        for (int k = 0; k <= n_intervals; ++k)
            b[k] = static_cast<double>(k) / n_intervals;
        return b;
    }
};

struct Selection {
    std::vector<int> indices;             // ascending, duplicates allowed when slices are scarce
    std::vector<double> per_index_quantile; // CDF level that produced each index
    Bandwidth bandwidth;
};

/// Largest-remainder apportionment of `total` proportional to `masses`.
/// Remainder ties go to the lower interval index.
inline std::vector<int> allocate_counts(std::span<const double> masses, int total)
{
    if (total < 0)
        throw Error(ErrorCode::invalid_argument, "count must be non-negative");
    if (masses.empty())
        throw Error(ErrorCode::invalid_argument, "no intervals");
    std::vector<double> m(masses.size());
    std::ranges::transform(masses, m.begin(), [](double x) { return std::max(x, 0.0); });
    const double sum = std::accumulate(m.begin(), m.end(), 0.0);
    if (!(sum > 0.0))
        throw Error(ErrorCode::invalid_argument, "interval masses must have positive sum");

    std::vector<int> counts(m.size());
    std::vector<double> remainder(m.size());
    int assigned = 0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double quota = total * m[k] / sum;
        counts[k] = static_cast<int>(std::floor(quota));
        remainder[k] = quota - counts[k];
        assigned += counts[k];
    }
    std::vector<std::size_t> order(m.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned)
        ++counts[order[i % order.size()]];
    return counts;
}

/// Counts per percentile interval, proportional to each interval's CDF mass
/// measured on the value axis.
inline std::vector<int> allocate_counts(const KdeModel& model, const SamplingPlan& plan)
{
    const auto b = plan.breakpoints();
    std::vector<double> bounds(b.size());
    std::ranges::transform(b, bounds.begin(), [&](double p) { return model.quantile(p); });
    std::vector<double> masses(plan.n_intervals);
    for (int k = 0; k < plan.n_intervals; ++k)
        masses[k] = model.cdf_at(bounds[k + 1]) - model.cdf_at(bounds[k]);
    return allocate_counts(masses, plan.n_select);
}

/// CDF levels to sample: each interval's count spread evenly over the interval,
/// so a single representative sits at the interval's CDF midpoint.
inline std::vector<double> target_levels(std::span<const int> counts, std::span<const double> breakpoints)
{
    std::vector<double> levels;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double lo = breakpoints[k];
        const double hi = breakpoints[k + 1];
        for (int j = 0; j < counts[k]; ++j)
            levels.push_back(lo + (j + 0.5) / counts[k] * (hi - lo));
    }
    return levels;
}

namespace detail {

// Picks distinct candidates with strictly increasing rank (candidates ordered by
// value) minimizing the squared distance to each ascending target. Ties prefer
// the smaller sum of slice indices, then the earlier rank.
inline std::vector<int> monotone_assignment(std::span<const double> values, std::span<const int> slice_of_rank,
                                            std::span<const double> targets)
{
    const int n = static_cast<int>(values.size());
    const int m = static_cast<int>(targets.size());
    struct Cell {
        double cost = std::numeric_limits<double>::infinity();
        long long index_sum = 0;
        int prev = -1;
    };
    const auto better = [](double c1, long long s1, double c2, long long s2) {
        return c1 < c2 || (c1 == c2 && s1 < s2);
    };
    std::vector<std::vector<Cell>> dp(m, std::vector<Cell>(n));
    for (int k = 0; k < m; ++k) {
        // running best over ranks < r from the previous row
        double best_cost = k == 0 ? 0.0 : std::numeric_limits<double>::infinity();
        long long best_sum = 0;
        int best_rank = -1;
        for (int r = 0; r < n; ++r) {
            if (k > 0 && r > 0) {
                const Cell& c = dp[k - 1][r - 1];
                if (better(c.cost, c.index_sum, best_cost, best_sum)) {
                    best_cost = c.cost;
                    best_sum = c.index_sum;
                    best_rank = r - 1;
                }
            }
            if (r < k || r > n - m + k || !std::isfinite(best_cost))
                continue;
            const double d = values[r] - targets[k];
            dp[k][r] = {best_cost + d * d, best_sum + slice_of_rank[r], best_rank};
        }
    }
    int r = -1;
    for (int c = 0; c < n; ++c)
        if (std::isfinite(dp[m - 1][c].cost) &&
            (r < 0 || better(dp[m - 1][c].cost, dp[m - 1][c].index_sum, dp[m - 1][r].cost, dp[m - 1][r].index_sum)))
            r = c;
    std::vector<int> ranks(m);
    for (int k = m - 1; k >= 0; --k) {
        ranks[k] = r;
        r = dp[k][r].prev;
    }
    return ranks;
}

// Nearest slice by value, smaller slice index on ties.
inline int nearest_slice(std::span<const double> values, double target)
{
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i)
        if (std::abs(values[i] - target) < std::abs(values[best] - target))
            best = i;
    return best;
}

} // namespace detail

/// Fit the sampling KDE for a lung-area series under the plan's mode.
inline KdeModel fit_sampling_model(std::span<const double> areas, const SamplingPlan& plan, Bandwidth* used = nullptr)
{
    const std::size_t n = areas.size();
    if (n == 0)
        throw Error(ErrorCode::empty_series, "no slices to sample");
    std::vector<double> samples;
    std::vector<double> weights;
    Bandwidth bw;
    if (plan.mode == SamplerMode::area_quantile) {
        samples.assign(areas.begin(), areas.end());
        weights.assign(n, 1.0);
        bw = n >= 2 ? scott_bandwidth(samples) : detail::fallback_bandwidth(samples.front());
    } else {
        samples.resize(n);
        std::iota(samples.begin(), samples.end(), 0.0);
        const double total = std::accumulate(areas.begin(), areas.end(), 0.0);
        weights = total > 0.0 ? std::vector<double>(areas.begin(), areas.end()) : std::vector<double>(n, 1.0);
        bw = n >= 2 ? scott_bandwidth(samples, weights) : detail::fallback_bandwidth(0.0);
    }
    if (used)
        *used = bw;
    return cdf(estimate_density(samples, weights, bw.h, plan.kde_grid));
}

/// Select exactly plan.n_select slice indices from a lung-area series.
inline Selection select_slices(std::span<const double> areas, const SamplingPlan& plan = {})
{
    if (areas.empty())
        throw Error(ErrorCode::empty_series, "no slices to sample");
    if (plan.n_select < 1)
        throw Error(ErrorCode::invalid_argument, "n_select must be positive");
    const int n = static_cast<int>(areas.size());
    Selection sel;
    const KdeModel model = fit_sampling_model(areas, plan, &sel.bandwidth);

    // Value of each slice on the KDE axis.
    std::vector<double> values(n);
    if (plan.mode == SamplerMode::area_quantile)
        values.assign(areas.begin(), areas.end());
    else
        std::iota(values.begin(), values.end(), 0.0);

    std::vector<std::pair<int, double>> picks; // (slice index, CDF level)
    if (n <= plan.n_select) {
        for (int i = 0; i < n; ++i)
            picks.emplace_back(i, model.cdf_at(values[i]));
        // Scarce slices: each appears once, extra copies follow the density.
        const int extra = plan.n_select - n;
        for (int j = 0; j < extra; ++j) {
            const double p = (2.0 * j + 1.0) / (2.0 * extra);
            picks.emplace_back(detail::nearest_slice(values, model.quantile(p)), p);
        }
    } else {
        const auto counts = allocate_counts(model, plan);
        const auto levels = target_levels(counts, plan.breakpoints());
        std::vector<double> targets(levels.size());
        std::ranges::transform(levels, targets.begin(), [&](double p) { return model.quantile(p); });

        std::vector<int> by_rank(n);
        std::iota(by_rank.begin(), by_rank.end(), 0);
        std::ranges::stable_sort(by_rank, [&](int a, int b) { return values[a] < values[b]; });
        std::vector<double> ranked_values(n);
        std::ranges::transform(by_rank, ranked_values.begin(), [&](int i) { return values[i]; });

        const auto ranks = detail::monotone_assignment(ranked_values, by_rank, targets);
        for (std::size_t k = 0; k < ranks.size(); ++k)
            picks.emplace_back(by_rank[ranks[k]], levels[k]);
    }
    std::ranges::sort(picks);
    for (const auto& [idx, p] : picks) {
        sel.indices.push_back(idx);
        sel.per_index_quantile.push_back(p);
    }
    return sel;
}

inline Selection select_slices(std::span<const long long> areas, const SamplingPlan& plan = {})
{
    std::vector<double> a(areas.begin(), areas.end());
    return select_slices(std::span<const double>(a), plan);
}

/// Percentage of slices discarded: 100 * (1 - selected / total).
inline double redundancy_report(long long total_slices, long long selected)
{
    if (total_slices <= 0 || selected < 0 || selected > total_slices)
        throw Error(ErrorCode::invalid_argument, "need total > 0 and 0 <= selected <= total");
    return 100.0 * (1.0 - static_cast<double>(selected) / static_cast<double>(total_slices));
}

} // namespace kds

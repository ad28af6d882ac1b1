#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "kds/kde.hpp"

using namespace kds;

namespace {

std::vector<double> random_samples(std::mt19937& rng, int n, double lo = 0.0, double hi = 1000.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> x(n);
    for (auto& v : x)
        v = u(rng);
    return x;
}

// Samples standardized to mean 0 and sample sd (n-1) exactly 1, up to rounding.
std::vector<double> unit_sd_samples(int n)
{
    std::mt19937 rng(99);
    std::normal_distribution<double> g;
    std::vector<double> x(n);
    for (auto& v : x)
        v = g(rng);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x)
        ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1));
    for (auto& v : x)
        v = (v - mean) / sd;
    return x;
}

double simple_trapezoid(const std::vector<double>& x, const std::vector<double>& y)
{
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        s += (x[i + 1] - x[i]) * (y[i] + y[i + 1]) / 2.0;
    return s;
}

} // namespace

TEST(ScottBandwidth, UnitSigmaHundredSamples)
{
    const auto x = unit_sd_samples(100);
    const auto bw = scott_bandwidth(x);
    // 1.06 * 100^(-1/5) = 1.06 / 10^0.4
    EXPECT_NEAR(bw.h, 1.06 / std::pow(10.0, 0.4), 1e-12);
    EXPECT_NEAR(bw.h, 0.421994, 1e-6);
    EXPECT_FALSE(bw.degenerate);
}

TEST(ScottBandwidth, IdenticalSamplesFallBack)
{
    const std::vector<double> same(10, 4000.0);
    const auto bw = scott_bandwidth(same);
    EXPECT_TRUE(bw.degenerate);
    EXPECT_DOUBLE_EQ(bw.h, 40.0);
    const std::vector<double> small(5, 3.0);
    EXPECT_DOUBLE_EQ(scott_bandwidth(small).h, 1.0);
}

TEST(ScottBandwidth, SingleSampleRejected)
{
    const std::vector<double> one{5.0};
    try {
        scott_bandwidth(one);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::insufficient_samples);
    }
}

TEST(ScottBandwidth, ScalesWithData)
{
    std::mt19937 rng(21);
    for (int t = 0; t < 50; ++t) {
        auto x = random_samples(rng, 2 + t);
        const double h = scott_bandwidth(x).h;
        for (double c : {-3.5, 0.25, 17.0}) {
            std::vector<double> y(x.size());
            std::ranges::transform(x, y.begin(), [c](double v) { return c * v; });
            EXPECT_NEAR(scott_bandwidth(y).h, std::abs(c) * h, 1e-9 * std::abs(c) * h);
        }
    }
}

TEST(ScottBandwidth, EqualWeightsMatchUnweighted)
{
    std::mt19937 rng(22);
    const auto x = random_samples(rng, 37);
    const std::vector<double> w(x.size(), 3.0);
    EXPECT_NEAR(scott_bandwidth(x, w).h, scott_bandwidth(x).h, 1e-9);
}

TEST(GaussianKernel, Values)
{
    EXPECT_DOUBLE_EQ(gaussian_kernel(3.0, 3.0, 2.0), 1.0);
    const double h = 2.5;
    EXPECT_NEAR(gaussian_kernel(10.0, 10.0 + h, h * h / 2.0), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(gaussian_kernel(0.0, 1.0, 0.5), 0.367879, 1e-6);
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-100, 100);
    for (int t = 0; t < 100; ++t) {
        const double a = u(rng), b = u(rng);
        EXPECT_EQ(gaussian_kernel(a, b, 30.0), gaussian_kernel(b, a, 30.0));
    }
}

TEST(EstimateDensity, GridAndVariance)
{
    const std::vector<double> x{10.0, 20.0, 40.0};
    const auto m = estimate_density(x, 2.0);
    ASSERT_EQ(m.grid.size(), 100u);
    EXPECT_DOUBLE_EQ(m.grid.front(), 4.0);
    EXPECT_DOUBLE_EQ(m.grid.back(), 46.0);
    EXPECT_DOUBLE_EQ(m.kernel_variance, 2.0);
    EXPECT_TRUE(std::ranges::is_sorted(m.grid));
}

TEST(EstimateDensity, SingleSamplePeaksAtNearestGridPoint)
{
    const std::vector<double> x{12.3};
    const auto m = estimate_density(x, 1.7);
    // The sample sits midway between two grid points; either may carry the peak.
    const auto peak = std::ranges::max_element(m.density) - m.density.begin();
    const double spacing = m.grid[1] - m.grid[0];
    EXPECT_LE(std::abs(m.grid[peak] - 12.3), spacing / 2 + 1e-9);
}

TEST(EstimateDensity, SymmetricBimodalMass)
{
    const std::vector<double> x{-10.0, 10.0};
    const auto m = cdf(estimate_density(x, 1.0));
    EXPECT_GT(m.evaluate(-10.0), 10 * m.evaluate(0.0));
    EXPECT_GT(m.evaluate(10.0), 10 * m.evaluate(0.0));
    // Symmetric grid: mass left of 0 equals mass right of 0.
    EXPECT_NEAR(m.cdf_at(0.0), 0.5, 1e-6);
    EXPECT_NEAR(1.0 - m.cdf_at(0.0), m.cdf_at(0.0), 1e-6);
}

TEST(EstimateDensity, NormalizedAndNonNegative)
{
    std::mt19937 rng(24);
    for (int t = 0; t < 50; ++t) {
        const auto x = random_samples(rng, 2 + t * 3);
        const auto m = estimate_density(x, scott_bandwidth(x).h);
        EXPECT_NEAR(simple_trapezoid(m.grid, m.density), 1.0, 1e-9);
        for (double d : m.density)
            EXPECT_GE(d, 0.0);
    }
}

TEST(EstimateDensity, MatchesDirectSummationOffGrid)
{
    std::mt19937 rng(25);
    for (int t = 0; t < 20; ++t) {
        const int n = 1 + t;
        const auto x = random_samples(rng, n, -50.0, 50.0);
        const double h = n >= 2 ? scott_bandwidth(x).h : 3.0;
        const auto m = estimate_density(x, h);

        // Independent normalizer: trapezoid of the raw sum on the same grid.
        const auto raw = [&](double g) {
            double s = 0.0;
            for (double xi : x)
                s += std::exp(-(g - xi) * (g - xi) / (h * h));
            return s / n;
        };
        std::vector<double> rg(m.grid.size());
        std::ranges::transform(m.grid, rg.begin(), raw);
        const double z = simple_trapezoid(m.grid, rg);

        std::uniform_real_distribution<double> where(m.grid.front(), m.grid.back());
        for (int k = 0; k < 1000; ++k) {
            const double g = where(rng);
            EXPECT_NEAR(m.evaluate(g), raw(g) / z, 1e-9);
        }
    }
}

TEST(Cdf, UniformDensityIsLinear)
{
    KdeModel m;
    for (int i = 0; i < 100; ++i)
        m.grid.push_back(i / 99.0);
    m.density.assign(100, 1.0);
    m = cdf(m);
    for (int i = 0; i < 100; ++i)
        EXPECT_NEAR(m.cdf[i], i / 99.0, 1e-12);
    EXPECT_NEAR(m.quantile(0.5), 0.5, 1.0 / 99.0);
    EXPECT_DOUBLE_EQ(m.quantile(0.0), 0.0);
    EXPECT_DOUBLE_EQ(m.quantile(1.0), 1.0);
}

TEST(Cdf, MonotoneWithExactEndpoints)
{
    std::mt19937 rng(26);
    for (int t = 0; t < 30; ++t) {
        const auto x = random_samples(rng, 2 + t);
        const auto m = cdf(estimate_density(x, scott_bandwidth(x).h));
        EXPECT_EQ(m.cdf.front(), 0.0);
        EXPECT_EQ(m.cdf.back(), 1.0);
        EXPECT_TRUE(std::ranges::is_sorted(m.cdf));
    }
}

TEST(Cdf, SymmetricDensityHalfAtCenter)
{
    const std::vector<double> x{1.0, 3.0, 4.0, 6.0, 8.0, 9.0, 11.0};
    const auto m = cdf(estimate_density(x, scott_bandwidth(x).h));
    EXPECT_NEAR(m.cdf_at(6.0), 0.5, 1e-6);
}

TEST(Quantile, RoundTripAndMonotone)
{
    std::mt19937 rng(27);
    for (int t = 0; t < 40; ++t) {
        const auto x = random_samples(rng, 2 + t * 5);
        const auto m = cdf(estimate_density(x, scott_bandwidth(x).h));
        double prev = -1e300;
        for (int k = 1; k <= 9; ++k) {
            const double p = k / 10.0;
            const double q = quantile(m, p);
            EXPECT_NEAR(m.cdf_at(q), p, 1e-6);
            EXPECT_GE(q, prev);
            prev = q;
        }
        EXPECT_EQ(m.quantile(0.0), m.grid.front());
        EXPECT_EQ(m.quantile(1.0), m.grid.back());
    }
}

TEST(Quantile, FlatStretchResolvesLeft)
{
    KdeModel m;
    m.grid = {0.0, 1.0, 2.0, 3.0};
    m.density = {1.0, 0.0, 0.0, 1.0};
    m = cdf(m);
    ASSERT_DOUBLE_EQ(m.cdf[1], 0.5);
    ASSERT_DOUBLE_EQ(m.cdf[2], 0.5);
    EXPECT_DOUBLE_EQ(m.quantile(0.5), 1.0);
}

TEST(Quantile, RequiresCdf)
{
    const std::vector<double> x{1.0, 2.0};
    const auto m = estimate_density(x, 1.0);
    EXPECT_THROW((void)m.quantile(0.5), Error);
}

TEST(Kde, ShiftEquivariance)
{
    std::mt19937 rng(28);
    for (int t = 0; t < 30; ++t) {
        const auto x = random_samples(rng, 2 + t * 4);
        const double h = scott_bandwidth(x).h;
        const double c = 37.25;
        std::vector<double> y(x.size());
        std::ranges::transform(x, y.begin(), [c](double v) { return v + c; });
        const auto a = cdf(estimate_density(x, h));
        const auto b = cdf(estimate_density(y, h));
        for (std::size_t i = 0; i < a.grid.size(); ++i) {
            EXPECT_NEAR(b.grid[i], a.grid[i] + c, 1e-9);
            EXPECT_NEAR(b.density[i], a.density[i], 1e-9);
        }
        for (int k = 1; k < 20; ++k)
            EXPECT_NEAR(b.quantile(k / 20.0), a.quantile(k / 20.0) + c, 1e-9);
    }
}

TEST(EstimateDensity, BadArguments)
{
    const std::vector<double> x{1.0, 2.0};
    EXPECT_THROW(estimate_density(x, 0.0), Error);
    EXPECT_THROW(estimate_density(x, 1.0, 1), Error);
    const std::vector<double> none;
    EXPECT_THROW(estimate_density(none, 1.0), Error);
    const std::vector<double> nan{1.0, std::nan("")};
    EXPECT_THROW(estimate_density(nan, 1.0), Error);
}

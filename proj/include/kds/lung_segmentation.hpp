#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "kds/error.hpp"
#include "kds/image.hpp"

namespace kds {

struct BinaryMask {
    Grid<std::uint8_t> bits;
    double threshold = 0.0;

    [[nodiscard]] int rows() const noexcept { return bits.rows(); }
    [[nodiscard]] int cols() const noexcept { return bits.cols(); }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

/// Inclusive pixel bounds.
struct CropBox {
    int row_min = 0;
    int row_max = 0;
    int col_min = 0;
    int col_max = 0;

    [[nodiscard]] int height() const noexcept { return row_max - row_min + 1; }
    [[nodiscard]] int width() const noexcept { return col_max - col_min + 1; }
    [[nodiscard]] bool contains(int r, int c) const noexcept
    {
        return r >= row_min && r <= row_max && c >= col_min && c <= col_max;
    }
    [[nodiscard]] bool fits(int rows, int cols) const noexcept
    {
        return row_min >= 0 && col_min >= 0 && row_min <= row_max && col_min <= col_max &&
               row_max < rows && col_max < cols;
    }

    static CropBox full_frame(int rows, int cols) noexcept { return {0, rows - 1, 0, cols - 1}; }

    friend bool operator==(const CropBox&, const CropBox&) = default;
};

/// Default threshold on the 8-bit scale.
inline constexpr double kDefaultThreshold8 = 100.0;

/// Express an 8-bit-scale threshold in the units of a slice with the given depth.
inline double scale_threshold(double t8, int bit_depth) noexcept
{
    return bit_depth == 16 ? t8 * 65535.0 / 255.0 : t8;
}

/// 1 where value >= t.
template <typename T>
BinaryMask binarize(const Grid<T>& filtered, double t)
{
    BinaryMask mask{Grid<std::uint8_t>(filtered.rows(), filtered.cols()), t};
    std::ranges::transform(filtered.values(), mask.bits.values().begin(), [t](T v) {
        return static_cast<std::uint8_t>(static_cast<double>(v) >= t ? 1 : 0);
    });
    return mask;
}

/// Set every 0-pixel that has no 4-connected path of 0-pixels to the border.
inline BinaryMask fill_holes(const BinaryMask& mask)
{
    const int rows = mask.rows();
    const int cols = mask.cols();
    // 0 = unvisited background, 1 = foreground, 2 = border-reachable background
    Grid<std::uint8_t> state = mask.bits;
    std::vector<std::pair<int, int>> stack;
    const auto seed = [&](int r, int c) {
        if (state(r, c) == 0) {
            state(r, c) = 2;
            stack.emplace_back(r, c);
        }
    };
    for (int r = 0; r < rows; ++r) {
        seed(r, 0);
        seed(r, cols - 1);
    }
    for (int c = 0; c < cols; ++c) {
        seed(0, c);
        seed(rows - 1, c);
    }
    while (!stack.empty()) {
        const auto [r, c] = stack.back();
        stack.pop_back();
        if (r > 0)
            seed(r - 1, c);
        if (r + 1 < rows)
            seed(r + 1, c);
        if (c > 0)
            seed(r, c - 1);
        if (c + 1 < cols)
            seed(r, c + 1);
    }
    BinaryMask out{Grid<std::uint8_t>(rows, cols), mask.threshold};
    std::ranges::transform(state.values(), out.bits.values().begin(),
                           [](std::uint8_t s) { return static_cast<std::uint8_t>(s == 2 ? 0 : 1); });
    return out;
}

inline long long lung_area(const BinaryMask& mask)
{
    return std::accumulate(mask.bits.values().begin(), mask.bits.values().end(), 0LL);
}

/// Foreground count restricted to `box`.
inline long long lung_area(const BinaryMask& mask, const CropBox& box)
{
    long long n = 0;
    for (int r = box.row_min; r <= box.row_max; ++r)
        for (int c = box.col_min; c <= box.col_max; ++c)
            n += mask.bits(r, c);
    return n;
}

/// Bounding box of the union of all foreground pixels. Throws empty_mask_volume
/// when there is none.
inline CropBox crop_box(std::span<const BinaryMask> masks)
{
    if (masks.empty())
        throw Error(ErrorCode::empty_mask_volume, "no masks");
    const int rows = masks.front().rows();
    const int cols = masks.front().cols();
    CropBox box{rows, -1, cols, -1};
    for (const auto& m : masks) {
        if (m.rows() != rows || m.cols() != cols)
            throw Error(ErrorCode::invalid_argument, "masks differ in size");
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                if (m.bits(r, c)) {
                    box.row_min = std::min(box.row_min, r);
                    box.row_max = std::max(box.row_max, r);
                    box.col_min = std::min(box.col_min, c);
                    box.col_max = std::max(box.col_max, c);
                }
    }
    if (box.row_max < 0)
        throw Error(ErrorCode::empty_mask_volume, "no foreground pixel in any slice");
    return box;
}

/// Crop to `box` and bilinearly resample to out_size x out_size using pixel-centre
/// alignment. Output keeps the input bit depth (round half-up).
inline SliceImage crop_and_resize(const SliceImage& slice, const CropBox& box, int out_size = 256)
{
    if (!box.fits(slice.height(), slice.width()))
        throw Error(ErrorCode::invalid_argument, "crop box outside slice bounds");
    if (out_size < 1)
        throw Error(ErrorCode::invalid_argument, "output size must be positive");
    const int h = box.height();
    const int w = box.width();
    const double sy = static_cast<double>(h) / out_size;
    const double sx = static_cast<double>(w) / out_size;

    // Per-axis source taps: lower index and fractional weight.
    struct Tap {
        int lo;
        int hi;
        double frac;
    };
    const auto taps = [out_size](double scale, int extent) {
        std::vector<Tap> t(out_size);
        for (int i = 0; i < out_size; ++i) {
            const double src = std::clamp((i + 0.5) * scale - 0.5, 0.0, static_cast<double>(extent - 1));
            const int lo = static_cast<int>(std::floor(src));
            const int hi = std::min(lo + 1, extent - 1);
            t[i] = {lo, hi, src - lo};
        }
        return t;
    };
    const auto ty = taps(sy, h);
    const auto tx = taps(sx, w);

    Grid<std::uint16_t> out(out_size, out_size);
    const double vmax = slice.max_value();
    for (int i = 0; i < out_size; ++i) {
        const int r0 = box.row_min + ty[i].lo;
        const int r1 = box.row_min + ty[i].hi;
        const double fy = ty[i].frac;
        for (int j = 0; j < out_size; ++j) {
            const int c0 = box.col_min + tx[j].lo;
            const int c1 = box.col_min + tx[j].hi;
            const double fx = tx[j].frac;
            const double top = slice.pixels(r0, c0) * (1.0 - fx) + slice.pixels(r0, c1) * fx;
            const double bot = slice.pixels(r1, c0) * (1.0 - fx) + slice.pixels(r1, c1) * fx;
            const double v = top * (1.0 - fy) + bot * fy;
            out(i, j) = static_cast<std::uint16_t>(std::clamp(std::floor(v + 0.5), 0.0, vmax));
        }
    }
    return {std::move(out), slice.bit_depth};
}

} // namespace kds

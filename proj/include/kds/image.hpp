#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kds/error.hpp"

namespace kds {

/// Dense row-major 2-D grid.
template <typename T>
class Grid {
public:
    using value_type = T;

    Grid() = default;
    Grid(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(checked_size(rows, cols), fill)
    {
    }
    Grid(int rows, int cols, std::vector<T> data) : rows_(rows), cols_(cols), data_(std::move(data))
    {
        if (data_.size() != checked_size(rows, cols))
            throw Error(ErrorCode::invalid_argument, "grid data size does not match dimensions");
    }

    [[nodiscard]] int rows() const noexcept { return rows_; }
    [[nodiscard]] int cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    T& operator()(int r, int c) noexcept
    {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }
    const T& operator()(int r, int c) const noexcept
    {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }

    // Replicate (clamp-to-edge) access.
    const T& clamped(int r, int c) const noexcept
    {
        return (*this)(std::clamp(r, 0, rows_ - 1), std::clamp(c, 0, cols_ - 1));
    }

    [[nodiscard]] std::span<T> values() noexcept { return data_; }
    [[nodiscard]] std::span<const T> values() const noexcept { return data_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    static std::size_t checked_size(int rows, int cols)
    {
        if (rows < 0 || cols < 0)
            throw Error(ErrorCode::invalid_argument, "negative grid dimensions");
        return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

using RealImage = Grid<double>;

/// Single-channel CT slice with 8- or 16-bit samples.
struct SliceImage {
    Grid<std::uint16_t> pixels;
    int bit_depth = 8;

    SliceImage() = default;
    SliceImage(Grid<std::uint16_t> px, int depth) : pixels(std::move(px)), bit_depth(depth)
    {
        if (depth != 8 && depth != 16)
            throw Error(ErrorCode::invalid_argument, "bit depth must be 8 or 16");
        const auto limit = max_value();
        if (std::ranges::any_of(pixels.values(), [limit](std::uint16_t v) { return v > limit; }))
            throw Error(ErrorCode::invalid_argument, "pixel exceeds declared bit depth");
    }

    [[nodiscard]] int height() const noexcept { return pixels.rows(); }
    [[nodiscard]] int width() const noexcept { return pixels.cols(); }
    [[nodiscard]] std::uint16_t max_value() const noexcept
    {
        return bit_depth == 16 ? std::uint16_t{65535} : std::uint16_t{255};
    }

    friend bool operator==(const SliceImage&, const SliceImage&) = default;
};

inline RealImage to_real(const Grid<std::uint16_t>& img)
{
    RealImage out(img.rows(), img.cols());
    std::ranges::transform(img.values(), out.values().begin(),
                           [](std::uint16_t v) { return static_cast<double>(v); });
    return out;
}

} // namespace kds

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "kds/error.hpp"
#include "kds/image.hpp"

namespace kds {

namespace detail {

// BT.601 luma, rounded half-up.
inline std::uint16_t luma(double r, double g, double b) noexcept
{
    return static_cast<std::uint16_t>(std::floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5));
}

template <typename Px>
Grid<std::uint16_t> mat_to_gray(const cv::Mat& m)
{
    Grid<std::uint16_t> out(m.rows, m.cols);
    const int ch = m.channels();
    for (int r = 0; r < m.rows; ++r) {
        const Px* row = m.ptr<Px>(r);
        for (int c = 0; c < m.cols; ++c) {
            const Px* px = row + static_cast<std::ptrdiff_t>(c) * ch;
            if (ch == 1)
                out(r, c) = px[0];
            else // OpenCV stores colour as BGR(A)
                out(r, c) = luma(px[2], px[1], px[0]);
        }
    }
    return out;
}

} // namespace detail

/// Decode one slice file as single-channel grayscale. Returns nullopt when the
/// file cannot be decoded (missing, truncated, unsupported sample type).
inline std::optional<SliceImage> read_slice(const std::filesystem::path& path)
{
    cv::Mat m;
    try {
        m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    } catch (const cv::Exception&) {
        return std::nullopt;
    }
    if (m.empty() || m.rows < 1 || m.cols < 1)
        return std::nullopt;
    const int ch = m.channels();
    if (ch != 1 && ch != 3 && ch != 4)
        return std::nullopt;
    switch (m.depth()) {
    case CV_8U: return SliceImage(detail::mat_to_gray<std::uint8_t>(m), 8);
    case CV_16U: return SliceImage(detail::mat_to_gray<std::uint16_t>(m), 16);
    default: return std::nullopt;
    }
}

namespace detail {

inline void imwrite_checked(const std::filesystem::path& path, const cv::Mat& m)
{
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), m, {cv::IMWRITE_PNG_COMPRESSION, 6});
    } catch (const cv::Exception& e) {
        throw Error(ErrorCode::io_error, path.string() + ": " + e.what());
    }
    if (!ok)
        throw Error(ErrorCode::io_error, "cannot write " + path.string());
}

} // namespace detail

/// Write an 8-bit grayscale PNG. 16-bit slices are rescaled to 0..255 (round half-up).
inline void write_png8(const std::filesystem::path& path, const SliceImage& img)
{
    cv::Mat m(img.height(), img.width(), CV_8UC1);
    for (int r = 0; r < img.height(); ++r) {
        auto* row = m.ptr<std::uint8_t>(r);
        for (int c = 0; c < img.width(); ++c) {
            const std::uint16_t v = img.pixels(r, c);
            row[c] = img.bit_depth == 16
                         ? static_cast<std::uint8_t>(std::floor(v * 255.0 / 65535.0 + 0.5))
                         : static_cast<std::uint8_t>(v);
        }
    }
    detail::imwrite_checked(path, m);
}

/// Write a slice at its native depth (8- or 16-bit PNG). Used for fixtures.
inline void write_png(const std::filesystem::path& path, const SliceImage& img)
{
    cv::Mat m(img.height(), img.width(), img.bit_depth == 16 ? CV_16UC1 : CV_8UC1);
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c) {
            if (img.bit_depth == 16)
                m.at<std::uint16_t>(r, c) = img.pixels(r, c);
            else
                m.at<std::uint8_t>(r, c) = static_cast<std::uint8_t>(img.pixels(r, c));
        }
    detail::imwrite_checked(path, m);
}

} // namespace kds

#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "kds/error.hpp"
#include "kds/image.hpp"
#include "kds/image_io.hpp"
#include "kds/natural_order.hpp"

namespace kds {

namespace fs = std::filesystem;

enum class Label { covid, non_covid, unknown };

inline constexpr std::string_view to_string(Label l) noexcept
{
    switch (l) {
    case Label::covid: return "covid";
    case Label::non_covid: return "non-covid";
    case Label::unknown: return "unknown";
    }
    return "unknown";
}

inline std::optional<Label> parse_label(std::string_view s) noexcept
{
    if (s == "covid")
        return Label::covid;
    if (s == "non-covid")
        return Label::non_covid;
    if (s == "unknown")
        return Label::unknown;
    return std::nullopt;
}

/// An ordered stack of grayscale slices. Immutable once loaded.
struct ScanVolume {
    std::string scan_id;
    std::optional<int> source_id; // empty for the flat layout
    Label label = Label::unknown;
    std::vector<SliceImage> slices;
    std::vector<std::string> slice_files;      // parallel to slices
    std::vector<std::string> unreadable_files; // skipped during decoding

    [[nodiscard]] std::size_t size() const noexcept { return slices.size(); }

    friend bool operator==(const ScanVolume&, const ScanVolume&) = default;
};

enum class QcReason { inconsistent_dimensions, too_few_slices, unreadable_file, empty_scan };

inline constexpr std::string_view to_string(QcReason r) noexcept
{
    switch (r) {
    case QcReason::inconsistent_dimensions: return "inconsistent_dimensions";
    case QcReason::too_few_slices: return "too_few_slices";
    case QcReason::unreadable_file: return "unreadable_file";
    case QcReason::empty_scan: return "empty_scan";
    }
    return "unknown";
}

inline std::optional<QcReason> parse_qc_reason(std::string_view s) noexcept
{
    for (auto r : {QcReason::inconsistent_dimensions, QcReason::too_few_slices,
                   QcReason::unreadable_file, QcReason::empty_scan})
        if (to_string(r) == s)
            return r;
    return std::nullopt;
}

struct QcReport {
    std::string scan_id;
    bool accepted = true;
    std::vector<QcReason> reasons;

    void reject(QcReason r)
    {
        if (std::ranges::find(reasons, r) == reasons.end())
            reasons.push_back(r);
        accepted = false;
    }

    friend bool operator==(const QcReport&, const QcReport&) = default;
};

inline constexpr std::size_t kMinSlicesPerScan = 5;

inline bool is_slice_file(const fs::path& p)
{
    std::string ext = p.extension().string();
    std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

/// Slice-file names (not paths) in a scan directory, natural-ordered.
inline std::vector<std::string> list_slice_files(const fs::path& dir)
{
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw Error(ErrorCode::io_error, "not a directory: " + dir.string());
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && is_slice_file(entry.path()))
            names.push_back(entry.path().filename().string());
    }
    if (ec)
        throw Error(ErrorCode::io_error, "cannot list " + dir.string() + ": " + ec.message());
    return order_slices(std::move(names));
}

/// Decode every slice file in `dir`. Undecodable files are recorded and skipped;
/// throws empty_scan when nothing decodes.
inline ScanVolume load_scan(const fs::path& dir, std::string scan_id,
                            std::optional<int> source_id = std::nullopt,
                            Label label = Label::unknown)
{
    ScanVolume vol;
    vol.scan_id = std::move(scan_id);
    vol.source_id = source_id;
    vol.label = label;
    for (auto& name : list_slice_files(dir)) {
        if (auto img = read_slice(dir / name)) {
            vol.slices.push_back(std::move(*img));
            vol.slice_files.push_back(std::move(name));
        } else {
            vol.unreadable_files.push_back(std::move(name));
        }
    }
    if (vol.slices.empty())
        throw Error(ErrorCode::empty_scan, "no decodable slices in " + dir.string());
    return vol;
}

inline QcReport check_consistency(const ScanVolume& scan)
{
    QcReport report;
    report.scan_id = scan.scan_id;
    if (scan.slices.empty()) {
        report.reject(QcReason::empty_scan);
        return report;
    }
    const auto& first = scan.slices.front();
    const bool same = std::ranges::all_of(scan.slices, [&](const SliceImage& s) {
        return s.height() == first.height() && s.width() == first.width();
    });
    if (!same)
        report.reject(QcReason::inconsistent_dimensions);
    if (scan.slices.size() < kMinSlicesPerScan)
        report.reject(QcReason::too_few_slices);
    return report;
}

} // namespace kds

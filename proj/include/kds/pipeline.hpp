#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <thread>
#include <tuple>
#include <variant>
#include <utility>
#include <vector>

#include "kds/config.hpp"
#include "kds/error.hpp"
#include "kds/image_io.hpp"
#include "kds/lung_segmentation.hpp"
#include "kds/manifest.hpp"
#include "kds/scan_ingest.hpp"
#include "kds/slice_sampler.hpp"
#include "kds/spatial_filtering.hpp"

namespace kds {

/// A scan directory found under a dataset root.
struct ScanEntry {
    std::string scan_id;
    std::optional<int> source_id;
    Label label = Label::unknown;
    fs::path dir;

    friend bool operator==(const ScanEntry&, const ScanEntry&) = default;
};

namespace detail {

inline std::optional<int> parse_source_dir(const std::string& name)
{
    int v = 0;
    const auto* end = name.data() + name.size();
    const auto [ptr, ec] = std::from_chars(name.data(), end, v);
    if (ec != std::errc{} || ptr != end || name.empty())
        return std::nullopt;
    return v;
}

inline std::vector<fs::path> subdirectories(const fs::path& dir)
{
    std::error_code ec;
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir, ec))
        if (e.is_directory())
            out.push_back(e.path());
    if (ec)
        throw Error(ErrorCode::io_error, "cannot list " + dir.string() + ": " + ec.message());
    return out;
}

inline auto entry_key(const ScanEntry& e) { return std::tie(e.scan_id, e.source_id, e.label); }

} // namespace detail

/// Enumerate scans under `root`. Tree layout: <root>/<source>/<label>/<scan_id>/;
/// directories that do not fit the layout are skipped. Flat layout: <root>/<scan_id>/.
/// The result is sorted by (scan_id, source, label).
inline std::vector<ScanEntry> discover_scans(const fs::path& root, Layout layout)
{
    std::error_code ec;
    if (!fs::is_directory(root, ec))
        throw Error(ErrorCode::io_error, "dataset root is not a directory: " + root.string());
    std::vector<ScanEntry> scans;
    if (layout == Layout::flat) {
        for (auto& d : detail::subdirectories(root))
            scans.push_back({d.filename().string(), std::nullopt, Label::unknown, d});
    } else {
        for (const auto& src_dir : detail::subdirectories(root)) {
            const auto source = detail::parse_source_dir(src_dir.filename().string());
            if (!source)
                continue;
            for (const auto& label_dir : detail::subdirectories(src_dir)) {
                const auto label = parse_label(label_dir.filename().string());
                if (!label || *label == Label::unknown)
                    continue;
                for (auto& d : detail::subdirectories(label_dir))
                    scans.push_back({d.filename().string(), source, *label, d});
            }
        }
    }
    std::ranges::sort(scans, [](const ScanEntry& a, const ScanEntry& b) {
        return detail::entry_key(a) < detail::entry_key(b);
    });
    return scans;
}

/// In-memory result of processing one accepted scan.
struct ScanResult {
    ScanManifest manifest;
    std::vector<SliceImage> exports; // parallel to manifest.selected
};

inline std::string export_name(const std::string& scan_id, int j, int index)
{
    return scan_id + "_k" + std::to_string(j) + "_s" + std::to_string(index) + ".png";
}

inline constexpr std::string_view kSliceDir = "slices";

/// Filter, segment, crop, sample and resample one QC-accepted scan.
inline ScanResult analyze_scan(const ScanVolume& scan, const PipelineConfig& config)
{
    const auto kernel = FilterKernel::uniform(config.kernel_radius);
    const double t8 = config.threshold_for(scan.source_id);

    std::vector<BinaryMask> masks;
    masks.reserve(scan.size());
    for (const auto& slice : scan.slices) {
        const RealImage filtered = apply_filter(slice, config.filter_mode, kernel);
        masks.push_back(fill_holes(binarize(filtered, scale_threshold(t8, slice.bit_depth))));
    }

    ScanResult result;
    auto& m = result.manifest;
    m.scan_id = scan.scan_id;
    m.source_id = scan.source_id;
    m.label = scan.label;
    m.qc = check_consistency(scan);
    m.unreadable_files = scan.unreadable_files;
    try {
        m.crop = crop_box(masks);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::empty_mask_volume)
            throw;
        m.crop = CropBox::full_frame(scan.slices.front().height(), scan.slices.front().width());
        m.full_frame = true;
    }
    for (const auto& mask : masks)
        m.areas.push_back(lung_area(mask, m.crop));

    const Selection sel = select_slices(std::span<const long long>(m.areas), config.plan());
    m.bandwidth = sel.bandwidth.h;
    m.degenerate_bandwidth = sel.bandwidth.degenerate;
    for (std::size_t j = 0; j < sel.indices.size(); ++j) {
        const int idx = sel.indices[j];
        const auto name = export_name(scan.scan_id, static_cast<int>(j), idx);
        m.selected.push_back({idx, sel.per_index_quantile[j], (fs::path(kSliceDir) / name).generic_string()});
        result.exports.push_back(crop_and_resize(scan.slices[idx], m.crop, config.out_size));
    }
    return result;
}

struct RunResult {
    Manifest manifest;
    long long total_slices = 0; // decoded slices of accepted scans
    long long selected_slices = 0;

    [[nodiscard]] double redundancy() const
    {
        return total_slices > 0 ? redundancy_report(total_slices, selected_slices) : 0.0;
    }
};

/// Process one discovered scan directory: load, QC, analyze and write its slices.
/// Returns the manifest entry for accepted scans, the exclusion otherwise.
inline std::variant<ScanManifest, Exclusion> process_entry(const ScanEntry& entry, const PipelineConfig& config,
                                                           const fs::path& out_root)
{
    ScanVolume scan;
    try {
        scan = load_scan(entry.dir, entry.scan_id, entry.source_id, entry.label);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::empty_scan)
            throw;
        std::vector<std::string> unreadable;
        for (const auto& f : list_slice_files(entry.dir))
            unreadable.push_back(f);
        return Exclusion{entry.scan_id, entry.source_id, entry.label, {QcReason::empty_scan}, std::move(unreadable)};
    }
    const QcReport qc = check_consistency(scan);
    if (!qc.accepted)
        return Exclusion{entry.scan_id, entry.source_id, entry.label, qc.reasons, scan.unreadable_files};

    auto result = analyze_scan(scan, config);
    for (std::size_t j = 0; j < result.exports.size(); ++j)
        write_png8(out_root / result.manifest.selected[j].file, result.exports[j]);
    return std::move(result.manifest);
}

/// Run the full preprocessing over a dataset. Scans are distributed over
/// config.workers threads; results are merged in discovery order, so output
/// bytes do not depend on the worker count. Writes <out_root>/manifest.json.
inline RunResult run_pipeline(const fs::path& dataset_root, const PipelineConfig& config, const fs::path& out_root)
{
    config.validate();
    const auto entries = discover_scans(dataset_root, config.layout);
    for (std::size_t i = 1; i < entries.size(); ++i)
        if (entries[i].scan_id == entries[i - 1].scan_id)
            throw Error(ErrorCode::invalid_argument, "duplicate scan id '" + entries[i].scan_id + "'");

    std::error_code ec;
    fs::create_directories(out_root / kSliceDir, ec);
    if (ec)
        throw Error(ErrorCode::io_error, "cannot create " + (out_root / kSliceDir).string() + ": " + ec.message());

    std::vector<std::optional<std::variant<ScanManifest, Exclusion>>> results(entries.size());
    std::vector<std::exception_ptr> errors(entries.size());
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < entries.size(); i = next++) {
            try {
                results[i] = process_entry(entries[i], config, out_root);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto n_threads = static_cast<std::size_t>(std::max(1, config.workers));
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(n_threads, entries.size()); ++t)
            pool.emplace_back(work);
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    RunResult run;
    run.manifest.config = config;
    for (auto& r : results) {
        if (auto* s = std::get_if<ScanManifest>(&*r)) {
            run.total_slices += static_cast<long long>(s->areas.size());
            run.selected_slices += static_cast<long long>(s->selected.size());
            run.manifest.scans.push_back(std::move(*s));
        } else {
            run.manifest.excluded.push_back(std::get<Exclusion>(std::move(*r)));
        }
    }
    write_manifest(run.manifest, out_root / "manifest.json");
    return run;
}

/// "redundancy reduction: 96.11% (11904 of 306203 slices kept)"
inline std::string format_redundancy(long long total_slices, long long selected)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, "redundancy reduction: %.2f%% (%lld of %lld slices kept)",
                  redundancy_report(total_slices, selected), selected, total_slices);
    return buf;
}

/// Scan and slice-file tallies per (source, label), mirroring a dataset summary table.
struct DatasetStats {
    struct Counts {
        long long scans = 0;
        long long slices = 0;
        friend bool operator==(const Counts&, const Counts&) = default;
    };
    using Key = std::pair<std::optional<int>, Label>;

    std::string split;
    std::map<Key, Counts> cells;

    [[nodiscard]] Counts at(std::optional<int> source, Label label) const
    {
        auto it = cells.find({source, label});
        return it == cells.end() ? Counts{} : it->second;
    }

    [[nodiscard]] Counts source_total(std::optional<int> source) const
    {
        Counts c;
        for (const auto& [k, v] : cells)
            if (k.first == source) {
                c.scans += v.scans;
                c.slices += v.slices;
            }
        return c;
    }

    [[nodiscard]] Counts label_total(Label label) const
    {
        Counts c;
        for (const auto& [k, v] : cells)
            if (k.second == label) {
                c.scans += v.scans;
                c.slices += v.slices;
            }
        return c;
    }

    [[nodiscard]] Counts total() const
    {
        Counts c;
        for (const auto& [k, v] : cells) {
            c.scans += v.scans;
            c.slices += v.slices;
        }
        return c;
    }

    [[nodiscard]] std::vector<std::optional<int>> sources() const
    {
        std::vector<std::optional<int>> out;
        for (const auto& [k, v] : cells)
            if (std::ranges::find(out, k.first) == out.end())
                out.push_back(k.first);
        return out;
    }

    friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

/// Count scans and slice files without decoding them.
inline DatasetStats compute_stats(const fs::path& dataset_root, Layout layout)
{
    DatasetStats stats;
    stats.split = dataset_root.filename().string();
    if (stats.split.empty())
        stats.split = dataset_root.parent_path().filename().string();
    for (const auto& e : discover_scans(dataset_root, layout)) {
        auto& c = stats.cells[{e.source_id, e.label}];
        c.scans += 1;
        c.slices += static_cast<long long>(list_slice_files(e.dir).size());
    }
    return stats;
}

/// Two sub-tables (scan-level, slice-level) with covid / non-covid / total columns,
/// followed by the redundancy reduction for `n_select` slices per scan.
inline std::string format_stats(const DatasetStats& stats, int n_select = kDefaultSliceCount)
{
    std::ostringstream os;
    const auto src_name = [](const std::optional<int>& s) { return s ? std::to_string(*s) : std::string("--"); };
    const bool has_unknown = stats.label_total(Label::unknown).scans > 0;
    const auto table = [&](const char* title, auto field) {
        os << title << " (" << (stats.split.empty() ? "dataset" : stats.split) << ")\n";
        os << "source\tcovid\tnon-covid";
        if (has_unknown)
            os << "\tunknown";
        os << "\ttotal\n";
        for (const auto& s : stats.sources()) {
            os << src_name(s) << '\t' << field(stats.at(s, Label::covid)) << '\t'
               << field(stats.at(s, Label::non_covid));
            if (has_unknown)
                os << '\t' << field(stats.at(s, Label::unknown));
            os << '\t' << field(stats.source_total(s)) << '\n';
        }
        os << "total\t" << field(stats.label_total(Label::covid)) << '\t' << field(stats.label_total(Label::non_covid));
        if (has_unknown)
            os << '\t' << field(stats.label_total(Label::unknown));
        os << '\t' << field(stats.total()) << '\n';
    };
    table("scan-level counts", [](const DatasetStats::Counts& c) { return c.scans; });
    os << '\n';
    table("slice-level counts", [](const DatasetStats::Counts& c) { return c.slices; });
    const auto t = stats.total();
    if (t.slices > 0 && t.scans * n_select <= t.slices)
        os << '\n' << format_redundancy(t.slices, t.scans * n_select) << '\n';
    return os.str();
}

} // namespace kds

#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kds/config.hpp"
#include "kds/error.hpp"
#include "kds/lung_segmentation.hpp"
#include "kds/scan_ingest.hpp"

namespace kds {

struct SelectedSlice {
    int index = 0;
    double quantile = 0.0;
    std::string file; // relative to the output root

    friend bool operator==(const SelectedSlice&, const SelectedSlice&) = default;
};

struct ScanManifest {
    std::string scan_id;
    std::optional<int> source_id;
    Label label = Label::unknown;
    QcReport qc;
    CropBox crop;
    bool full_frame = false; // crop fell back to the whole slice (empty mask volume)
    double bandwidth = 0.0;
    bool degenerate_bandwidth = false;
    std::vector<long long> areas;
    std::vector<SelectedSlice> selected;
    std::vector<std::string> unreadable_files;

    friend bool operator==(const ScanManifest&, const ScanManifest&) = default;
};

struct Exclusion {
    std::string scan_id;
    std::optional<int> source_id;
    Label label = Label::unknown;
    std::vector<QcReason> reasons;
    std::vector<std::string> unreadable_files;

    friend bool operator==(const Exclusion&, const Exclusion&) = default;
};

struct Manifest {
    PipelineConfig config;
    std::vector<ScanManifest> scans;
    std::vector<Exclusion> excluded;

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// Round to 9 significant digits; the JSON writer then emits the shortest
/// representation, which is at most 9 digits.
inline double round_sig9(double v)
{
    if (!std::isfinite(v) || v == 0.0)
        return v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::strtod(buf, nullptr);
}

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson source_json(const std::optional<int>& s) { return s ? ojson(*s) : ojson(nullptr); }

inline ojson reasons_json(const std::vector<QcReason>& reasons)
{
    ojson a = ojson::array();
    for (auto r : reasons)
        a.push_back(to_string(r));
    return a;
}

template <typename Json>
std::optional<int> source_from(const Json& j)
{
    return j.is_null() ? std::nullopt : std::optional<int>(j.template get<int>());
}

template <typename Json>
Label label_from(const Json& j)
{
    auto l = parse_label(j.template get<std::string>());
    if (!l)
        throw Error(ErrorCode::invalid_argument, "unknown label in manifest");
    return *l;
}

template <typename Json>
std::vector<QcReason> reasons_from(const Json& j)
{
    std::vector<QcReason> out;
    for (const auto& r : j) {
        auto q = parse_qc_reason(r.template get<std::string>());
        if (!q)
            throw Error(ErrorCode::invalid_argument, "unknown QC reason in manifest");
        out.push_back(*q);
    }
    return out;
}

} // namespace detail

inline nlohmann::ordered_json manifest_to_json(const Manifest& m)
{
    using detail::ojson;
    ojson root;
    ojson cfg = config_to_json(m.config);
    cfg["threshold"] = round_sig9(m.config.threshold);
    for (auto& [k, v] : cfg["threshold_overrides"].items())
        v = round_sig9(v.get<double>());
    root["config"] = cfg;

    ojson scans = ojson::array();
    for (const auto& s : m.scans) {
        ojson j;
        j["scan_id"] = s.scan_id;
        j["source_id"] = detail::source_json(s.source_id);
        j["label"] = to_string(s.label);
        j["accepted"] = s.qc.accepted;
        j["reasons"] = detail::reasons_json(s.qc.reasons);
        j["crop"] = {s.crop.row_min, s.crop.row_max, s.crop.col_min, s.crop.col_max};
        j["full_frame"] = s.full_frame;
        j["bandwidth"] = round_sig9(s.bandwidth);
        j["degenerate_bandwidth"] = s.degenerate_bandwidth;
        j["areas"] = s.areas;
        ojson sel = ojson::array();
        for (const auto& p : s.selected) {
            ojson e;
            e["index"] = p.index;
            e["quantile"] = round_sig9(p.quantile);
            e["file"] = p.file;
            sel.push_back(std::move(e));
        }
        j["selected"] = std::move(sel);
        j["unreadable_files"] = s.unreadable_files;
        scans.push_back(std::move(j));
    }
    root["scans"] = std::move(scans);

    ojson excluded = ojson::array();
    for (const auto& e : m.excluded) {
        ojson j;
        j["scan_id"] = e.scan_id;
        j["source_id"] = detail::source_json(e.source_id);
        j["label"] = to_string(e.label);
        j["reasons"] = detail::reasons_json(e.reasons);
        j["unreadable_files"] = e.unreadable_files;
        excluded.push_back(std::move(j));
    }
    root["excluded"] = std::move(excluded);
    return root;
}

inline std::string manifest_to_string(const Manifest& m) { return manifest_to_json(m).dump(2) + "\n"; }

inline Manifest parse_manifest(const std::string& text)
{
    Manifest m;
    try {
        const auto root = nlohmann::json::parse(text);
        m.config = config_from_json(root.at("config"));
        for (const auto& j : root.at("scans")) {
            ScanManifest s;
            s.scan_id = j.at("scan_id").get<std::string>();
            s.source_id = detail::source_from(j.at("source_id"));
            s.label = detail::label_from(j.at("label"));
            s.qc.scan_id = s.scan_id;
            s.qc.accepted = j.at("accepted").get<bool>();
            s.qc.reasons = detail::reasons_from(j.at("reasons"));
            const auto& c = j.at("crop");
            s.crop = {c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>(), c.at(3).get<int>()};
            s.full_frame = j.at("full_frame").get<bool>();
            s.bandwidth = j.at("bandwidth").get<double>();
            s.degenerate_bandwidth = j.at("degenerate_bandwidth").get<bool>();
            s.areas = j.at("areas").get<std::vector<long long>>();
            for (const auto& e : j.at("selected"))
                s.selected.push_back(
                    {e.at("index").get<int>(), e.at("quantile").get<double>(), e.at("file").get<std::string>()});
            s.unreadable_files = j.at("unreadable_files").get<std::vector<std::string>>();
            m.scans.push_back(std::move(s));
        }
        for (const auto& j : root.at("excluded")) {
            Exclusion e;
            e.scan_id = j.at("scan_id").get<std::string>();
            e.source_id = detail::source_from(j.at("source_id"));
            e.label = detail::label_from(j.at("label"));
            e.reasons = detail::reasons_from(j.at("reasons"));
            e.unreadable_files = j.at("unreadable_files").get<std::vector<std::string>>();
            m.excluded.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("malformed manifest: ") + e.what());
    }
    return m;
}

inline void write_manifest(const Manifest& m, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::io_error, "cannot open " + path.string());
    out << manifest_to_string(m);
    if (!out.flush())
        throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

inline Manifest read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io_error, "cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_manifest(text);
}

} // namespace kds

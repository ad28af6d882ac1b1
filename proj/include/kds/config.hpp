#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "kds/error.hpp"
#include "kds/kde.hpp"
#include "kds/lung_segmentation.hpp"
#include "kds/slice_sampler.hpp"
#include "kds/spatial_filtering.hpp"

namespace kds {

enum class Layout { labeled_tree, flat };

inline constexpr std::string_view to_string(Layout l) noexcept
{
    return l == Layout::labeled_tree ? "tree" : "flat";
}

inline constexpr std::string_view to_string(FilterMode m) noexcept
{
    return m == FilterMode::minimum ? "min" : "mean";
}

inline FilterMode parse_filter_mode(std::string_view s)
{
    if (s == "min" || s == "minimum")
        return FilterMode::minimum;
    if (s == "mean" || s == "weighted_mean")
        return FilterMode::weighted_mean;
    throw Error(ErrorCode::invalid_argument, "unknown filter mode '" + std::string(s) + "'");
}

inline SamplerMode parse_sampler_mode(std::string_view s)
{
    if (s == "area" || s == "area_quantile")
        return SamplerMode::area_quantile;
    if (s == "index" || s == "index_weighted")
        return SamplerMode::index_weighted;
    throw Error(ErrorCode::invalid_argument, "unknown sampler mode '" + std::string(s) + "'");
}

inline Layout parse_layout(std::string_view s)
{
    if (s == "tree" || s == "labeled_tree")
        return Layout::labeled_tree;
    if (s == "flat")
        return Layout::flat;
    throw Error(ErrorCode::invalid_argument, "unknown layout '" + std::string(s) + "'");
}

struct PipelineConfig {
    FilterMode filter_mode = FilterMode::minimum;
    int kernel_radius = 1;
    double threshold = kDefaultThreshold8; // 8-bit scale
    int out_size = 256;
    int n_select = kDefaultSliceCount;
    int kde_grid = kDefaultKdeGrid;
    SamplerMode sampler_mode = SamplerMode::area_quantile;
    Layout layout = Layout::labeled_tree;
    std::map<int, double> threshold_overrides; // source id -> threshold, 8-bit scale
    int workers = 1;                           // never affects output

    [[nodiscard]] double threshold_for(std::optional<int> source) const
    {
        if (source) {
            if (auto it = threshold_overrides.find(*source); it != threshold_overrides.end())
                return it->second;
        }
        return threshold;
    }

    [[nodiscard]] SamplingPlan plan() const
    {
        return {.n_select = n_select, .n_intervals = kDefaultSliceCount, .mode = sampler_mode, .kde_grid = kde_grid};
    }

    void validate() const
    {
        const auto fail = [](const std::string& m) { throw Error(ErrorCode::invalid_argument, m); };
        if (kernel_radius < 1)
            fail("kernel_radius must be positive");
        if (!(threshold > 0.0))
            fail("threshold must be positive");
        for (const auto& [src, t] : threshold_overrides)
            if (!(t > 0.0))
                fail("threshold override for source " + std::to_string(src) + " must be positive");
        if (out_size < 8)
            fail("out_size must be at least 8");
        if (n_select < 1)
            fail("slices must be positive");
        if (kde_grid < 2)
            fail("kde_grid must be at least 2");
        if (workers < 1)
            fail("workers must be positive");
    }

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Output-affecting fields only; `workers` is deliberately absent.
inline nlohmann::ordered_json config_to_json(const PipelineConfig& c)
{
    nlohmann::ordered_json j;
    j["filter"] = to_string(c.filter_mode);
    j["kernel_radius"] = c.kernel_radius;
    j["threshold"] = c.threshold;
    nlohmann::ordered_json overrides = nlohmann::ordered_json::object();
    for (const auto& [src, t] : c.threshold_overrides)
        overrides[std::to_string(src)] = t;
    j["threshold_overrides"] = overrides;
    j["out_size"] = c.out_size;
    j["slices"] = c.n_select;
    j["kde_grid"] = c.kde_grid;
    j["sampler"] = to_string(c.sampler_mode);
    j["layout"] = to_string(c.layout);
    return j;
}

/// Apply the keys present in `j` on top of `base`. Unknown keys are rejected.
template <typename Json>
PipelineConfig config_from_json(const Json& j, PipelineConfig base = {})
{
    if (!j.is_object())
        throw Error(ErrorCode::invalid_argument, "config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "filter")
                base.filter_mode = parse_filter_mode(value.template get<std::string>());
            else if (key == "kernel_radius")
                base.kernel_radius = value.template get<int>();
            else if (key == "threshold")
                base.threshold = value.template get<double>();
            else if (key == "threshold_overrides") {
                base.threshold_overrides.clear();
                for (const auto& [src, t] : value.items())
                    base.threshold_overrides[std::stoi(src)] = t.template get<double>();
            } else if (key == "out_size")
                base.out_size = value.template get<int>();
            else if (key == "slices")
                base.n_select = value.template get<int>();
            else if (key == "kde_grid")
                base.kde_grid = value.template get<int>();
            else if (key == "sampler")
                base.sampler_mode = parse_sampler_mode(value.template get<std::string>());
            else if (key == "layout")
                base.layout = parse_layout(value.template get<std::string>());
            else if (key == "workers")
                base.workers = value.template get<int>();
            else
                throw Error(ErrorCode::invalid_argument, "unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("bad config value: ") + e.what());
    } catch (const std::logic_error& e) { // std::stoi
        throw Error(ErrorCode::invalid_argument, std::string("bad config value: ") + e.what());
    }
    return base;
}

inline PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {})
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::io_error, "cannot open config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::invalid_argument, path.string() + ": " + e.what());
    }
    return config_from_json(j, std::move(base));
}

} // namespace kds

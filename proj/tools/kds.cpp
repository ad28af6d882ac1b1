// kds: lung-region preprocessing and kernel-density slice sampling for CT scan stacks.
//
//   kds run        --input <dir> --output <dir> [options]
//   kds stats      --input <dir> [--layout tree|flat]
//   kds inspect    --scan <dir> [options]
//   kds redundancy --total <slices> --scans <n> [--slices 8]
//
// Exit codes: 0 success, 1 partial (some scans excluded), 2 fatal.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kds/kds.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitFatal = 2;

struct Overrides {
    std::string config_file;
    std::optional<double> threshold;
    std::optional<std::string> filter;
    std::optional<std::string> sampler;
    std::optional<int> slices;
    std::optional<std::string> layout;
    std::optional<int> workers;
};

void add_pipeline_options(CLI::App* cmd, Overrides& o, bool with_layout)
{
    cmd->add_option("--config", o.config_file, "JSON config file (flags override its values)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--threshold", o.threshold, "Binarization threshold on the 8-bit scale");
    cmd->add_option("--filter", o.filter, "Noise filter")->check(CLI::IsMember({"min", "mean"}));
    cmd->add_option("--sampler", o.sampler, "KDE sample axis")->check(CLI::IsMember({"area", "index"}));
    cmd->add_option("--slices", o.slices, "Slices selected per scan")->check(CLI::PositiveNumber);
    if (with_layout) {
        cmd->add_option("--layout", o.layout, "Input directory layout")->check(CLI::IsMember({"tree", "flat"}));
        cmd->add_option("--workers", o.workers, "Parallel scan workers")->check(CLI::PositiveNumber);
    }
}

kds::PipelineConfig resolve_config(const Overrides& o)
{
    kds::PipelineConfig cfg;
    if (!o.config_file.empty())
        cfg = kds::load_config(o.config_file);
    if (o.threshold)
        cfg.threshold = *o.threshold;
    if (o.filter)
        cfg.filter_mode = kds::parse_filter_mode(*o.filter);
    if (o.sampler)
        cfg.sampler_mode = kds::parse_sampler_mode(*o.sampler);
    if (o.slices)
        cfg.n_select = *o.slices;
    if (o.layout)
        cfg.layout = kds::parse_layout(*o.layout);
    if (o.workers)
        cfg.workers = *o.workers;
    cfg.validate();
    return cfg;
}

int cmd_run(const std::filesystem::path& input, const std::filesystem::path& output, const Overrides& o)
{
    const auto cfg = resolve_config(o);
    const auto run = kds::run_pipeline(input, cfg, output);
    const auto& m = run.manifest;
    std::cout << "accepted scans: " << m.scans.size() << "\n";
    std::cout << "excluded scans: " << m.excluded.size() << "\n";
    for (const auto& e : m.excluded) {
        std::cout << "  " << e.scan_id << ":";
        for (auto r : e.reasons)
            std::cout << ' ' << kds::to_string(r);
        std::cout << "\n";
    }
    std::cout << "slices in: " << run.total_slices << ", slices out: " << run.selected_slices << "\n";
    if (run.total_slices > 0)
        std::cout << kds::format_redundancy(run.total_slices, run.selected_slices) << "\n";
    std::cout << "manifest: " << (output / "manifest.json").string() << "\n";
    return m.excluded.empty() ? kExitOk : kExitPartial;
}

int cmd_stats(const std::filesystem::path& input, const std::optional<std::string>& layout)
{
    const auto lay = layout ? kds::parse_layout(*layout) : kds::Layout::labeled_tree;
    const auto stats = kds::compute_stats(input, lay);
    std::cout << kds::format_stats(stats);
    return kExitOk;
}

int cmd_inspect(const std::filesystem::path& scan_dir, const Overrides& o)
{
    const auto cfg = resolve_config(o);
    auto id = scan_dir.filename().string();
    if (id.empty())
        id = scan_dir.parent_path().filename().string();
    const auto scan = kds::load_scan(scan_dir, id);
    const auto qc = kds::check_consistency(scan);

    std::cout << "scan: " << scan.scan_id << "\n";
    std::cout << "slices: " << scan.size() << "\n";
    for (const auto& f : scan.unreadable_files)
        std::cout << "unreadable: " << f << "\n";
    std::cout << "qc: " << (qc.accepted ? "accepted" : "rejected");
    for (auto r : qc.reasons)
        std::cout << ' ' << kds::to_string(r);
    std::cout << "\n";
    if (!qc.accepted)
        return kExitPartial;

    const auto result = kds::analyze_scan(scan, cfg);
    const auto& m = result.manifest;
    std::cout << "crop: rows " << m.crop.row_min << ".." << m.crop.row_max << ", cols " << m.crop.col_min << ".."
              << m.crop.col_max << (m.full_frame ? " (full frame, empty mask)" : "") << "\n";
    std::printf("bandwidth: %.9g%s\n", m.bandwidth, m.degenerate_bandwidth ? " (degenerate fallback)" : "");
    std::cout << "areas:";
    for (auto a : m.areas)
        std::cout << ' ' << a;
    std::cout << "\nselected:\n";
    for (const auto& s : m.selected)
        std::printf("  slice %d (%s) p=%.4f area=%lld\n", s.index, scan.slice_files[s.index].c_str(), s.quantile,
                    m.areas[s.index]);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Kernel-density slice sampling for chest CT scan stacks"};
    app.require_subcommand(1);

    std::filesystem::path input;
    std::filesystem::path output;
    std::filesystem::path scan_dir;
    Overrides run_opts;
    Overrides inspect_opts;
    std::optional<std::string> stats_layout;

    auto* run = app.add_subcommand("run", "Preprocess a dataset and write the manifest");
    run->add_option("--input", input, "Dataset root")->required()->check(CLI::ExistingDirectory);
    run->add_option("--output", output, "Output directory")->required();
    add_pipeline_options(run, run_opts, true);

    auto* stats = app.add_subcommand("stats", "Print scan and slice counts per source and label");
    stats->add_option("--input", input, "Dataset root")->required()->check(CLI::ExistingDirectory);
    stats->add_option("--layout", stats_layout, "Input directory layout")->check(CLI::IsMember({"tree", "flat"}));

    auto* inspect = app.add_subcommand("inspect", "Show QC, lung areas and the selection for one scan");
    inspect->add_option("--scan", scan_dir, "Scan directory")->required()->check(CLI::ExistingDirectory);
    add_pipeline_options(inspect, inspect_opts, false);

    long long total_slices = 0;
    long long n_scans = 0;
    int per_scan = kds::kDefaultSliceCount;
    auto* redundancy = app.add_subcommand("redundancy", "Redundancy reduction for a dataset of given size");
    redundancy->add_option("--total", total_slices, "Total slices in the dataset")->required()->check(CLI::PositiveNumber);
    redundancy->add_option("--scans", n_scans, "Number of scans")->required()->check(CLI::PositiveNumber);
    redundancy->add_option("--slices", per_scan, "Slices kept per scan")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitFatal;
    }

    try {
        if (*run)
            return cmd_run(input, output, run_opts);
        if (*stats)
            return cmd_stats(input, stats_layout);
        if (*inspect)
            return cmd_inspect(scan_dir, inspect_opts);
        if (*redundancy) {
            std::cout << kds::format_redundancy(total_slices, n_scans * per_scan) << "\n";
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "kds: " << e.what() << "\n";
        return kExitFatal;
    }
    return kExitFatal;
}

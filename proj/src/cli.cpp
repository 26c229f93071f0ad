#include "cbev/cli.hpp"

#include "cbev/dataset.hpp"
#include "cbev/error.hpp"
#include "cbev/geometry.hpp"
#include "cbev/image_io.hpp"
#include "cbev/metrics.hpp"
#include "cbev/parallel.hpp"
#include "cbev/relight.hpp"
#include "cbev/stitch.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

namespace cbev::cli {

namespace {

/// Geometry flags shared by every command that projects panoramas.
struct GeometryFlags {
    std::string profile = "cvusa";
    std::optional<double> lambda;
    std::optional<double> height;
    std::optional<int> size;
    std::optional<int> pano_width;
    std::optional<int> pano_height;
    std::optional<double> d_max;
    bool no_v_flip = false;

    std::vector<CLI::Option*> options;

    void add(CLI::App& app)
    {
        options.push_back(app.add_option("--profile", profile, "Dataset profile: cvusa, cvact or vigor")
                              ->check(CLI::IsMember({"cvusa", "cvact", "vigor"})));
        options.push_back(app.add_option("--lambda", lambda, "Surface curvature scale (overrides profile)")
                              ->check(CLI::NonNegativeNumber));
        options.push_back(
            app.add_option("--height", height, "Camera height (overrides profile)")->check(CLI::PositiveNumber));
        options.push_back(app.add_option("--size", size, "BEV canvas side in pixels")->check(CLI::PositiveNumber));
        options.push_back(app.add_option("--pano-width", pano_width, "Panorama width")->check(CLI::PositiveNumber));
        options.push_back(
            app.add_option("--pano-height", pano_height, "Panorama height")->check(CLI::PositiveNumber));
        options.push_back(app.add_option("--d-max", d_max, "Normalization radius in pixels (default: half diagonal)")
                              ->check(CLI::PositiveNumber));
        options.push_back(app.add_flag("--no-v-flip", no_v_flip, "Keep the nadir at row 0"));
    }

    bool explicit_pano_dims() const { return pano_width.has_value() || pano_height.has_value(); }

    BevConfig config() const
    {
        BevConfig cfg = profile_config(parse_profile(profile));
        if (lambda)
            cfg.lambda = *lambda;
        if (height)
            cfg.camera_height = *height;
        if (size)
            cfg.grid_size = *size;
        if (pano_width)
            cfg.pano_width = *pano_width;
        if (pano_height)
            cfg.pano_height = *pano_height;
        cfg.d_max = d_max;
        cfg.v_flip = !no_v_flip;
        cfg.validate();
        return cfg;
    }
};

void warn_config(const BevConfig& cfg, std::ostream& err)
{
    for (const auto& w : cfg.warnings())
        err << "warning: " << w << '\n';
}

struct BevCommand {
    std::string input;
    std::string output;
    std::string table_path;
    bool nearest = false;
    GeometryFlags geo;

    int run(std::ostream& out, std::ostream& err) const
    {
        const Image pano = read_image(input);
        RemapTable table;
        if (!table_path.empty()) {
            table = read_remap_table(table_path);
        } else {
            BevConfig cfg = geo.config();
            if (!geo.explicit_pano_dims()) {
                cfg.pano_width = pano.width();
                cfg.pano_height = pano.height();
            }
            warn_config(cfg, err);
            table = build_remap_table(cfg);
        }
        const Image bev = apply_remap(pano, table, nearest ? Interpolation::nearest : Interpolation::bilinear);
        write_png(output, bev);
        out << "wrote " << output << " (" << bev.width() << "x" << bev.height() << ")\n";
        return ok;
    }
};

struct StitchCommand {
    std::string manifest_path;
    std::string group;
    std::string output;
    std::string coverage_path;
    std::optional<double> auto_mask;
    std::vector<int> fill{128, 128, 128};
    GeometryFlags geo;

    int run(std::ostream& out, std::ostream& err) const
    {
        const Manifest manifest = load_manifest(manifest_path);
        const auto scenes = group_by_satellite(manifest.entries);
        const auto it = std::find_if(scenes.begin(), scenes.end(),
                                     [&](const SceneDescriptor& s) { return s.group_id == group; });
        if (it == scenes.end())
            throw InputError("group \"" + group + "\" not found in " + manifest_path);

        const BevConfig cfg = geo.config();
        warn_config(cfg, err);
        ExportOptions opts;
        opts.auto_mask_margin = auto_mask;
        opts.fill_color = {static_cast<double>(fill[0]), static_cast<double>(fill[1]), static_cast<double>(fill[2])};
        const StitchResult result = render_scene(manifest, *it, build_remap_table(cfg), opts);
        if (result.coverage.count() == 0)
            err << "warning: no camera covers any pixel of group " << group << "; output is fill colour only\n";
        write_png(output, result.image);
        if (!coverage_path.empty())
            write_mask(coverage_path, result.coverage);
        out << "wrote " << output << " (" << it->members.size() << " cameras, " << result.coverage.count() << " of "
            << static_cast<std::size_t>(cfg.grid_size) * cfg.grid_size << " pixels covered)\n";
        return ok;
    }
};

struct RelightCommand {
    std::string input;
    std::string reference;
    std::string params_path;
    std::string canonical_path;
    std::string output;
    FitOptions fit;

    int run(std::ostream& out, std::ostream&) const
    {
        const Image i0 = read_image(input);
        const Image ref = read_image(reference);
        const DncmParams params = params_path.empty() ? DncmParams::identity() : load_dncm_params(params_path);
        const ColorStats canonical =
            canonical_path.empty() ? compute_stats(i0, fit.thumb) : load_color_stats(canonical_path);
        write_png(output, relight(i0, ref, canonical, params, fit));
        out << "wrote " << output << '\n';
        return ok;
    }
};

struct StatsCommand {
    std::string manifest_path;
    std::string split = "train";
    std::string output;
    int thumb = 64;

    int run(std::ostream& out, std::ostream&) const
    {
        const Manifest manifest = load_manifest(manifest_path);
        std::vector<Image> images;
        for (const auto& e : manifest.entries)
            if (e.split == split)
                images.push_back(read_image(manifest.resolve(e.sat_path)));
        if (images.empty())
            throw InputError("no \"" + split + "\" entries in " + manifest_path);
        save_color_stats(output, pooled_stats(images, thumb));
        out << "wrote " << output << " from " << images.size() << " satellite images\n";
        return ok;
    }
};

struct EvalCommand {
    std::string manifest_path;
    std::string generated;
    std::string report_path;
    std::optional<double> psnr_cap;

    int run(std::ostream& out, std::ostream& err, int threads) const
    {
        const Manifest manifest = load_manifest(manifest_path);
        const EvalReport report =
            evaluate_pairs(manifest.entries, manifest.base_dir, generated, {psnr_cap, threads});
        std::ofstream file(report_path, std::ios::trunc);
        if (!file)
            throw IoError("cannot write " + report_path);
        file << report.to_json().dump(2) << '\n';
        out << "evaluated " << report.pairs.size() << " pairs: mean SSIM " << report.mean_ssim << ", mean PSNR "
            << report.mean_psnr << " dB\n";
        for (const auto& id : report.skipped)
            err << "skipped " << id << ": missing or unreadable image\n";
        return report.skipped.empty() ? ok : runtime_error;
    }
};

struct LutCommand {
    std::string output;
    GeometryFlags geo;

    int run(std::ostream& out, std::ostream& err) const
    {
        const BevConfig cfg = geo.config();
        warn_config(cfg, err);
        write_remap_table(output, build_remap_table(cfg));
        out << "wrote " << output << '\n';
        return ok;
    }
};

struct ExportCommand {
    std::string manifest_path;
    std::string out_dir;
    bool multi = false;
    std::optional<double> auto_mask;
    std::string caption = default_caption;
    GeometryFlags geo;

    int run(std::ostream& out, std::ostream& err, int threads) const
    {
        const Manifest manifest = load_manifest(manifest_path);
        const BevConfig cfg = geo.config();
        warn_config(cfg, err);
        ExportOptions opts;
        opts.multi = multi;
        opts.threads = threads;
        opts.auto_mask_margin = auto_mask;
        opts.caption = caption;
        const ExportSummary summary = export_conditioning_set(manifest, cfg, out_dir, opts);
        out << "exported " << summary.written.size() << " samples to " << out_dir << '\n';
        if (!summary.skipped.empty()) {
            err << summary.skipped.size() << " samples skipped\n";
            return runtime_error;
        }
        return ok;
    }
};

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Curved bird's-eye-view projection, stitching, relighting and evaluation toolkit", "cbev"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads for batch commands (default: CBEV_THREADS or all cores)")
        ->check(CLI::PositiveNumber);

    BevCommand bev;
    auto* bev_cmd = app.add_subcommand("bev", "Project one panorama onto the BEV canvas");
    bev_cmd->add_option("-i,--input", bev.input, "Equirectangular panorama (PNG/JPEG)")->required();
    bev_cmd->add_option("-o,--output", bev.output, "Output PNG")->required();
    auto* table_opt = bev_cmd->add_option("--table", bev.table_path, "Precomputed remap table (from `lut`)");
    bev_cmd->add_flag("--nearest", bev.nearest, "Nearest-neighbour sampling");
    bev.geo.add(*bev_cmd);
    for (auto* o : bev.geo.options)
        table_opt->excludes(o);

    StitchCommand stitch;
    auto* stitch_cmd = app.add_subcommand("stitch", "Composite every panorama of one satellite group");
    stitch_cmd->add_option("-m,--manifest", stitch.manifest_path, "JSONL manifest")->required();
    stitch_cmd->add_option("-g,--group", stitch.group, "group_id to stitch")->required();
    stitch_cmd->add_option("-o,--output", stitch.output, "Output PNG")->required();
    stitch_cmd->add_option("--coverage", stitch.coverage_path, "Also write the coverage mask PNG");
    stitch_cmd->add_option("--auto-mask", stitch.auto_mask,
                           "Elevation margin (rad) for the geometric mask on cameras without a mask file");
    stitch_cmd->add_option("--fill", stitch.fill, "Fill colour R G B")->expected(3)->check(CLI::Range(0, 255));
    stitch.geo.add(*stitch_cmd);

    RelightCommand relight_args;
    auto* relight_cmd = app.add_subcommand("relight", "Normalize an image and transfer a reference's lighting");
    relight_cmd->add_option("-i,--input", relight_args.input, "Image to relight")->required();
    relight_cmd->add_option("-r,--reference", relight_args.reference, "Lighting reference image")->required();
    relight_cmd->add_option("-p,--params", relight_args.params_path, "DNCM parameter JSON (default: identity, k=32)");
    relight_cmd->add_option("-c,--canonical", relight_args.canonical_path,
                            "Canonical colour statistics JSON (from `stats`)");
    relight_cmd->add_option("-o,--output", relight_args.output, "Output PNG")->required();
    relight_cmd->add_option("--ridge", relight_args.fit.ridge, "Ridge weight")->check(CLI::PositiveNumber);
    relight_cmd->add_option("--thumb", relight_args.fit.thumb, "Fitting thumbnail side")->check(CLI::PositiveNumber);

    StatsCommand stats;
    auto* stats_cmd = app.add_subcommand("stats", "Pooled colour statistics of a split's satellite images");
    stats_cmd->add_option("-m,--manifest", stats.manifest_path, "JSONL manifest")->required();
    stats_cmd->add_option("--split", stats.split, "Split to pool")->check(CLI::IsMember({"train", "test"}));
    stats_cmd->add_option("-o,--output", stats.output, "Output JSON")->required();
    stats_cmd->add_option("--thumb", stats.thumb, "Thumbnail side")->check(CLI::PositiveNumber);

    EvalCommand eval;
    auto* eval_cmd = app.add_subcommand("eval", "SSIM / PSNR / MSE of generated images against ground truth");
    eval_cmd->add_option("-m,--manifest", eval.manifest_path, "JSONL manifest")->required();
    eval_cmd->add_option("-g,--generated", eval.generated, "Directory with <id>.png")->required();
    eval_cmd->add_option("-o,--report", eval.report_path, "Report JSON")->required();
    eval_cmd->add_option("--psnr-cap", eval.psnr_cap, "Report PSNR values above this cap as the cap");

    LutCommand lut;
    auto* lut_cmd = app.add_subcommand("lut", "Write the remap table for a configuration");
    lut_cmd->add_option("-o,--output", lut.output, "Output .bin")->required();
    lut.geo.add(*lut_cmd);

    ExportCommand exp;
    auto* export_cmd = app.add_subcommand("export", "Write a conditioning dataset (conditions, targets, index)");
    export_cmd->add_option("-m,--manifest", exp.manifest_path, "JSONL manifest")->required();
    export_cmd->add_option("-o,--out-dir", exp.out_dir, "Output directory")->required();
    auto* multi_flag = export_cmd->add_flag("--multi", exp.multi, "One stitched sample per satellite group");
    export_cmd->add_option("--auto-mask", exp.auto_mask, "Elevation margin (rad) for the geometric mask")
        ->needs(multi_flag);
    export_cmd->add_option("--caption", exp.caption, "Caption written to index.jsonl");
    exp.geo.add(*export_cmd);

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return usage_error;
    }

    const int workers = resolve_threads(threads);
    try {
        if (*bev_cmd)
            return bev.run(out, err);
        if (*stitch_cmd)
            return stitch.run(out, err);
        if (*relight_cmd)
            return relight_args.run(out, err);
        if (*stats_cmd)
            return stats.run(out, err);
        if (*eval_cmd)
            return eval.run(out, err, workers);
        if (*lut_cmd)
            return lut.run(out, err);
        if (*export_cmd)
            return exp.run(out, err, workers);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return runtime_error;
    }
    return usage_error;
}

} // namespace cbev::cli

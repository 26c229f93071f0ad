#include "cbev/dataset.hpp"

#include "cbev/error.hpp"
#include "cbev/image_io.hpp"
#include "cbev/parallel.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace cbev {

namespace {

std::string required_string(const nlohmann::json& j, const char* field)
{
    if (!j.contains(field))
        throw InputError(std::string("missing required field \"") + field + "\"");
    if (!j[field].is_string() || j[field].get<std::string>().empty())
        throw InputError(std::string("field \"") + field + "\" must be a non-empty string");
    return j[field].get<std::string>();
}

double optional_number(const nlohmann::json& j, const char* field)
{
    if (!j.contains(field) || j[field].is_null())
        return 0.0;
    if (!j[field].is_number())
        throw InputError(std::string("field \"") + field + "\" must be a number");
    return j[field].get<double>();
}

} // namespace

nlohmann::json ManifestEntry::to_json() const
{
    nlohmann::json j{{"id", id},       {"pano_path", pano_path}, {"sat_path", sat_path}, {"dx", dx},
                     {"dy", dy},       {"split", split},         {"group_id", group_id}};
    if (mask_path)
        j["mask_path"] = *mask_path;
    return j;
}

ManifestEntry ManifestEntry::from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw InputError("manifest line is not a JSON object");
    ManifestEntry e;
    e.id = required_string(j, "id");
    e.pano_path = required_string(j, "pano_path");
    e.sat_path = required_string(j, "sat_path");
    e.split = required_string(j, "split");
    if (e.split != "train" && e.split != "test")
        throw InputError("field \"split\" must be \"train\" or \"test\", got \"" + e.split + "\"");
    e.dx = optional_number(j, "dx");
    e.dy = optional_number(j, "dy");
    if (j.contains("mask_path") && !j["mask_path"].is_null())
        e.mask_path = required_string(j, "mask_path");
    e.group_id = j.contains("group_id") && !j["group_id"].is_null() ? required_string(j, "group_id") : e.id;
    return e;
}

std::filesystem::path Manifest::resolve(const std::string& path) const
{
    const std::filesystem::path p(path);
    return p.is_absolute() ? p : base_dir / p;
}

DatasetProfile parse_profile(const std::string& name)
{
    if (name == "cvusa")
        return DatasetProfile::cvusa;
    if (name == "cvact")
        return DatasetProfile::cvact;
    if (name == "vigor")
        return DatasetProfile::vigor;
    throw InputError("unknown dataset profile \"" + name + "\" (expected cvusa, cvact or vigor)");
}

std::string profile_name(DatasetProfile profile)
{
    switch (profile) {
    case DatasetProfile::cvusa:
        return "cvusa";
    case DatasetProfile::cvact:
        return "cvact";
    case DatasetProfile::vigor:
        return "vigor";
    }
    return "cvusa";
}

BevConfig profile_config(DatasetProfile profile)
{
    BevConfig cfg;
    cfg.grid_size = 512;
    cfg.pano_width = 1024;
    cfg.pano_height = 512;
    cfg.camera_height = 1.5;
    cfg.lambda = profile == DatasetProfile::vigor ? 10.0 : 3.0;
    return cfg;
}

std::vector<ManifestEntry> parse_manifest(const std::string& text)
{
    std::vector<ManifestEntry> entries;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        try {
            ManifestEntry e = ManifestEntry::from_json(nlohmann::json::parse(line));
            if (!seen.insert(e.id).second)
                throw InputError("duplicate id \"" + e.id + "\"");
            entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw InputError("manifest line " + std::to_string(line_no) + ": malformed JSON: " + ex.what());
        } catch (const InputError& ex) {
            throw InputError("manifest line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return entries;
}

Manifest load_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open manifest " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return {path.parent_path(), parse_manifest(buffer.str())};
}

std::string serialize_manifest(std::span<const ManifestEntry> entries)
{
    std::string out;
    for (const auto& e : entries) {
        out += e.to_json().dump();
        out += '\n';
    }
    return out;
}

std::vector<SceneDescriptor> group_by_satellite(std::span<const ManifestEntry> entries)
{
    std::vector<SceneDescriptor> scenes;
    std::map<std::string, std::size_t> by_group;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const ManifestEntry& e = entries[i];
        auto [it, inserted] = by_group.try_emplace(e.group_id, scenes.size());
        if (inserted)
            scenes.push_back({e.group_id, e.sat_path, {}, {}});
        SceneDescriptor& scene = scenes[it->second];
        if (scene.sat_path != e.sat_path)
            throw InputError("group \"" + e.group_id + "\" mixes satellite images \"" + scene.sat_path +
                             "\" and \"" + e.sat_path + "\"");
        scene.placements.push_back({static_cast<int>(scene.members.size()), e.dx, e.dy});
        scene.members.push_back(i);
    }
    return scenes;
}

StitchResult render_scene(const Manifest& manifest, const SceneDescriptor& scene, const RemapTable& table,
                          const ExportOptions& opts)
{
    const BevConfig& cfg = table.config();
    StitchScene stitch;
    stitch.sat_size = cfg.grid_size;
    stitch.fill_color = opts.fill_color;
    std::optional<Mask> heuristic;
    for (std::size_t k = 0; k < scene.members.size(); ++k) {
        const ManifestEntry& e = manifest.entries[scene.members[k]];
        StitchCamera cam;
        cam.placement = scene.placements[k];
        cam.bev = apply_remap(read_image(manifest.resolve(e.pano_path)), table);
        if (e.mask_path) {
            cam.mask = read_mask(manifest.resolve(*e.mask_path));
        } else if (opts.auto_mask_margin) {
            if (!heuristic)
                heuristic = heuristic_occlusion_mask(cfg, table, *opts.auto_mask_margin);
            cam.mask = *heuristic;
        } else {
            cam.mask = Mask(cfg.grid_size, cfg.grid_size, true);
        }
        stitch.cameras.push_back(std::move(cam));
    }
    return stitch_multi_to_one(stitch);
}

ExportSummary export_conditioning_set(const Manifest& manifest, const BevConfig& cfg,
                                      const std::filesystem::path& out_dir, const ExportOptions& opts)
{
    const RemapTable table = build_remap_table(cfg);
    std::filesystem::create_directories(out_dir / "conditions");
    std::filesystem::create_directories(out_dir / "targets");

    struct Job {
        std::string id;
        std::string sat_path;
        SceneDescriptor scene;
    };
    std::vector<Job> jobs;
    if (opts.multi) {
        for (auto& scene : group_by_satellite(manifest.entries))
            jobs.push_back({scene.group_id, scene.sat_path, scene});
    } else {
        for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
            const ManifestEntry& e = manifest.entries[i];
            jobs.push_back({e.id, e.sat_path, {e.group_id, e.sat_path, {i}, {{0, 0.0, 0.0}}}});
        }
    }

    std::vector<std::string> errors(jobs.size());
    parallel_for(jobs.size(), opts.threads, [&](std::size_t n) {
        const Job& job = jobs[n];
        try {
            Image condition;
            if (opts.multi) {
                condition = render_scene(manifest, job.scene, table, opts).image;
            } else {
                const ManifestEntry& e = manifest.entries[job.scene.members.front()];
                condition = apply_remap(read_image(manifest.resolve(e.pano_path)), table);
            }
            const Image target = read_image(manifest.resolve(job.sat_path));
            write_png(out_dir / "conditions" / (job.id + ".png"), condition);
            write_png(out_dir / "targets" / (job.id + ".png"), target);
        } catch (const std::exception& ex) {
            errors[n] = ex.what();
            if (errors[n].empty())
                errors[n] = "unknown error";
        }
    });

    ExportSummary summary;
    std::ofstream index(out_dir / "index.jsonl", std::ios::binary | std::ios::trunc);
    if (!index)
        throw IoError("cannot write " + (out_dir / "index.jsonl").string());
    for (std::size_t n = 0; n < jobs.size(); ++n) {
        if (!errors[n].empty()) {
            std::cerr << "skipped " << jobs[n].id << ": " << errors[n] << '\n';
            summary.skipped.push_back(jobs[n].id);
            continue;
        }
        const nlohmann::json row{{"id", jobs[n].id},
                                 {"condition", "conditions/" + jobs[n].id + ".png"},
                                 {"target", "targets/" + jobs[n].id + ".png"},
                                 {"caption", opts.caption}};
        index << row.dump() << '\n';
        summary.written.push_back(jobs[n].id);
    }
    return summary;
}

} // namespace cbev

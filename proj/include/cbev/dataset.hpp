#pragma once

#include "cbev/geometry.hpp"
#include "cbev/stitch.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace cbev {

/// One cross-view sample. Paths are stored as written; relative paths resolve
/// against the manifest's directory.
struct ManifestEntry {
    std::string id;
    std::string pano_path;
    std::string sat_path;
    double dx = 0.0;
    double dy = 0.0;
    std::optional<std::string> mask_path;
    std::string split = "train";
    std::string group_id;

    nlohmann::json to_json() const;
    static ManifestEntry from_json(const nlohmann::json& j);

    bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
    std::filesystem::path base_dir;
    std::vector<ManifestEntry> entries;

    std::filesystem::path resolve(const std::string& path) const;
};

enum class DatasetProfile { cvusa, cvact, vigor };

DatasetProfile parse_profile(const std::string& name);
std::string profile_name(DatasetProfile profile);

/// Projection defaults per dataset: 512 x 1024 panoramas, 512 x 512 canvas,
/// H = 1.5, lambda = 3 (CVUSA, CVACT) or 10 (VIGOR).
BevConfig profile_config(DatasetProfile profile);

/// Parses JSONL text. Errors carry the 1-based line number and, for missing
/// fields, the field name. Duplicate ids are rejected.
std::vector<ManifestEntry> parse_manifest(const std::string& text);
Manifest load_manifest(const std::filesystem::path& path);
std::string serialize_manifest(std::span<const ManifestEntry> entries);

/// Entries sharing a satellite tile.
struct SceneDescriptor {
    std::string group_id;
    std::string sat_path;
    std::vector<std::size_t> members; // indices into the entry list, manifest order
    std::vector<CameraPlacement> placements; // placement.index = position in members
};

/// Groups in order of first appearance. Conflicting sat_path within a group
/// throws InputError.
std::vector<SceneDescriptor> group_by_satellite(std::span<const ManifestEntry> entries);

inline constexpr const char* default_caption = "satellite image, top-down aerial view";

struct ExportOptions {
    bool multi = false;
    int threads = 1;
    /// When set, cameras without a mask file get the elevation heuristic with
    /// this margin; otherwise they keep every pixel.
    std::optional<double> auto_mask_margin;
    Rgb fill_color{128.0, 128.0, 128.0};
    std::string caption = default_caption;
};

struct ExportSummary {
    std::vector<std::string> written;
    std::vector<std::string> skipped;
};

/// Loads a scene's panoramas and masks and produces its stitched BEV.
StitchResult render_scene(const Manifest& manifest, const SceneDescriptor& scene, const RemapTable& table,
                          const ExportOptions& opts);

/// Writes out_dir/conditions/<id>.png, out_dir/targets/<id>.png and
/// out_dir/index.jsonl. With multi, ids are group ids and conditions are
/// stitched canvases.
ExportSummary export_conditioning_set(const Manifest& manifest, const BevConfig& cfg,
                                      const std::filesystem::path& out_dir, const ExportOptions& opts = {});

} // namespace cbev

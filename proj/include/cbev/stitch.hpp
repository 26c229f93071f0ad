#pragma once

#include "cbev/geometry.hpp"
#include "cbev/image.hpp"

#include <span>
#include <vector>

namespace cbev {

/// Capture point of one panorama relative to the satellite tile centre, in
/// satellite pixels (x = column axis rightward, y = row axis downward).
struct CameraPlacement {
    int index = 0;
    double dx = 0.0;
    double dy = 0.0;

    double x_cam(int sat_size) const { return sat_size / 2.0 + dx; }
    double y_cam(int sat_size) const { return sat_size / 2.0 + dy; }
};

struct StitchCamera {
    CameraPlacement placement;
    Image bev;
    Mask mask;
};

struct StitchScene {
    int sat_size = 512;
    std::vector<StitchCamera> cameras;
    Rgb fill_color{128.0, 128.0, 128.0};
};

struct StitchResult {
    Image image;
    Mask coverage;
    /// Winning camera index per pixel, -1 where uncovered.
    std::vector<int> owner;
};

/// Nearest capture point by Euclidean distance; ties go to the lowest camera
/// index. Throws InputError on an empty list.
int assign_nearest_camera(double x, double y, std::span<const CameraPlacement> placements, int sat_size);

/// Composites per-camera BEV images into one sat_size x sat_size canvas. Each
/// pixel takes its nearest camera whose source position is inside that camera's
/// canvas and unmasked, falling back to the next nearest, then to fill_color.
StitchResult stitch_multi_to_one(const StitchScene& scene);

/// Discards canvas pixels whose source elevation is above -elevation_margin,
/// i.e. content at or above camera height.
Mask heuristic_occlusion_mask(const BevConfig& cfg, const RemapTable& table, double elevation_margin);

/// Warnings for cameras whose capture point falls outside the tile.
std::vector<std::string> placement_warnings(const StitchScene& scene);

} // namespace cbev

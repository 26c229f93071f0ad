#pragma once

#include "cbev/image.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cbev {

/// Constants of the curved ground-surface projection from an equirectangular
/// panorama onto a square top-down canvas.
struct BevConfig {
    int grid_size = 512;        // canvas side l (pixels)
    double lambda = 3.0;        // curvature scale of the surface
    double camera_height = 1.5; // H, same unit as the surface height
    int pano_width = 1024;
    int pano_height = 512;
    /// Normalization radius. Unset means the canvas half-diagonal (l/2)*sqrt(2).
    std::optional<double> d_max;
    /// Store row 0 as the zenith (sky at top), i.e. v' = h - v.
    bool v_flip = true;

    double effective_d_max() const;

    /// Throws InputError on non-positive sizes, negative lambda or non-positive
    /// height / radius.
    void validate() const;

    /// Human-readable warnings for accepted but unusual configurations
    /// (w != 2h).
    std::vector<std::string> warnings() const;

    bool operator==(const BevConfig&) const = default;
};

struct BevIndex {
    int i = 0; // row
    int j = 0; // column
};

struct WorldPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct SphericalDir {
    double theta = 0.0; // azimuth, atan2(y, x)
    double phi = 0.0;   // elevation relative to the camera
    bool degenerate = false;
};

struct PanoCoord {
    double u = 0.0;
    double v = 0.0;
};

WorldPoint bev_index_to_world(BevIndex idx, const BevConfig& cfg);

/// x = y = 0 yields theta = 0, phi = -pi/2 with the degenerate flag set.
SphericalDir world_to_spherical(const WorldPoint& p, const BevConfig& cfg);

PanoCoord world_to_pano(const WorldPoint& p, const BevConfig& cfg);

/// Precomputed bilinear footprint of a panorama coordinate. Offsets are element
/// offsets into an interleaved RGB buffer of the table's panorama size.
struct BilinearTap {
    std::int32_t base = 0;     // top-left sample
    std::int32_t right = 0;    // offset from a left sample to its right neighbour (wraps)
    std::int32_t down = 0;     // offset from the top row to the bottom row (0 at the clamp)
    float fx = 0.0f;
    float fy = 0.0f;
};

BilinearTap make_tap(const PanoCoord& coord, int pano_width, int pano_height);

/// Per-output-pixel panorama coordinates for one BevConfig, row-major.
class RemapTable {
public:
    RemapTable() = default;
    RemapTable(BevConfig cfg, std::vector<PanoCoord> coords, std::vector<std::uint8_t> in_range);

    const BevConfig& config() const { return cfg_; }
    int size() const { return cfg_.grid_size; }
    const PanoCoord& at(int i, int j) const { return coords_[index(i, j)]; }
    bool in_range(int i, int j) const { return in_range_[index(i, j)] != 0; }
    const std::vector<PanoCoord>& coords() const { return coords_; }
    const std::vector<BilinearTap>& taps() const { return taps_; }

    bool operator==(const RemapTable& other) const
    {
        return cfg_ == other.cfg_ && in_range_ == other.in_range_ && same_coords(other);
    }

private:
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * cfg_.grid_size + j; }
    bool same_coords(const RemapTable& other) const;

    BevConfig cfg_;
    std::vector<PanoCoord> coords_;
    std::vector<std::uint8_t> in_range_;
    std::vector<BilinearTap> taps_;
};

RemapTable build_remap_table(const BevConfig& cfg);

enum class Interpolation { bilinear, nearest };

/// Samples with circular horizontal wrap and vertical clamping. Values are in
/// the image's own scale.
Rgb sample_bilinear(const Image& pano, const PanoCoord& coord);
Rgb sample_nearest(const Image& pano, const PanoCoord& coord);

/// Resamples a panorama onto the l x l canvas. Output has the panorama's pixel
/// format.
Image apply_remap(const Image& pano, const RemapTable& table,
                  Interpolation interp = Interpolation::bilinear);

/// Binary table format: "CBEV1", u32 l, u32 w, u32 h, f64 lambda, f64 H,
/// f64 d_max, u8 v_flip, then l*l (f32 u, f32 v) pairs, all little-endian.
void write_remap_table(const std::filesystem::path& path, const RemapTable& table);
RemapTable read_remap_table(const std::filesystem::path& path);

} // namespace cbev

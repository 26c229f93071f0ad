#include "cbev/stitch.hpp"

#include "cbev/error.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace cbev {

namespace {

double squared_distance(double x, double y, const CameraPlacement& cam, int sat_size)
{
    const double ex = x - cam.x_cam(sat_size);
    const double ey = y - cam.y_cam(sat_size);
    return ex * ex + ey * ey;
}

bool closer(double d_a, int id_a, double d_b, int id_b)
{
    return d_a < d_b || (d_a == d_b && id_a < id_b);
}

struct Footprint {
    int x0, y0, x1, y1;
    float fx, fy;
};

// Non-wrapping bilinear footprint on an l x l canvas; nullopt when the source
// position leaves [0, l-1].
std::optional<Footprint> footprint(double sx, double sy, int l)
{
    const double max = l - 1;
    if (!(sx >= 0.0 && sx <= max && sy >= 0.0 && sy <= max))
        return std::nullopt;
    Footprint f{};
    const double fx0 = std::floor(sx);
    const double fy0 = std::floor(sy);
    f.x0 = static_cast<int>(fx0);
    f.y0 = static_cast<int>(fy0);
    f.fx = static_cast<float>(sx - fx0);
    f.fy = static_cast<float>(sy - fy0);
    f.x1 = std::min(f.x0 + 1, l - 1);
    f.y1 = std::min(f.y0 + 1, l - 1);
    return f;
}

bool footprint_kept(const Footprint& f, const Mask& mask)
{
    if (!mask.at(f.x0, f.y0))
        return false;
    if (f.fx != 0.0f && !mask.at(f.x1, f.y0))
        return false;
    if (f.fy != 0.0f && !mask.at(f.x0, f.y1))
        return false;
    if (f.fx != 0.0f && f.fy != 0.0f && !mask.at(f.x1, f.y1))
        return false;
    return true;
}

double sample(const Image& img, const Footprint& f, int c)
{
    const float a = static_cast<float>(img.get(f.x0, f.y0, c));
    const float b = static_cast<float>(img.get(f.x1, f.y0, c));
    const float cc = static_cast<float>(img.get(f.x0, f.y1, c));
    const float d = static_cast<float>(img.get(f.x1, f.y1, c));
    const float top = a + f.fx * (b - a);
    const float bottom = cc + f.fx * (d - cc);
    return top + f.fy * (bottom - top);
}

void validate(const StitchScene& scene)
{
    if (scene.sat_size <= 0)
        throw InputError("sat_size must be positive");
    if (scene.cameras.empty())
        throw InputError("stitch scene needs at least one camera");
    const Image& first = scene.cameras.front().bev;
    for (const auto& cam : scene.cameras) {
        if (cam.bev.width() != cam.bev.height())
            throw InputError("camera " + std::to_string(cam.placement.index) + " BEV image is not square");
        if (cam.bev.width() != first.width() || cam.bev.format() != first.format())
            throw InputError("camera BEV images differ in size or format");
        if (cam.mask.width() != cam.bev.width() || cam.mask.height() != cam.bev.height())
            throw InputError("camera " + std::to_string(cam.placement.index) + " mask is " +
                             std::to_string(cam.mask.width()) + "x" + std::to_string(cam.mask.height()) +
                             ", BEV is " + std::to_string(cam.bev.width()) + "x" +
                             std::to_string(cam.bev.height()));
    }
}

} // namespace

int assign_nearest_camera(double x, double y, std::span<const CameraPlacement> placements, int sat_size)
{
    if (placements.empty())
        throw InputError("no camera placements");
    const CameraPlacement* best = &placements.front();
    double best_d = squared_distance(x, y, *best, sat_size);
    for (const auto& cam : placements.subspan(1)) {
        const double d = squared_distance(x, y, cam, sat_size);
        if (closer(d, cam.index, best_d, best->index)) {
            best = &cam;
            best_d = d;
        }
    }
    return best->index;
}

StitchResult stitch_multi_to_one(const StitchScene& scene)
{
    validate(scene);
    const int n = scene.sat_size;
    const int l = scene.cameras.front().bev.width();
    // Camera canvases are centred on the capture point; this aligns the
    // centres when the tile and canvas sizes differ.
    const double shift = l / 2.0 - n / 2.0;
    const PixelFormat format = scene.cameras.front().bev.format();

    StitchResult result{Image::filled(n, n, scene.fill_color, format), Mask(n, n, false),
                        std::vector<int>(static_cast<std::size_t>(n) * n, -1)};

    const std::size_t cams = scene.cameras.size();
    std::vector<std::size_t> order(cams);
    std::vector<double> dist(cams);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            for (std::size_t k = 0; k < cams; ++k) {
                order[k] = k;
                dist[k] = squared_distance(x, y, scene.cameras[k].placement, n);
            }
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return closer(dist[a], scene.cameras[a].placement.index, dist[b],
                              scene.cameras[b].placement.index);
            });
            for (const std::size_t k : order) {
                const StitchCamera& cam = scene.cameras[k];
                const auto f = footprint(x - cam.placement.dx + shift, y - cam.placement.dy + shift, l);
                if (!f || !footprint_kept(*f, cam.mask))
                    continue;
                for (int c = 0; c < 3; ++c)
                    result.image.set(x, y, c, sample(cam.bev, *f, c));
                result.coverage.set(x, y, true);
                result.owner[static_cast<std::size_t>(y) * n + x] = cam.placement.index;
                break;
            }
        }
    }
    return result;
}

Mask heuristic_occlusion_mask(const BevConfig& cfg, const RemapTable& table, double elevation_margin)
{
    if (!(table.config() == cfg))
        throw InputError("remap table was built from a different configuration");
    const int l = cfg.grid_size;
    Mask mask(l, l, false);
    for (int i = 0; i < l; ++i) {
        for (int j = 0; j < l; ++j) {
            const SphericalDir dir = world_to_spherical(bev_index_to_world({i, j}, cfg), cfg);
            mask.set(j, i, dir.phi < -elevation_margin);
        }
    }
    return mask;
}

std::vector<std::string> placement_warnings(const StitchScene& scene)
{
    std::vector<std::string> out;
    for (const auto& cam : scene.cameras) {
        const double x = cam.placement.x_cam(scene.sat_size);
        const double y = cam.placement.y_cam(scene.sat_size);
        if (x < 0.0 || x >= scene.sat_size || y < 0.0 || y >= scene.sat_size)
            out.push_back("camera " + std::to_string(cam.placement.index) + " capture point (" +
                          std::to_string(x) + ", " + std::to_string(y) + ") lies outside the tile");
    }
    return out;
}

} // namespace cbev

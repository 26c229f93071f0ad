#include "cbev/geometry.hpp"

#include "cbev/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace cbev {

using std::numbers::pi;

double BevConfig::effective_d_max() const
{
    return d_max ? *d_max : (grid_size / 2.0) * std::sqrt(2.0);
}

void BevConfig::validate() const
{
    if (grid_size <= 0)
        throw InputError("grid_size must be positive");
    if (pano_width <= 0 || pano_height <= 0)
        throw InputError("panorama dimensions must be positive");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw InputError("lambda must be finite and >= 0");
    if (!(camera_height > 0.0) || !std::isfinite(camera_height))
        throw InputError("camera_height must be finite and > 0");
    if (!(effective_d_max() > 0.0) || !std::isfinite(effective_d_max()))
        throw InputError("d_max must be finite and > 0");
}

std::vector<std::string> BevConfig::warnings() const
{
    std::vector<std::string> out;
    if (pano_width != 2 * pano_height)
        out.push_back("panorama is " + std::to_string(pano_width) + "x" + std::to_string(pano_height) +
                      ", expected a 2:1 equirectangular image");
    return out;
}

WorldPoint bev_index_to_world(BevIndex idx, const BevConfig& cfg)
{
    const int l = cfg.grid_size;
    if (idx.i < 0 || idx.i >= l || idx.j < 0 || idx.j >= l)
        throw InputError("BEV index (" + std::to_string(idx.i) + ", " + std::to_string(idx.j) +
                         ") outside a " + std::to_string(l) + " grid");
    const double half = l / 2.0;
    const double x = idx.j - half;
    const double y = half - idx.i;
    const double d_norm = std::sqrt(x * x + y * y) / cfg.effective_d_max();
    const double d2 = d_norm * d_norm;
    return {x, y, d2 * d2 * cfg.lambda};
}

SphericalDir world_to_spherical(const WorldPoint& p, const BevConfig& cfg)
{
    if (p.x == 0.0 && p.y == 0.0)
        return {0.0, -pi / 2, true};
    const double r = std::sqrt(p.x * p.x + p.y * p.y);
    return {std::atan2(p.y, p.x), std::atan2(p.z - cfg.camera_height, r), false};
}

namespace {

struct RawCoord {
    PanoCoord coord;
    bool in_range = true;
};

RawCoord project(const WorldPoint& p, const BevConfig& cfg)
{
    const SphericalDir dir = world_to_spherical(p, cfg);
    const double w = cfg.pano_width;
    const double h = cfg.pano_height;

    double u = (dir.theta + pi) * w / (2.0 * pi);
    u = std::fmod(u, w);
    if (u < 0.0)
        u += w;
    if (u >= w) // fmod of a value just below 0 can round back up to w
        u = 0.0;

    double v = (pi / 2 + dir.phi) * h / pi;
    if (cfg.v_flip)
        v = h - v;
    const bool in_range = std::isfinite(u) && v >= 0.0 && v <= h;
    return {{u, std::clamp(v, 0.0, h)}, in_range};
}

} // namespace

PanoCoord world_to_pano(const WorldPoint& p, const BevConfig& cfg)
{
    return project(p, cfg).coord;
}

BilinearTap make_tap(const PanoCoord& coord, int pano_width, int pano_height)
{
    if (!std::isfinite(coord.u) || !std::isfinite(coord.v))
        throw InputError("non-finite panorama coordinate");
    // Sampling runs at the f32 precision of the stored table so that an
    // in-memory table and one read back from disk resample identically.
    const double cu = static_cast<float>(coord.u);
    const double cv = static_cast<float>(coord.v);
    const double w = pano_width;
    double u = std::fmod(cu, w);
    if (u < 0.0)
        u += w;
    const double x0f = std::floor(u);
    int x0 = static_cast<int>(x0f) % pano_width;
    const int x1 = (x0 + 1) % pano_width;

    int y0 = 0;
    int y1 = 0;
    float fy = 0.0f;
    if (cv > 0.0) {
        const double y0f = std::floor(cv);
        if (y0f >= pano_height - 1) {
            y0 = y1 = pano_height - 1;
        } else {
            y0 = static_cast<int>(y0f);
            y1 = y0 + 1;
            fy = static_cast<float>(cv - y0f);
        }
    }

    BilinearTap tap;
    tap.base = (y0 * pano_width + x0) * Image::channels;
    tap.right = (x1 - x0) * Image::channels;
    tap.down = (y1 - y0) * pano_width * Image::channels;
    tap.fx = static_cast<float>(u - x0f);
    tap.fy = fy;
    return tap;
}

RemapTable::RemapTable(BevConfig cfg, std::vector<PanoCoord> coords, std::vector<std::uint8_t> in_range)
    : cfg_(std::move(cfg)), coords_(std::move(coords)), in_range_(std::move(in_range))
{
    cfg_.validate();
    const auto n = static_cast<std::size_t>(cfg_.grid_size) * cfg_.grid_size;
    if (coords_.size() != n || in_range_.size() != n)
        throw InputError("remap table holds " + std::to_string(coords_.size()) + " entries, expected " +
                         std::to_string(n));
    taps_.reserve(n);
    for (const auto& c : coords_)
        taps_.push_back(make_tap(c, cfg_.pano_width, cfg_.pano_height));
}

bool RemapTable::same_coords(const RemapTable& other) const
{
    if (coords_.size() != other.coords_.size())
        return false;
    for (std::size_t k = 0; k < coords_.size(); ++k)
        if (std::bit_cast<std::uint64_t>(coords_[k].u) != std::bit_cast<std::uint64_t>(other.coords_[k].u) ||
            std::bit_cast<std::uint64_t>(coords_[k].v) != std::bit_cast<std::uint64_t>(other.coords_[k].v))
            return false;
    return true;
}

RemapTable build_remap_table(const BevConfig& cfg)
{
    cfg.validate();
    const int l = cfg.grid_size;
    std::vector<PanoCoord> coords;
    std::vector<std::uint8_t> in_range;
    coords.reserve(static_cast<std::size_t>(l) * l);
    in_range.reserve(static_cast<std::size_t>(l) * l);
    for (int i = 0; i < l; ++i) {
        for (int j = 0; j < l; ++j) {
            const RawCoord raw = project(bev_index_to_world({i, j}, cfg), cfg);
            coords.push_back(raw.coord);
            in_range.push_back(raw.in_range ? 1 : 0);
        }
    }
    return RemapTable(cfg, std::move(coords), std::move(in_range));
}

namespace {

// Lerp form keeps constant regions exactly constant.
inline float blend(float a, float b, float c, float d, float fx, float fy)
{
    const float top = a + fx * (b - a);
    const float bottom = c + fx * (d - c);
    return top + fy * (bottom - top);
}

template <typename T>
inline void blend_pixel(const T* src, const BilinearTap& tap, float out[3])
{
    const T* p = src + tap.base;
    for (int c = 0; c < 3; ++c)
        out[c] = blend(static_cast<float>(p[c]), static_cast<float>(p[tap.right + c]),
                       static_cast<float>(p[tap.down + c]), static_cast<float>(p[tap.down + tap.right + c]),
                       tap.fx, tap.fy);
}

void check_dims(const Image& pano, const BevConfig& cfg)
{
    if (pano.width() != cfg.pano_width || pano.height() != cfg.pano_height)
        throw InputError("panorama is " + std::to_string(pano.width()) + "x" + std::to_string(pano.height()) +
                         " but the remap table expects " + std::to_string(cfg.pano_width) + "x" +
                         std::to_string(cfg.pano_height));
}

BilinearTap nearest_tap(const PanoCoord& coord, int w, int h)
{
    const double u = static_cast<float>(coord.u);
    const double v = static_cast<float>(coord.v);
    PanoCoord snapped{std::round(u), std::clamp(std::round(v), 0.0, static_cast<double>(h - 1))};
    return make_tap(snapped, w, h);
}

} // namespace

Rgb sample_bilinear(const Image& pano, const PanoCoord& coord)
{
    if (pano.empty())
        throw InputError("empty panorama");
    const BilinearTap tap = make_tap(coord, pano.width(), pano.height());
    float out[3];
    if (pano.format() == PixelFormat::u8)
        blend_pixel(pano.u8().data(), tap, out);
    else
        blend_pixel(pano.f32().data(), tap, out);
    return {out[0], out[1], out[2]};
}

Rgb sample_nearest(const Image& pano, const PanoCoord& coord)
{
    if (pano.empty())
        throw InputError("empty panorama");
    const BilinearTap tap = nearest_tap(coord, pano.width(), pano.height());
    const int x = (tap.base / Image::channels) % pano.width();
    const int y = (tap.base / Image::channels) / pano.width();
    return pano.pixel(x, y);
}

Image apply_remap(const Image& pano, const RemapTable& table, Interpolation interp)
{
    check_dims(pano, table.config());
    const int l = table.size();
    Image out(l, l, pano.format());
    const auto& taps = table.taps();
    const std::size_t n = taps.size();

    if (interp == Interpolation::nearest) {
        for (std::size_t k = 0; k < n; ++k) {
            const BilinearTap tap = nearest_tap(table.coords()[k], pano.width(), pano.height());
            for (int c = 0; c < 3; ++c) {
                if (pano.format() == PixelFormat::u8)
                    out.u8()[k * 3 + c] = pano.u8()[tap.base + c];
                else
                    out.f32()[k * 3 + c] = pano.f32()[tap.base + c];
            }
        }
        return out;
    }

    if (pano.format() == PixelFormat::u8) {
        const std::uint8_t* src = pano.u8().data();
        std::uint8_t* dst = out.u8().data();
        for (std::size_t k = 0; k < n; ++k) {
            float px[3];
            blend_pixel(src, taps[k], px);
            dst[k * 3 + 0] = static_cast<std::uint8_t>(px[0] + 0.5f);
            dst[k * 3 + 1] = static_cast<std::uint8_t>(px[1] + 0.5f);
            dst[k * 3 + 2] = static_cast<std::uint8_t>(px[2] + 0.5f);
        }
    } else {
        const float* src = pano.f32().data();
        float* dst = out.f32().data();
        for (std::size_t k = 0; k < n; ++k)
            blend_pixel(src, taps[k], dst + k * 3);
    }
    return out;
}

namespace {

constexpr std::array<char, 5> table_magic{'C', 'B', 'E', 'V', '1'};

template <typename T>
void put_le(std::ofstream& out, T value)
{
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t b = 0; b < sizeof(U); ++b)
        out.put(static_cast<char>((bits >> (8 * b)) & 0xFF));
}

template <typename T>
T get_le(std::ifstream& in, const std::filesystem::path& path)
{
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    std::array<unsigned char, sizeof(U)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in)
        throw IoError("truncated remap table: " + path.string());
    U bits = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b)
        bits |= static_cast<U>(bytes[b]) << (8 * b);
    return std::bit_cast<T>(bits);
}

} // namespace

void write_remap_table(const std::filesystem::path& path, const RemapTable& table)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    const BevConfig& cfg = table.config();
    out.write(table_magic.data(), table_magic.size());
    put_le(out, static_cast<std::uint32_t>(cfg.grid_size));
    put_le(out, static_cast<std::uint32_t>(cfg.pano_width));
    put_le(out, static_cast<std::uint32_t>(cfg.pano_height));
    put_le(out, cfg.lambda);
    put_le(out, cfg.camera_height);
    put_le(out, cfg.effective_d_max());
    put_le(out, static_cast<std::uint8_t>(cfg.v_flip ? 1 : 0));
    for (const auto& c : table.coords()) {
        put_le(out, static_cast<float>(c.u));
        put_le(out, static_cast<float>(c.v));
    }
    if (!out)
        throw IoError("write failed: " + path.string());
}

RemapTable read_remap_table(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::array<char, 5> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != table_magic)
        throw IoError("not a CBEV1 remap table: " + path.string());
    BevConfig cfg;
    cfg.grid_size = static_cast<int>(get_le<std::uint32_t>(in, path));
    cfg.pano_width = static_cast<int>(get_le<std::uint32_t>(in, path));
    cfg.pano_height = static_cast<int>(get_le<std::uint32_t>(in, path));
    cfg.lambda = get_le<double>(in, path);
    cfg.camera_height = get_le<double>(in, path);
    cfg.d_max = get_le<double>(in, path);
    cfg.v_flip = get_le<std::uint8_t>(in, path) != 0;
    cfg.validate();

    const auto n = static_cast<std::size_t>(cfg.grid_size) * cfg.grid_size;
    std::vector<PanoCoord> coords(n);
    std::vector<std::uint8_t> in_range(n, 1);
    for (std::size_t k = 0; k < n; ++k) {
        coords[k].u = get_le<float>(in, path);
        coords[k].v = get_le<float>(in, path);
    }
    if (in.peek() != std::char_traits<char>::eof())
        throw IoError("trailing bytes in remap table: " + path.string());
    return RemapTable(cfg, std::move(coords), std::move(in_range));
}

} // namespace cbev

#include "support/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <vector>

namespace cbev::testing {

namespace {

/// Periodic value noise on a lattice of `cells` x `cells`, smoothstep-interpolated.
class ValueNoise {
public:
    ValueNoise(std::uint32_t seed, int cells_x, int cells_y)
        : cx_(cells_x), cy_(cells_y), values_(static_cast<std::size_t>(cells_x) * cells_y)
    {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        for (auto& v : values_)
            v = dist(rng);
    }

    /// s, t in [0, 1); wraps in both directions.
    double operator()(double s, double t) const
    {
        const double x = s * cx_;
        const double y = t * cy_;
        const int x0 = static_cast<int>(std::floor(x));
        const int y0 = static_cast<int>(std::floor(y));
        const double fx = smooth(x - x0);
        const double fy = smooth(y - y0);
        const double a = at(x0, y0);
        const double b = at(x0 + 1, y0);
        const double c = at(x0, y0 + 1);
        const double d = at(x0 + 1, y0 + 1);
        return (a + fx * (b - a)) + fy * ((c + fx * (d - c)) - (a + fx * (b - a)));
    }

private:
    static double smooth(double f) { return f * f * (3.0 - 2.0 * f); }
    double at(int x, int y) const
    {
        x = ((x % cx_) + cx_) % cx_;
        y = ((y % cy_) + cy_) % cy_;
        return values_[static_cast<std::size_t>(y) * cx_ + x];
    }

    int cx_;
    int cy_;
    std::vector<double> values_;
};

double fractal(const std::vector<ValueNoise>& octaves, double s, double t)
{
    double sum = 0.0;
    double amp = 0.5;
    double norm = 0.0;
    for (const auto& o : octaves) {
        sum += amp * o(s, t);
        norm += amp;
        amp *= 0.5;
    }
    return sum / norm;
}

std::vector<ValueNoise> octaves(std::uint32_t seed, int base_x, int base_y, int count)
{
    std::vector<ValueNoise> out;
    for (int k = 0; k < count; ++k)
        out.emplace_back(seed * 7919u + static_cast<std::uint32_t>(k), base_x << k, base_y << k);
    return out;
}

} // namespace

Image synthetic_panorama(std::uint32_t seed, int width, int height)
{
    Image img(width, height, PixelFormat::u8);
    const auto sky = octaves(seed + 1, 8, 4, 4);
    const auto ground = octaves(seed + 2, 32, 8, 5);
    const auto skyline = ValueNoise(seed + 3, 48, 1);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> tint(-0.08, 0.08);
    const double tr = tint(rng);
    const double tg = tint(rng);
    const double road_dir = std::uniform_real_distribution<double>(0.0, 1.0)(rng);

    for (int y = 0; y < height; ++y) {
        const double t = (y + 0.5) / height; // 0 = zenith
        for (int x = 0; x < width; ++x) {
            const double s = (x + 0.5) / width;
            Rgb c;
            // Building tops sit between 35% and 48% of the height.
            const double roof = 0.35 + 0.13 * skyline(s, 0.0);
            if (t < roof) {
                const double cloud = fractal(sky, s, t);
                const double g = 0.55 + 0.4 * t;
                c = {0.35 * g + 0.5 * cloud, 0.55 * g + 0.4 * cloud, 0.85 + 0.15 * cloud};
            } else if (t < 0.5) {
                const double brick = fractal(ground, s * 2.0, t);
                const bool window = (static_cast<int>(s * 400) % 5 < 2) && (static_cast<int>(t * 200) % 4 < 2);
                const double base = 0.45 + 0.3 * brick;
                c = window ? Rgb{0.2, 0.25, 0.3} : Rgb{base + 0.1, base * 0.8, base * 0.6};
            } else {
                const double tex = fractal(ground, s, t);
                const double grass = 0.25 + 0.35 * tex;
                c = {grass * 0.7, grass, grass * 0.5};
                // Two road bands crossing the panorama (opposite azimuths).
                const double d1 = std::abs(std::remainder(s - road_dir, 0.5));
                if (d1 < 0.06 * (t - 0.45)) {
                    const double asphalt = 0.3 + 0.15 * tex;
                    c = {asphalt, asphalt, asphalt};
                    if (d1 < 0.004 * (t - 0.45))
                        c = {0.95, 0.9, 0.6};
                }
            }
            img.set_pixel(x, y, {255.0 * std::clamp(c[0] + tr, 0.0, 1.0), 255.0 * std::clamp(c[1] + tg, 0.0, 1.0),
                                 255.0 * std::clamp(c[2], 0.0, 1.0)});
        }
    }
    return img;
}

Image natural_image(std::uint32_t seed, int width, int height, double lo, double hi, PixelFormat format)
{
    Image img(width, height, format);
    const auto r = octaves(seed * 3 + 11, 4, 4, 5);
    const auto g = octaves(seed * 3 + 12, 4, 4, 5);
    const auto b = octaves(seed * 3 + 13, 4, 4, 5);
    const double span = hi - lo;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double s = (x + 0.5) / width;
            const double t = (y + 0.5) / height;
            const double lum = fractal(r, s, t);
            // Correlated channels, like real photographs.
            const double rc = 0.6 * lum + 0.4 * fractal(g, s, t);
            const double gc = 0.7 * lum + 0.3 * fractal(b, s, t);
            const double bc = 0.5 * lum + 0.5 * fractal(b, t, s);
            const double scale = format == PixelFormat::u8 ? 255.0 : 1.0;
            img.set_pixel(x, y, {scale * (lo + span * rc), scale * (lo + span * gc), scale * (lo + span * bc)});
        }
    return img;
}

Image add_noise(const Image& img, double sigma, std::uint32_t seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    Image out = img.to_u8();
    for (auto& v : out.u8())
        v = to_byte(v + noise(rng));
    return out;
}

std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("cbev_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::uint64_t file_hash(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 1469598103934665603ull;
    for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
        h ^= static_cast<unsigned char>(*it);
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace cbev::testing

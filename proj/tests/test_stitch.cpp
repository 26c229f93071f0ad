#include "cbev/error.hpp"
#include "cbev/stitch.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>

#include <random>

using namespace cbev;

namespace {

/// Exhaustive nearest-camera oracle on integer geometry: exact squared
/// distances in 64-bit integers, ties to the smallest id.
int brute_force_nearest(int x, int y, const std::vector<CameraPlacement>& cams, int sat_size)
{
    int best = -1;
    long long best_d = 0;
    for (const auto& c : cams) {
        const long long cx = sat_size / 2 + static_cast<long long>(c.dx);
        const long long cy = sat_size / 2 + static_cast<long long>(c.dy);
        const long long d = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        if (best < 0 || d < best_d || (d == best_d && c.index < best)) {
            best = c.index;
            best_d = d;
        }
    }
    return best;
}

Image gradient_bev(int l, double seed)
{
    Image img(l, l);
    for (int y = 0; y < l; ++y)
        for (int x = 0; x < l; ++x)
            img.set_pixel(x, y, {std::fmod(x * 3.0 + seed, 256.0), std::fmod(y * 5.0 + seed, 256.0), seed});
    return img;
}

} // namespace

TEST_CASE("assign_nearest_camera")
{
    const std::vector<CameraPlacement> single{{0, 37.0, -12.0}};
    for (int x = 0; x < 512; x += 37)
        CHECK(assign_nearest_camera(x, 100.0, single, 512) == 0);

    const std::vector<CameraPlacement> pair{{0, -100.0, 0.0}, {1, 100.0, 0.0}};
    CHECK(assign_nearest_camera(200.0, 256.0, pair, 512) == 0); // 44 vs 156
    CHECK(assign_nearest_camera(300.0, 256.0, pair, 512) == 1);
    CHECK(assign_nearest_camera(256.0, 256.0, pair, 512) == 0); // tie -> lower id

    // Tie-break follows the id, not the list order.
    const std::vector<CameraPlacement> reversed{{1, 100.0, 0.0}, {0, -100.0, 0.0}};
    CHECK(assign_nearest_camera(256.0, 256.0, reversed, 512) == 0);

    CHECK_THROWS_AS(assign_nearest_camera(0.0, 0.0, std::vector<CameraPlacement>{}, 512), InputError);
}

TEST_CASE("nearest camera matches brute force on random scenes with ties")
{
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> offset(-32, 31);
    std::uniform_int_distribution<int> count(1, 4);
    for (int scene = 0; scene < 40; ++scene) {
        std::vector<CameraPlacement> cams;
        const int n = count(rng);
        for (int k = 0; k < n; ++k)
            cams.push_back({k, static_cast<double>(offset(rng)), static_cast<double>(offset(rng))});
        if (n >= 2) // mirror camera 1 through camera 0 along x so a column ties
            cams[1] = {1, cams[0].dx + 6.0, cams[0].dy};
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                REQUIRE(assign_nearest_camera(x, y, cams, 64) == brute_force_nearest(x, y, cams, 64));
    }
}

TEST_CASE("translation consistency")
{
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> offset(-20, 20);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<CameraPlacement> cams;
        for (int k = 0; k < 3; ++k)
            cams.push_back({k, static_cast<double>(offset(rng)), static_cast<double>(offset(rng))});
        const double tx = offset(rng);
        const double ty = offset(rng);
        auto moved = cams;
        for (auto& c : moved) {
            c.dx += tx;
            c.dy += ty;
        }
        for (int y = 0; y < 64; y += 3)
            for (int x = 0; x < 64; x += 3)
                CHECK(assign_nearest_camera(x, y, cams, 64) == assign_nearest_camera(x + tx, y + ty, moved, 64));
    }
}

TEST_CASE("stitch_multi_to_one")
{
    SUBCASE("single zero-offset camera reproduces its BEV")
    {
        const Image bev = gradient_bev(64, 40.0);
        StitchScene scene{64, {{{0, 0.0, 0.0}, bev, Mask(64, 64, true)}}, {128.0, 128.0, 128.0}};
        const StitchResult r = stitch_multi_to_one(scene);
        CHECK(r.image == bev);
        CHECK(r.coverage.count() == 64u * 64u);
    }

    SUBCASE("two cameras pick the nearest source at x - dx")
    {
        const Image a = gradient_bev(512, 10.0);
        const Image b = gradient_bev(512, 200.0);
        StitchScene scene{512,
                          {{{0, -100.0, 0.0}, a, Mask(512, 512, true)}, {{1, 100.0, 0.0}, b, Mask(512, 512, true)}},
                          {128.0, 128.0, 128.0}};
        const StitchResult r = stitch_multi_to_one(scene);
        CHECK(r.image.pixel(200, 256) == a.pixel(300, 256));
        CHECK(r.image.pixel(300, 256) == b.pixel(200, 256));

        // Grid oracle: nearest in-bounds camera, fallback to the other, else fill.
        for (int y = 0; y < 512; y += 9)
            for (int x = 0; x < 512; x += 7) {
                const int near = x <= 256 ? 0 : 1;
                const int far = 1 - near;
                const double dx[2] = {-100.0, 100.0};
                const Image* imgs[2] = {&a, &b};
                Rgb expect{128.0, 128.0, 128.0};
                int owner = -1;
                for (int k : {near, far}) {
                    const int sx = x - static_cast<int>(dx[k]);
                    if (sx >= 0 && sx < 512) {
                        expect = imgs[k]->pixel(sx, y);
                        owner = k;
                        break;
                    }
                }
                REQUIRE(r.image.pixel(x, y) == expect);
                REQUIRE(r.owner[static_cast<std::size_t>(y) * 512 + x] == owner);
                REQUIRE(r.coverage.at(x, y) == (owner >= 0));
            }
    }

    SUBCASE("masked nearest camera falls back to the next one")
    {
        const Image a = gradient_bev(32, 1.0);
        const Image b = gradient_bev(32, 99.0);
        Mask mask_a(32, 32, true);
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 16; ++x)
                mask_a.set(x, y, false);
        StitchScene scene{32, {{{0, 0.0, 0.0}, a, mask_a}, {{1, 4.0, 0.0}, b, Mask(32, 32, true)}},
                          {0.0, 0.0, 0.0}};
        const StitchResult r = stitch_multi_to_one(scene);
        // x = 3: A is nearest but masked; B's source x - 4 = -1 is off-canvas.
        CHECK(r.owner[5 * 32 + 3] == -1);
        CHECK_FALSE(r.coverage.at(3, 5));
        CHECK(r.image.pixel(3, 5) == Rgb{0.0, 0.0, 0.0});
        // x = 5: A masked, B reads source 1.
        CHECK(r.owner[5 * 32 + 5] == 1);
        CHECK(r.image.pixel(5, 5) == b.pixel(1, 5));
        // x = 17: A nearest and unmasked.
        CHECK(r.owner[5 * 32 + 17] == 0);
        CHECK(r.image.pixel(17, 5) == a.pixel(17, 5));
        // x = 18: equidistant, lower id wins.
        CHECK(r.owner[5 * 32 + 18] == 0);
        // x = 20: B nearest.
        CHECK(r.image.pixel(20, 5) == b.pixel(16, 5));
    }

    SUBCASE("all masks false gives the fill colour everywhere")
    {
        StitchScene scene{16,
                          {{{0, 0.0, 0.0}, gradient_bev(16, 3.0), Mask(16, 16, false)},
                           {{1, 2.0, 2.0}, gradient_bev(16, 5.0), Mask(16, 16, false)}},
                          {9.0, 8.0, 7.0}};
        const StitchResult r = stitch_multi_to_one(scene);
        CHECK(r.image == Image::filled(16, 16, {9.0, 8.0, 7.0}));
        CHECK(r.coverage.count() == 0u);
    }

    SUBCASE("fractional offsets blend neighbouring BEV pixels")
    {
        Image bev = Image::filled(8, 8, {0.0, 0.0, 0.0});
        for (int y = 0; y < 8; ++y)
            bev.set_pixel(4, y, {100.0, 100.0, 100.0});
        StitchScene scene{8, {{{0, 0.5, 0.0}, bev, Mask(8, 8, true)}}, {1.0, 1.0, 1.0}};
        const StitchResult r = stitch_multi_to_one(scene);
        // Output x = 4 reads source 3.5: halfway between 0 and 100.
        CHECK(r.image.get(4, 2, 0) == 50.0);
        CHECK_FALSE(r.coverage.at(0, 0)); // source -0.5 is outside
    }

    SUBCASE("input validation")
    {
        CHECK_THROWS_AS(stitch_multi_to_one(StitchScene{16, {}, {}}), InputError);
        StitchScene bad{16, {{{0, 0.0, 0.0}, gradient_bev(16, 1.0), Mask(8, 8, true)}}, {}};
        CHECK_THROWS_AS(stitch_multi_to_one(bad), InputError);
        StitchScene mixed{16,
                          {{{0, 0.0, 0.0}, gradient_bev(16, 1.0), Mask(16, 16, true)},
                           {{1, 0.0, 0.0}, gradient_bev(8, 1.0), Mask(8, 8, true)}},
                          {}};
        CHECK_THROWS_AS(stitch_multi_to_one(mixed), InputError);
    }
}

TEST_CASE("partition: every pixel is owned by exactly one camera")
{
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> offset(-10, 10);
    std::vector<StitchCamera> cams;
    for (int k = 0; k < 4; ++k)
        cams.push_back({{k, static_cast<double>(offset(rng)), static_cast<double>(offset(rng))},
                        gradient_bev(96, 10.0 * k),
                        Mask(96, 96, true)});
    // Camera canvases (96) larger than the tile (48) keep every source in bounds.
    const StitchResult r = stitch_multi_to_one({48, cams, {0.0, 0.0, 0.0}});
    std::vector<CameraPlacement> placements;
    for (const auto& c : cams)
        placements.push_back(c.placement);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x) {
            REQUIRE(r.coverage.at(x, y));
            REQUIRE(r.owner[static_cast<std::size_t>(y) * 48 + x] == assign_nearest_camera(x, y, placements, 48));
        }
}

TEST_CASE("heuristic_occlusion_mask")
{
    BevConfig cfg; // l=512, lambda=3, H=1.5
    const RemapTable table = build_remap_table(cfg);

    SUBCASE("zero margin keeps exactly the points below camera height")
    {
        BevConfig small = cfg;
        small.grid_size = 128;
        small.d_max = 20.0; // make the surface rise above H inside the canvas
        const RemapTable t = build_remap_table(small);
        const Mask m = heuristic_occlusion_mask(small, t, 0.0);
        std::size_t kept = 0;
        for (int i = 0; i < 128; ++i)
            for (int j = 0; j < 128; ++j) {
                const WorldPoint p = bev_index_to_world({i, j}, small);
                REQUIRE(m.at(j, i) == (p.z < small.camera_height));
                kept += m.at(j, i) ? 1 : 0;
            }
        CHECK(kept > 0);
        CHECK(kept < 128u * 128u);
    }

    SUBCASE("nadir is always kept")
    {
        for (double margin : {0.0, 0.5, 1.5, 1.57})
            CHECK(heuristic_occlusion_mask(cfg, table, margin).at(256, 256));
    }

    SUBCASE("regression: keep count from exhaustive numpy enumeration")
    {
        CHECK(heuristic_occlusion_mask(cfg, table, 0.05).count() == 2809u);
    }

    BevConfig other = cfg;
    other.lambda = 10.0;
    CHECK_THROWS_AS(heuristic_occlusion_mask(other, table, 0.05), InputError);
}

TEST_CASE("placement warnings")
{
    StitchScene scene{64, {{{0, 0.0, 0.0}, gradient_bev(8, 1.0), Mask(8, 8, true)},
                           {{1, 40.0, 0.0}, gradient_bev(8, 1.0), Mask(8, 8, true)}},
                      {}};
    const auto w = placement_warnings(scene);
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("camera 1") != std::string::npos);
}

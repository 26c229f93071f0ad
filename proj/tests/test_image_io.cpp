#include "cbev/error.hpp"
#include "cbev/image_io.hpp"
#include "cbev/metrics.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>

#include <fstream>

using namespace cbev;
using cbev::testing::scratch_dir;

TEST_CASE("png round trip")
{
    const auto dir = scratch_dir("io_png");
    const Image img = testing::synthetic_panorama(4, 128, 64);
    write_png(dir / "a.png", img);
    CHECK(read_image(dir / "a.png") == img);

    // f32 images are rounded to bytes on the way out.
    const Image f = img.to_f32();
    write_png(dir / "b.png", f);
    CHECK(read_image(dir / "b.png") == img);

    write_png(dir / "c.png", img);
    CHECK(testing::file_hash(dir / "a.png") == testing::file_hash(dir / "c.png"));
}

TEST_CASE("jpeg round trip is close")
{
    const auto dir = scratch_dir("io_jpeg");
    const Image img = testing::natural_image(8, 96, 64, 0.1, 0.9, PixelFormat::u8);
    write_jpeg(dir / "a.jpg", img, 95);
    const Image back = read_image(dir / "a.jpg");
    CHECK(back.width() == 96);
    CHECK(back.height() == 64);
    CHECK(psnr(back, img) > 35.0);
}

TEST_CASE("masks")
{
    const auto dir = scratch_dir("io_mask");
    Mask m(20, 10, true);
    for (int x = 0; x < 20; x += 3)
        m.set(x, 4, false);
    write_mask(dir / "m.png", m);
    CHECK(read_mask(dir / "m.png") == m);

    // RGB masks use the first channel with a 128 threshold.
    Image rgb = Image::filled(4, 4, {200.0, 0.0, 0.0});
    rgb.set_pixel(1, 1, {127.0, 255.0, 255.0});
    write_png(dir / "rgb.png", rgb);
    const Mask r = read_mask(dir / "rgb.png");
    CHECK(r.at(0, 0));
    CHECK_FALSE(r.at(1, 1));
    CHECK(r.count() == 15u);
}

TEST_CASE("errors")
{
    const auto dir = scratch_dir("io_errors");
    CHECK_THROWS_AS(read_image(dir / "missing.png"), IoError);
    std::ofstream(dir / "junk.png") << "hello";
    CHECK_THROWS(read_image(dir / "junk.png"));
    std::ofstream(dir / "trunc.png", std::ios::binary) << "\x89PNG\r\n\x1a\n\0\0";
    CHECK_THROWS(read_image(dir / "trunc.png"));
    CHECK_THROWS_AS(write_png(dir / "no/such/dir/a.png", Image(2, 2)), IoError);
}

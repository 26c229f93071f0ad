#include "cbev/image_io.hpp"

#include "cbev/error.hpp"

#include <png.h>

#include <array>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

namespace cbev {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const
    {
        if (f)
            std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode)
{
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f)
        throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
    return f;
}

enum class Codec { png, jpeg, unknown };

Codec sniff(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::array<unsigned char, 8> sig{};
    in.read(reinterpret_cast<char*>(sig.data()), sig.size());
    if (in.gcount() >= 8 && png_sig_cmp(sig.data(), 0, 8) == 0)
        return Codec::png;
    if (in.gcount() >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF)
        return Codec::jpeg;
    return Codec::unknown;
}

std::vector<std::uint8_t> read_png_pixels(const std::filesystem::path& path, png_uint_32 format, int& width,
                                          int& height)
{
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
    image.format = format;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        png_image_free(&image);
        throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    width = static_cast<int>(image.width);
    height = static_cast<int>(image.height);
    return buffer;
}

void write_png_pixels(const std::filesystem::path& path, png_uint_32 format, int width, int height,
                      const std::uint8_t* pixels)
{
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    if (!png_image_write_to_file(&image, path.c_str(), 0, pixels, 0, nullptr))
        throw IoError("cannot write PNG " + path.string() + ": " + image.message);
}

struct JpegErrorManager {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo)
{
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

Image read_jpeg(const std::filesystem::path& path)
{
    auto file = open_file(path, "rb");
    jpeg_decompress_struct cinfo{};
    JpegErrorManager err{};
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    // Everything touched after setjmp lives outside this frame's locals.
    auto img = std::make_unique<Image>();
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw IoError("cannot decode JPEG " + path.string() + ": " + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file.get());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    *img = Image(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
    auto pixels = img->u8();
    const std::size_t stride = static_cast<std::size_t>(cinfo.output_width) * 3;
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = pixels.data() + cinfo.output_scanline * stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return std::move(*img);
}

} // namespace

Image read_image(const std::filesystem::path& path)
{
    if (!std::filesystem::is_regular_file(path))
        throw IoError("no such file: " + path.string());
    switch (sniff(path)) {
    case Codec::png: {
        int w = 0;
        int h = 0;
        auto buffer = read_png_pixels(path, PNG_FORMAT_RGB, w, h);
        Image img(w, h);
        std::memcpy(img.u8().data(), buffer.data(), buffer.size());
        return img;
    }
    case Codec::jpeg:
        return read_jpeg(path);
    case Codec::unknown:
        break;
    }
    throw IoError("unsupported image format: " + path.string());
}

void write_png(const std::filesystem::path& path, const Image& image)
{
    const Image u8 = image.to_u8();
    write_png_pixels(path, PNG_FORMAT_RGB, u8.width(), u8.height(), u8.u8().data());
}

void write_jpeg(const std::filesystem::path& path, const Image& image, int quality)
{
    const Image u8 = image.to_u8();
    auto file = open_file(path, "wb");
    jpeg_compress_struct cinfo{};
    JpegErrorManager err{};
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        throw IoError("cannot encode JPEG " + path.string() + ": " + err.message);
    }
    jpeg_create_compress(&cinfo);
    jpeg_stdio_dest(&cinfo, file.get());
    cinfo.image_width = static_cast<JDIMENSION>(u8.width());
    cinfo.image_height = static_cast<JDIMENSION>(u8.height());
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    const std::size_t stride = static_cast<std::size_t>(u8.width()) * 3;
    auto pixels = u8.u8();
    while (cinfo.next_scanline < cinfo.image_height) {
        auto* row = const_cast<JSAMPLE*>(pixels.data() + cinfo.next_scanline * stride);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
}

Mask read_mask(const std::filesystem::path& path)
{
    if (!std::filesystem::is_regular_file(path))
        throw IoError("no such file: " + path.string());
    if (sniff(path) != Codec::png)
        throw IoError("mask must be a PNG: " + path.string());
    int w = 0;
    int h = 0;
    // Expanding to RGB and reading the first channel keeps palette and
    // grayscale inputs alike.
    auto buffer = read_png_pixels(path, PNG_FORMAT_RGB, w, h);
    Mask mask(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            mask.set(x, y, buffer[(static_cast<std::size_t>(y) * w + x) * 3] >= 128);
    return mask;
}

void write_mask(const std::filesystem::path& path, const Mask& mask)
{
    std::vector<std::uint8_t> gray(static_cast<std::size_t>(mask.width()) * mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            gray[static_cast<std::size_t>(y) * mask.width() + x] = mask.at(x, y) ? 255 : 0;
    write_png_pixels(path, PNG_FORMAT_GRAY, mask.width(), mask.height(), gray.data());
}

} // namespace cbev

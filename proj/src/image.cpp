#include "cbev/image.hpp"

#include "cbev/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cbev {

Image::Image(int width, int height, PixelFormat format)
    : width_(width), height_(height), format_(format)
{
    if (width <= 0 || height <= 0)
        throw InputError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                         std::to_string(height));
    const std::size_t n = static_cast<std::size_t>(width) * height * channels;
    if (format == PixelFormat::u8)
        u8_.assign(n, 0);
    else
        f32_.assign(n, 0.0f);
}

Image Image::filled(int width, int height, const Rgb& color, PixelFormat format)
{
    Image img(width, height, format);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            img.set_pixel(x, y, color);
    return img;
}

std::uint8_t to_byte(double value)
{
    return static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
}

double Image::get(int x, int y, int c) const
{
    const auto i = index(x, y, c);
    return format_ == PixelFormat::u8 ? static_cast<double>(u8_[i]) : static_cast<double>(f32_[i]);
}

void Image::set(int x, int y, int c, double value)
{
    const auto i = index(x, y, c);
    if (format_ == PixelFormat::u8)
        u8_[i] = to_byte(value);
    else
        f32_[i] = static_cast<float>(value);
}

Rgb Image::pixel(int x, int y) const
{
    return {get(x, y, 0), get(x, y, 1), get(x, y, 2)};
}

void Image::set_pixel(int x, int y, const Rgb& rgb)
{
    for (int c = 0; c < channels; ++c)
        set(x, y, c, rgb[c]);
}

Image Image::to_f32() const
{
    if (format_ == PixelFormat::f32)
        return *this;
    Image out(width_, height_, PixelFormat::f32);
    for (std::size_t i = 0; i < u8_.size(); ++i)
        out.f32_[i] = static_cast<float>(u8_[i]) / 255.0f;
    return out;
}

Image Image::to_u8() const
{
    if (format_ == PixelFormat::u8)
        return *this;
    Image out(width_, height_, PixelFormat::u8);
    for (std::size_t i = 0; i < f32_.size(); ++i)
        out.u8_[i] = to_byte(static_cast<double>(f32_[i]) * 255.0);
    return out;
}

Mask::Mask(int width, int height, bool value)
    : width_(width), height_(height)
{
    if (width <= 0 || height <= 0)
        throw InputError("mask dimensions must be positive");
    bits_.assign(static_cast<std::size_t>(width) * height, value ? 1 : 0);
}

std::size_t Mask::count() const
{
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

} // namespace cbev

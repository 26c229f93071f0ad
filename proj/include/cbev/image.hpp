#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace cbev {

using Rgb = std::array<double, 3>;

enum class PixelFormat { u8, f32 };

/// Interleaved 3-channel image. u8 images hold values in [0,255]; f32 images
/// hold normalized values, nominally in [0,1].
class Image {
public:
    static constexpr int channels = 3;

    Image() = default;
    Image(int width, int height, PixelFormat format = PixelFormat::u8);

    static Image filled(int width, int height, const Rgb& color, PixelFormat format = PixelFormat::u8);

    int width() const { return width_; }
    int height() const { return height_; }
    PixelFormat format() const { return format_; }
    bool empty() const { return width_ == 0 || height_ == 0; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

    /// Maximum representable intensity: 255 for u8, 1 for f32.
    double peak() const { return format_ == PixelFormat::u8 ? 255.0 : 1.0; }

    std::span<std::uint8_t> u8() { return u8_; }
    std::span<const std::uint8_t> u8() const { return u8_; }
    std::span<float> f32() { return f32_; }
    std::span<const float> f32() const { return f32_; }

    double get(int x, int y, int c) const;
    void set(int x, int y, int c, double value);
    Rgb pixel(int x, int y) const;
    void set_pixel(int x, int y, const Rgb& rgb);

    /// Normalized copy; u8 values are divided by 255.
    Image to_f32() const;
    /// 8-bit copy; values are clamped and rounded to nearest.
    Image to_u8() const;

    bool operator==(const Image& other) const = default;

private:
    std::size_t index(int x, int y, int c) const
    {
        return (static_cast<std::size_t>(y) * width_ + x) * channels + c;
    }

    int width_ = 0;
    int height_ = 0;
    PixelFormat format_ = PixelFormat::u8;
    std::vector<std::uint8_t> u8_;
    std::vector<float> f32_;
};

std::uint8_t to_byte(double value);

/// Single-channel keep/discard grid. true = keep.
class Mask {
public:
    Mask() = default;
    Mask(int width, int height, bool value = true);

    int width() const { return width_; }
    int height() const { return height_; }
    bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool keep) { bits_[static_cast<std::size_t>(y) * width_ + x] = keep ? 1 : 0; }
    std::size_t count() const;
    bool operator==(const Mask& other) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

} // namespace cbev

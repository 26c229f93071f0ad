#pragma once

#include "cbev/image.hpp"

#include <filesystem>

namespace cbev {

/// Decodes a PNG or JPEG file (detected by signature) into an 8-bit RGB image.
/// Grayscale and alpha inputs are expanded / dropped.
Image read_image(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG. f32 images are converted first. Output bytes are a
/// pure function of the pixels.
void write_png(const std::filesystem::path& path, const Image& image);

void write_jpeg(const std::filesystem::path& path, const Image& image, int quality = 95);

/// Reads a single-channel mask PNG: values >= 128 keep, below discard. RGB masks
/// use their first channel.
Mask read_mask(const std::filesystem::path& path);

/// Writes a mask as 8-bit grayscale PNG (0 discard, 255 keep).
void write_mask(const std::filesystem::path& path, const Mask& mask);

} // namespace cbev

#pragma once

#include "cbev/image.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace cbev {

struct ManifestEntry;

double mse(const Image& a, const Image& b);

/// 10 log10(peak^2 / MSE); +inf for identical images.
double psnr(const Image& a, const Image& b, double peak);
/// Peak taken from the images' representation (255 or 1).
double psnr(const Image& a, const Image& b);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// valid-region mean, averaged over the three channels. Both images must share
/// a format; the dynamic range follows it.
double ssim(const Image& a, const Image& b);

struct PairMetrics {
    std::string id;
    double ssim = 0.0;
    double psnr = 0.0;
    double mse = 0.0;
};

struct EvalReport {
    std::vector<PairMetrics> pairs;
    std::vector<std::string> skipped;
    double mean_ssim = 0.0;
    double mean_psnr = 0.0;
    double mean_mse = 0.0;
    /// Cap applied to infinite PSNR values, if any.
    std::optional<double> psnr_cap;
    std::string generated_dir;

    nlohmann::json to_json() const;
};

struct EvalOptions {
    std::optional<double> psnr_cap;
    int threads = 1;
};

/// Arithmetic means over the evaluated pairs.
void aggregate(EvalReport& report);

/// Compares generated_dir/<id>.png (or .jpg) against each entry's satellite
/// image. Missing or unreadable pairs are listed in `skipped`. Throws
/// InputError on an empty manifest.
EvalReport evaluate_pairs(std::span<const ManifestEntry> entries, const std::filesystem::path& manifest_dir,
                          const std::filesystem::path& generated_dir, const EvalOptions& opts = {});

} // namespace cbev

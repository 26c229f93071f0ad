#pragma once

#include "cbev/image.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <span>

namespace cbev {

/// Colour embedding P (3 x k) and recovery Q (k x 3) shared by the normalize
/// and stylize stages.
struct DncmParams {
    int k = 32;
    Eigen::MatrixXd P;
    Eigen::MatrixXd Q;

    /// P = [I3 | 0], Q = [I3 ; 0].
    static DncmParams identity(int k = 32);
    void validate() const;
};

/// Per-image k x k mapping between embedding and recovery.
struct ColorTransform {
    Eigen::MatrixXd T;
    /// Set when the content image had no colour variance and only the mean was
    /// matched.
    bool degenerate = false;

    int k() const { return static_cast<int>(T.rows()); }
    static ColorTransform identity(int k = 32);
};

/// Mean and covariance of RGB pixel values measured on a thumbnail.
struct ColorStats {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
    int thumb = 64;
};

struct FitOptions {
    double ridge = 1e-3;
    int thumb = 64;
};

/// Box-filter resize to size x size (area averaging; nearest replication when
/// upsampling). Output is f32.
Image thumbnail(const Image& img, int size);

ColorStats compute_stats(const Image& img, int thumb = 64);

/// Pooled stats over several images, each weighted by its thumbnail pixel count.
ColorStats pooled_stats(std::span<const Image> images, int thumb = 64);

/// Per pixel: p' = clamp((p P) T Q, 0, 1). Input of either format; output f32.
Image apply_dncm(const Image& img, const DncmParams& params, const ColorTransform& t);

/// Fits T so that apply_dncm(content) reproduces the content re-coloured to the
/// target mean / covariance. The colour target is the linear Monge map between
/// the two Gaussians; T comes from a ridge least-squares fit in embedding space
/// with the mean pinned exactly, lifted through the pseudo-inverse of Q.
ColorTransform fit_to_stats(const Image& content, const ColorStats& target, const DncmParams& params,
                            const FitOptions& opts = {});

ColorTransform fit_style_transform(const Image& content, const Image& reference, const DncmParams& params,
                                   const FitOptions& opts = {});

Image normalize_content(const Image& img, const ColorStats& canonical, const DncmParams& params,
                        const FitOptions& opts = {});

/// Normalize to canonical statistics, then stylize toward the reference.
Image relight(const Image& i0, const Image& reference, const ColorStats& canonical, const DncmParams& params,
              const FitOptions& opts = {});

/// JSON: {"k": int, "P": [3k row-major], "Q": [3k row-major]}.
DncmParams load_dncm_params(const std::filesystem::path& path);
void save_dncm_params(const std::filesystem::path& path, const DncmParams& params);

/// JSON: {"k": int, "T": [k*k row-major]}.
ColorTransform load_color_transform(const std::filesystem::path& path);
void save_color_transform(const std::filesystem::path& path, const ColorTransform& t);

/// JSON: {"thumb": int, "mean": [3], "covariance": [9 row-major]}.
ColorStats load_color_stats(const std::filesystem::path& path);
void save_color_stats(const std::filesystem::path& path, const ColorStats& stats);

} // namespace cbev

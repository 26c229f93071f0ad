#include "cbev/relight.hpp"

#include "cbev/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace cbev {

namespace {

// Added to both covariances before taking square roots so that grey or
// single-hue images still give a finite map.
constexpr double covariance_floor = 1e-6;
constexpr double degenerate_variance = 1e-10;

using PixelMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

PixelMatrix pixel_matrix(const Image& img)
{
    const Image f = img.to_f32();
    const auto data = f.f32();
    PixelMatrix m(static_cast<Eigen::Index>(f.pixel_count()), 3);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (int c = 0; c < 3; ++c)
            m(r, c) = data[static_cast<std::size_t>(r) * 3 + c];
    return m;
}

void accumulate(const PixelMatrix& px, Eigen::Vector3d& sum, Eigen::Matrix3d& outer)
{
    sum += px.colwise().sum().transpose();
    outer += px.transpose() * px;
}

ColorStats finish_stats(const Eigen::Vector3d& sum, const Eigen::Matrix3d& outer, double n, int thumb)
{
    ColorStats s;
    s.thumb = thumb;
    s.mean = sum / n;
    s.covariance = outer / n - s.mean * s.mean.transpose();
    s.covariance = 0.5 * (s.covariance + s.covariance.transpose());
    return s;
}

Eigen::Matrix3d sym_power(const Eigen::Matrix3d& m, double power)
{
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(m);
    Eigen::Vector3d values = eig.eigenvalues().cwiseMax(0.0);
    for (int k = 0; k < 3; ++k)
        values[k] = std::pow(values[k], power);
    return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

/// Symmetric linear map A with (x - mu_s) A ~ N(0, target) for x ~ N(mu_s, source).
Eigen::Matrix3d monge_map(const Eigen::Matrix3d& source, const Eigen::Matrix3d& target)
{
    const Eigen::Matrix3d floor = covariance_floor * Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d s = source + floor;
    const Eigen::Matrix3d t = target + floor;
    const Eigen::Matrix3d root = sym_power(s, 0.5);
    const Eigen::Matrix3d inv_root = sym_power(s, -0.5);
    return inv_root * sym_power(root * t * root, 0.5) * inv_root;
}

Eigen::Matrix3d composite(const DncmParams& params, const ColorTransform& t)
{
    if (t.k() != params.k || t.T.cols() != params.k)
        throw InputError("colour transform is " + std::to_string(t.T.rows()) + "x" + std::to_string(t.T.cols()) +
                         " but the embedding has k = " + std::to_string(params.k));
    return params.P * t.T * params.Q;
}

std::vector<double> flatten(const Eigen::MatrixXd& m)
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            out.push_back(m(r, c));
    return out;
}

Eigen::MatrixXd unflatten(const nlohmann::json& array, Eigen::Index rows, Eigen::Index cols, const char* name)
{
    if (!array.is_array() || array.size() != static_cast<std::size_t>(rows * cols))
        throw InputError(std::string("field \"") + name + "\" must be an array of " +
                         std::to_string(rows * cols) + " numbers");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = array.at(static_cast<std::size_t>(r * cols + c)).get<double>();
    return m;
}

nlohmann::json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

int read_k(const nlohmann::json& j)
{
    if (!j.contains("k") || !j["k"].is_number_integer())
        throw InputError("missing integer field \"k\"");
    return j["k"].get<int>();
}

} // namespace

DncmParams DncmParams::identity(int k)
{
    if (k < 3)
        throw InputError("embedding dimension k must be >= 3");
    DncmParams p;
    p.k = k;
    p.P = Eigen::MatrixXd::Zero(3, k);
    p.Q = Eigen::MatrixXd::Zero(k, 3);
    p.P.leftCols(3).setIdentity();
    p.Q.topRows(3).setIdentity();
    return p;
}

void DncmParams::validate() const
{
    if (k < 3)
        throw InputError("embedding dimension k must be >= 3");
    if (P.rows() != 3 || P.cols() != k || Q.rows() != k || Q.cols() != 3)
        throw InputError("P must be 3xk and Q kx3");
    if (!P.allFinite() || !Q.allFinite())
        throw InputError("DNCM matrices contain non-finite values");
}

ColorTransform ColorTransform::identity(int k)
{
    return {Eigen::MatrixXd::Identity(k, k), false};
}

Image thumbnail(const Image& img, int size)
{
    if (img.empty())
        throw InputError("cannot thumbnail an empty image");
    if (size <= 0)
        throw InputError("thumbnail size must be positive");

    // Per-axis area weights: output cell o covers [o*n/size, (o+1)*n/size).
    struct Span {
        int first;
        std::vector<double> weights;
    };
    auto spans = [size](int n) {
        std::vector<Span> out(static_cast<std::size_t>(size));
        const double scale = static_cast<double>(n) / size;
        for (int o = 0; o < size; ++o) {
            const double lo = o * scale;
            const double hi = (o + 1) * scale;
            Span s{static_cast<int>(std::floor(lo)), {}};
            const int last = std::min(n - 1, static_cast<int>(std::ceil(hi)) - 1);
            double total = 0.0;
            for (int i = s.first; i <= last; ++i) {
                const double w = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
                s.weights.push_back(std::max(w, 0.0));
                total += s.weights.back();
            }
            for (double& w : s.weights)
                w /= total;
            out[static_cast<std::size_t>(o)] = std::move(s);
        }
        return out;
    };

    const Image src = img.to_f32();
    const auto xs = spans(src.width());
    const auto ys = spans(src.height());
    Image out(size, size, PixelFormat::f32);
    for (int oy = 0; oy < size; ++oy) {
        const Span& sy = ys[static_cast<std::size_t>(oy)];
        for (int ox = 0; ox < size; ++ox) {
            const Span& sx = xs[static_cast<std::size_t>(ox)];
            Rgb acc{0.0, 0.0, 0.0};
            for (std::size_t a = 0; a < sy.weights.size(); ++a) {
                for (std::size_t b = 0; b < sx.weights.size(); ++b) {
                    const double w = sy.weights[a] * sx.weights[b];
                    const Rgb p = src.pixel(sx.first + static_cast<int>(b), sy.first + static_cast<int>(a));
                    for (int c = 0; c < 3; ++c)
                        acc[c] += w * p[c];
                }
            }
            out.set_pixel(ox, oy, acc);
        }
    }
    return out;
}

ColorStats compute_stats(const Image& img, int thumb)
{
    const PixelMatrix px = pixel_matrix(thumbnail(img, thumb));
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
    accumulate(px, sum, outer);
    return finish_stats(sum, outer, static_cast<double>(px.rows()), thumb);
}

ColorStats pooled_stats(std::span<const Image> images, int thumb)
{
    if (images.empty())
        throw InputError("no images to pool statistics from");
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
    double n = 0.0;
    for (const Image& img : images) {
        const PixelMatrix px = pixel_matrix(thumbnail(img, thumb));
        accumulate(px, sum, outer);
        n += static_cast<double>(px.rows());
    }
    return finish_stats(sum, outer, n, thumb);
}

Image apply_dncm(const Image& img, const DncmParams& params, const ColorTransform& t)
{
    params.validate();
    const Eigen::Matrix3d w = composite(params, t);
    const Image src = img.to_f32();
    Image out(src.width(), src.height(), PixelFormat::f32);
    const auto in = src.f32();
    auto dst = out.f32();
    for (std::size_t k = 0; k < src.pixel_count(); ++k) {
        const double r = in[k * 3 + 0];
        const double g = in[k * 3 + 1];
        const double b = in[k * 3 + 2];
        for (int c = 0; c < 3; ++c) {
            const double v = r * w(0, c) + g * w(1, c) + b * w(2, c);
            dst[k * 3 + c] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return out;
}

ColorTransform fit_to_stats(const Image& content, const ColorStats& target, const DncmParams& params,
                            const FitOptions& opts)
{
    params.validate();
    if (content.empty())
        throw InputError("content image is empty");
    if (!(opts.ridge > 0.0))
        throw InputError("ridge must be > 0");
    if (!target.mean.allFinite() || !target.covariance.allFinite())
        throw InputError("target colour statistics are not finite");

    const PixelMatrix c = pixel_matrix(thumbnail(content, opts.thumb));
    const auto n = c.rows();
    const Eigen::RowVector3d mu_c = c.colwise().mean();
    const PixelMatrix centred = c.rowwise() - mu_c;
    const Eigen::Matrix3d cov_c = centred.transpose() * centred / static_cast<double>(n);
    const Eigen::RowVector3d mu_t = target.mean.transpose();

    ColorTransform result;
    result.degenerate = cov_c.trace() < degenerate_variance;

    PixelMatrix y(n, 3);
    if (result.degenerate)
        y.rowwise() = mu_t;
    else
        y = (centred * monge_map(cov_c, target.covariance)).rowwise() + mu_t;

    // Ridge least squares X M ~ Y with the mean row pinned: mean(X) M = mean(Y).
    const Eigen::MatrixXd x = c * params.P;
    const Eigen::MatrixXd gram = x.transpose() * x + opts.ridge * Eigen::MatrixXd::Identity(params.k, params.k);
    const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    Eigen::MatrixXd m = solver.solve(x.transpose() * y);
    const Eigen::VectorXd a = (mu_c * params.P).transpose();
    const Eigen::VectorXd g = solver.solve(a);
    const double s = a.dot(g);
    if (s > 0.0) {
        const Eigen::RowVector3d gap = mu_t - a.transpose() * m;
        m += g * gap / s;
    } else {
        result.degenerate = true; // black content: no linear map can move the mean
    }

    const Eigen::MatrixXd q_pinv = params.Q.completeOrthogonalDecomposition().pseudoInverse();
    result.T = m * q_pinv;
    return result;
}

ColorTransform fit_style_transform(const Image& content, const Image& reference, const DncmParams& params,
                                   const FitOptions& opts)
{
    if (reference.empty())
        throw InputError("reference image is empty");
    return fit_to_stats(content, compute_stats(reference, opts.thumb), params, opts);
}

Image normalize_content(const Image& img, const ColorStats& canonical, const DncmParams& params,
                        const FitOptions& opts)
{
    return apply_dncm(img, params, fit_to_stats(img, canonical, params, opts));
}

Image relight(const Image& i0, const Image& reference, const ColorStats& canonical, const DncmParams& params,
              const FitOptions& opts)
{
    const Image content = normalize_content(i0, canonical, params, opts);
    return apply_dncm(content, params, fit_style_transform(content, reference, params, opts));
}

DncmParams load_dncm_params(const std::filesystem::path& path)
{
    const auto j = read_json(path);
    DncmParams p;
    p.k = read_k(j);
    if (p.k < 3)
        throw InputError("embedding dimension k must be >= 3");
    p.P = unflatten(j.value("P", nlohmann::json()), 3, p.k, "P");
    p.Q = unflatten(j.value("Q", nlohmann::json()), p.k, 3, "Q");
    p.validate();
    return p;
}

void save_dncm_params(const std::filesystem::path& path, const DncmParams& params)
{
    params.validate();
    write_json(path, {{"k", params.k}, {"P", flatten(params.P)}, {"Q", flatten(params.Q)}});
}

ColorTransform load_color_transform(const std::filesystem::path& path)
{
    const auto j = read_json(path);
    const int k = read_k(j);
    ColorTransform t;
    t.T = unflatten(j.value("T", nlohmann::json()), k, k, "T");
    if (!t.T.allFinite())
        throw InputError("colour transform contains non-finite values");
    return t;
}

void save_color_transform(const std::filesystem::path& path, const ColorTransform& t)
{
    write_json(path, {{"k", t.k()}, {"T", flatten(t.T)}});
}

ColorStats load_color_stats(const std::filesystem::path& path)
{
    const auto j = read_json(path);
    ColorStats s;
    s.thumb = j.value("thumb", 64);
    s.mean = unflatten(j.value("mean", nlohmann::json()), 3, 1, "mean");
    s.covariance = unflatten(j.value("covariance", nlohmann::json()), 3, 3, "covariance");
    if (!s.mean.allFinite() || !s.covariance.allFinite())
        throw InputError("colour statistics contain non-finite values");
    return s;
}

void save_color_stats(const std::filesystem::path& path, const ColorStats& stats)
{
    write_json(path, {{"thumb", stats.thumb},
                      {"mean", flatten(stats.mean)},
                      {"covariance", flatten(stats.covariance)}});
}

} // namespace cbev

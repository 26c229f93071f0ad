#include "cbev/metrics.hpp"

#include "cbev/dataset.hpp"
#include "cbev/error.hpp"
#include "cbev/image_io.hpp"
#include "cbev/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

namespace cbev {

namespace {

constexpr int window = 11;
constexpr double window_sigma = 1.5;
constexpr double k1 = 0.01;
constexpr double k2 = 0.03;

std::pair<Image, Image> common_format(const Image& a, const Image& b)
{
    if (a.width() != b.width() || a.height() != b.height())
        throw InputError("image sizes differ: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                         " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
    if (a.format() == b.format())
        return {a, b};
    return {a.to_f32(), b.to_f32()};
}

std::array<double, window> gaussian_kernel()
{
    std::array<double, window> k{};
    double sum = 0.0;
    for (int i = 0; i < window; ++i) {
        const double d = i - window / 2;
        k[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * window_sigma * window_sigma));
        sum += k[static_cast<std::size_t>(i)];
    }
    for (double& v : k)
        v /= sum;
    return k;
}

/// Separable filtering restricted to the region where the window fits.
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h, const std::array<double, window>& k)
{
    const int ow = w - window + 1;
    const int oh = h - window + 1;
    std::vector<double> rows(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int t = 0; t < window; ++t)
                acc += k[static_cast<std::size_t>(t)] * src[static_cast<std::size_t>(y) * w + x + t];
            rows[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int t = 0; t < window; ++t)
                acc += k[static_cast<std::size_t>(t)] * rows[static_cast<std::size_t>(y + t) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    return out;
}

double ssim_channel(const Image& a, const Image& b, int c, const std::array<double, window>& k)
{
    const int w = a.width();
    const int h = a.height();
    const std::size_t n = a.pixel_count();
    std::vector<double> pa(n), pb(n), aa(n), bb(n), ab(n);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            pa[i] = a.get(x, y, c);
            pb[i] = b.get(x, y, c);
            aa[i] = pa[i] * pa[i];
            bb[i] = pb[i] * pb[i];
            ab[i] = pa[i] * pb[i];
        }
    const auto mu_a = filter_valid(pa, w, h, k);
    const auto mu_b = filter_valid(pb, w, h, k);
    const auto e_aa = filter_valid(aa, w, h, k);
    const auto e_bb = filter_valid(bb, w, h, k);
    const auto e_ab = filter_valid(ab, w, h, k);

    const double range = a.peak();
    const double c1 = (k1 * range) * (k1 * range);
    const double c2 = (k2 * range) * (k2 * range);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double var_a = e_aa[i] - ma * ma;
        const double var_b = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
    }
    return sum / static_cast<double>(mu_a.size());
}

std::optional<std::filesystem::path> find_generated(const std::filesystem::path& dir, const std::string& id)
{
    for (const char* ext : {".png", ".jpg", ".jpeg"}) {
        auto candidate = dir / (id + ext);
        if (std::filesystem::is_regular_file(candidate))
            return candidate;
    }
    return std::nullopt;
}

nlohmann::json number_or_inf(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (std::isnan(v))
        return nullptr;
    return v;
}

} // namespace

double mse(const Image& a, const Image& b)
{
    const auto [x, y] = common_format(a, b);
    double sum = 0.0;
    for (int r = 0; r < x.height(); ++r)
        for (int col = 0; col < x.width(); ++col)
            for (int c = 0; c < 3; ++c) {
                const double d = x.get(col, r, c) - y.get(col, r, c);
                sum += d * d;
            }
    return sum / (static_cast<double>(x.pixel_count()) * 3.0);
}

double psnr(const Image& a, const Image& b, double peak)
{
    if (!(peak > 0.0))
        throw InputError("PSNR peak must be positive");
    const double e = mse(a, b);
    if (e == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / e);
}

double psnr(const Image& a, const Image& b)
{
    const auto [x, y] = common_format(a, b);
    return psnr(x, y, x.peak());
}

double ssim(const Image& a, const Image& b)
{
    const auto [x, y] = common_format(a, b);
    if (x.width() < window || x.height() < window)
        throw InputError("SSIM needs images of at least 11x11, got " + std::to_string(x.width()) + "x" +
                         std::to_string(x.height()));
    const auto k = gaussian_kernel();
    double sum = 0.0;
    for (int c = 0; c < 3; ++c)
        sum += ssim_channel(x, y, c, k);
    return sum / 3.0;
}

void aggregate(EvalReport& report)
{
    if (report.pairs.empty()) {
        report.mean_ssim = report.mean_psnr = report.mean_mse = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    double s = 0.0;
    double p = 0.0;
    double m = 0.0;
    for (const auto& pair : report.pairs) {
        s += pair.ssim;
        p += pair.psnr;
        m += pair.mse;
    }
    const auto n = static_cast<double>(report.pairs.size());
    report.mean_ssim = s / n;
    report.mean_psnr = p / n;
    report.mean_mse = m / n;
}

nlohmann::json EvalReport::to_json() const
{
    nlohmann::json pair_list = nlohmann::json::array();
    for (const auto& p : pairs)
        pair_list.push_back({{"id", p.id}, {"ssim", p.ssim}, {"psnr", number_or_inf(p.psnr)}, {"mse", p.mse}});
    nlohmann::json j;
    j["pairs"] = std::move(pair_list);
    j["mean_ssim"] = number_or_inf(mean_ssim);
    j["mean_psnr"] = number_or_inf(mean_psnr);
    j["mean_mse"] = number_or_inf(mean_mse);
    j["skipped"] = skipped;
    j["count"] = pairs.size();
    j["generated_dir"] = generated_dir;
    j["psnr_cap"] = psnr_cap ? nlohmann::json(*psnr_cap) : nlohmann::json(nullptr);
    // Filled by external tooling with pretrained networks.
    j["mean_fid"] = nullptr;
    j["mean_lpips"] = nullptr;
    return j;
}

EvalReport evaluate_pairs(std::span<const ManifestEntry> entries, const std::filesystem::path& manifest_dir,
                          const std::filesystem::path& generated_dir, const EvalOptions& opts)
{
    if (entries.empty())
        throw InputError("manifest has no entries to evaluate");

    std::vector<std::optional<PairMetrics>> results(entries.size());
    parallel_for(entries.size(), opts.threads, [&](std::size_t i) {
        const ManifestEntry& e = entries[i];
        const auto generated = find_generated(generated_dir, e.id);
        if (!generated)
            return;
        try {
            const std::filesystem::path truth_path = std::filesystem::path(e.sat_path).is_absolute()
                                                         ? std::filesystem::path(e.sat_path)
                                                         : manifest_dir / e.sat_path;
            const Image truth = read_image(truth_path);
            const Image gen = read_image(*generated);
            PairMetrics m{e.id, ssim(gen, truth), psnr(gen, truth, 255.0), mse(gen, truth)};
            if (opts.psnr_cap)
                m.psnr = std::min(m.psnr, *opts.psnr_cap);
            results[i] = m;
        } catch (const std::exception&) {
            // reported through `skipped`
        }
    });

    EvalReport report;
    report.generated_dir = generated_dir.string();
    report.psnr_cap = opts.psnr_cap;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (results[i])
            report.pairs.push_back(*results[i]);
        else
            report.skipped.push_back(entries[i].id);
    }
    aggregate(report);
    return report;
}

} // namespace cbev

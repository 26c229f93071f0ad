// Single-thread throughput of the precomputed-table BEV remap.
#include "cbev/dataset.hpp"
#include "cbev/geometry.hpp"
#include "support/synthetic.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"BEV remap throughput benchmark", "cbev_bench"};
    int iterations = 200;
    std::string profile = "cvusa";
    double min_rate = 0.0;
    app.add_option("-n,--iterations", iterations, "Timed remaps")->check(CLI::PositiveNumber);
    app.add_option("--profile", profile, "Dataset profile")->check(CLI::IsMember({"cvusa", "cvact", "vigor"}));
    app.add_option("--min-rate", min_rate, "Exit 1 when remaps/second falls below this");
    CLI11_PARSE(app, argc, argv);

    using clock = std::chrono::steady_clock;
    const cbev::BevConfig cfg = cbev::profile_config(cbev::parse_profile(profile));
    const auto t0 = clock::now();
    const cbev::RemapTable table = cbev::build_remap_table(cfg);
    const double build_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();

    const cbev::Image pano = cbev::testing::synthetic_panorama(1, cfg.pano_width, cfg.pano_height);
    std::uint64_t checksum = 0;
    for (int k = 0; k < 5; ++k)
        checksum += cbev::apply_remap(pano, table).u8()[0];

    const auto t1 = clock::now();
    for (int k = 0; k < iterations; ++k)
        checksum += cbev::apply_remap(pano, table).u8()[static_cast<std::size_t>(k) % 3];
    const double seconds = std::chrono::duration<double>(clock::now() - t1).count();
    const double rate = iterations / seconds;

    std::cout << "profile            " << profile << '\n'
              << "panorama           " << cfg.pano_width << "x" << cfg.pano_height << '\n'
              << "canvas             " << cfg.grid_size << "x" << cfg.grid_size << '\n'
              << "table build        " << build_ms << " ms\n"
              << "remaps             " << iterations << " in " << seconds << " s\n"
              << "per remap          " << 1000.0 * seconds / iterations << " ms\n"
              << "throughput         " << rate << " remaps/s (single thread)\n"
              << "checksum           " << checksum << '\n';
    if (min_rate > 0.0 && rate < min_rate) {
        std::cerr << "throughput below " << min_rate << " remaps/s\n";
        return 1;
    }
    return 0;
}

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hcad/core/binary_io.hpp"
#include "hcad/core/image.hpp"
#include "hcad/core/manifest.hpp"
#include "hcad/core/netpbm.hpp"
#include "hcad/core/random.hpp"
#include "hcad/core/text.hpp"
#include "hcad/core/track_log.hpp"

namespace hcad::pipeline {

struct FixtureOptions {
    int videos_per_class = 5;
    int min_frames = 10;
    int max_frames = 20;
    int height = 48;
    int width = 64;
    std::uint64_t seed = 7;
};

struct FixturePaths {
    std::filesystem::path root;
    std::filesystem::path manifest;
    std::filesystem::path config;
    std::filesystem::path output_root;
};

namespace detail {

struct ClassLook {
    std::array<int, 3> color;
    double vx, vy;  // pixels per frame
};

/// Each class gets its own foreground colour and motion; the background is
/// class-independent noise.
inline ClassLook class_look(std::size_t c) {
    static const ClassLook looks[] = {
        {{200, 200, 200}, 0.5, 0.0},   // Normal: slow walk
        {{220, 40, 40}, 1.5, 0.5},     // Burglary
        {{40, 220, 40}, -1.5, 0.0},    // Fighting
        {{240, 140, 0}, 0.0, 1.0},     // Arson
        {{40, 80, 240}, 2.0, -0.5},    // Explosion
    };
    return looks[c % 5];
}

}  // namespace detail

/// Writes a small labelled corpus: frames, raw person detections (track id -1),
/// a manifest and a pipeline config sized for quick runs.
inline FixturePaths make_fixture(const std::filesystem::path& dir, const FixtureOptions& opt = {},
                                 const ClassSet& classes = ClassSet::defaults()) {
    namespace fs = std::filesystem;
    FixturePaths paths{fs::absolute(dir).lexically_normal(), {}, {}, {}};
    paths.manifest = paths.root / "manifest.csv";
    paths.config = paths.root / "config.txt";
    paths.output_root = paths.root / "out";

    Rng rng(opt.seed);
    DatasetManifest manifest;
    manifest.classes = classes;
    const int bw = std::max(4, opt.width / 5), bh = std::max(6, opt.height * 2 / 5);
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const auto look = detail::class_look(c);
        std::string lower = classes.label(c);
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
        for (int v = 0; v < opt.videos_per_class; ++v) {
            const std::string id = lower + "_" + text::format("%02d", v);
            const int n = opt.min_frames + static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.max_frames - opt.min_frames + 1)));
            double x = 4.0 + rng.uniform() * (opt.width - bw - 8), y = 2.0 + rng.uniform() * (opt.height - bh - 4);
            const double shade = 0.85 + 0.3 * rng.uniform();
            std::vector<TrackRecord> dets;
            for (int f = 0; f < n; ++f) {
                Image8 img(opt.height, opt.width, 3);
                for (int r = 0; r < opt.height; ++r) {
                    for (int col = 0; col < opt.width; ++col) {
                        const auto base = static_cast<int>(60 + 40 * ((r / 4 + col / 4) % 2) + rng.below(30));
                        for (int k = 0; k < 3; ++k) img.at(r, col, k) = static_cast<std::uint8_t>(base);
                    }
                }
                x = std::clamp(x + look.vx, 0.0, static_cast<double>(opt.width - bw));
                y = std::clamp(y + look.vy, 0.0, static_cast<double>(opt.height - bh));
                const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
                for (int r = y0; r < y0 + bh; ++r) {
                    for (int col = x0; col < x0 + bw; ++col) {
                        for (int k = 0; k < 3; ++k) {
                            img.at(r, col, k) = saturate_cast<std::uint8_t>(look.color[static_cast<std::size_t>(k)] * shade);
                        }
                    }
                }
                netpbm::write(paths.root / "frames" / id / netpbm::frame_name(static_cast<std::size_t>(f), 3), img);
                const double jx = rng.uniform() - 0.5, jy = rng.uniform() - 0.5;
                dets.push_back({f, -1, {x0 + jx, y0 + jy, static_cast<double>(bw), static_cast<double>(bh)},
                                0.8 + 0.15 * rng.uniform()});
                if (rng.uniform() < 0.2) {
                    dets.push_back({f, -1,
                                    {rng.uniform() * (opt.width - 8), rng.uniform() * (opt.height - 8), 6.0, 6.0},
                                    0.15 + 0.2 * rng.uniform()});
                }
            }
            write_track_log(paths.root / "detections" / (id + ".txt"), dets);
            manifest.entries.push_back({id, classes.label(c), "frames/" + id, std::nullopt});
        }
    }
    save_manifest(paths.manifest, manifest);

    std::string classes_line;
    for (const auto& l : classes.labels()) classes_line += (classes_line.empty() ? "" : ",") + l;
    const std::string config =
        "# synthetic fixture\n"
        "manifest = " + paths.manifest.generic_string() + "\n"
        "detections_root = " + (paths.root / "detections").generic_string() + "\n"
        "output_root = " + paths.output_root.generic_string() + "\n"
        "classes = " + classes_line + "\n"
        "seed = " + std::to_string(opt.seed) + "\n"
        "suppress.margin = 4\n"
        "suppress.kernel_size = 7\n"
        "sample.clip_length = 16\n"
        "sample.height = 32\n"
        "sample.width = 32\n"
        "extract.adapter = mock\n"
        "extract.dim = 2048\n"
        "model.units1 = 32\n"
        "model.units2 = 16\n"
        "train.learning_rate = 0.001\n"
        "train.batch_size = 8\n"
        "train.max_epochs = 40\n"
        "trials.count = 3\n";
    io::write_file_atomic(paths.config, config);
    return paths;
}

}  // namespace hcad::pipeline

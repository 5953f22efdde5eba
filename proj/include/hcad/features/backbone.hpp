#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hcad/core/error.hpp"
#include "hcad/core/image.hpp"
#include "hcad/core/random.hpp"

namespace hcad::features {

/// Frame -> D-vector embedding. Implementations must be deterministic and keep
/// output_dim() fixed. Instances are not shared across threads.
class BackboneAdapter {
public:
    virtual ~BackboneAdapter() = default;
    virtual std::string name() const = 0;
    virtual std::size_t output_dim() const = 0;
    virtual std::vector<float> evaluate(const ImageF& frame) = 0;
};

/// Mean intensity over all pixels and channels, replicated D times.
class MeanIntensityAdapter final : public BackboneAdapter {
public:
    explicit MeanIntensityAdapter(std::size_t dim = 2048) : dim_(dim) {}

    std::string name() const override { return "mean-intensity"; }
    std::size_t output_dim() const override { return dim_; }

    std::vector<float> evaluate(const ImageF& frame) override {
        double sum = 0.0;
        for (double v : frame.pixels()) sum += v;
        return std::vector<float>(dim_, static_cast<float>(sum / static_cast<double>(frame.pixels().size())));
    }

private:
    std::size_t dim_;
};

/// Deterministic stand-in for a pretrained CNN: pooled intensity statistics
/// (per-channel mean and standard deviation plus a 4x4 grid of per-channel
/// means) projected to D dimensions by a fixed seeded Gaussian matrix.
class ProjectedStatsAdapter final : public BackboneAdapter {
public:
    static constexpr int kGrid = 4;
    static constexpr std::size_t kStats = 3 * 2 + kGrid * kGrid * 3;

    explicit ProjectedStatsAdapter(std::size_t dim = 2048, std::uint64_t seed = 20240917) : dim_(dim) {
        Rng rng(seed);
        const double scale = 1.0 / std::sqrt(static_cast<double>(kStats));
        projection_.resize(dim_ * kStats);
        for (auto& v : projection_) v = scale * rng.normal();
    }

    std::string name() const override { return "mock"; }
    std::size_t output_dim() const override { return dim_; }

    std::vector<float> evaluate(const ImageF& frame) override {
        const auto stats = pooled_stats(frame);
        std::vector<float> out(dim_);
        for (std::size_t d = 0; d < dim_; ++d) {
            double acc = 0.0;
            for (std::size_t k = 0; k < kStats; ++k) acc += projection_[d * kStats + k] * stats[k];
            out[d] = static_cast<float>(acc);
        }
        return out;
    }

    static std::vector<double> pooled_stats(const ImageF& frame) {
        if (frame.channels() != 3) throw Error(ErrorKind::Validation, "mock backbone expects 3-channel frames");
        std::vector<double> s(kStats, 0.0);
        const int hgt = frame.height(), wid = frame.width();
        const double n = static_cast<double>(hgt) * wid;
        std::vector<double> cell_count(kGrid * kGrid, 0.0);
        for (int r = 0; r < hgt; ++r) {
            const int gy = r * kGrid / hgt;
            for (int c = 0; c < wid; ++c) {
                const int gx = c * kGrid / wid;
                const int cell = gy * kGrid + gx;
                cell_count[static_cast<std::size_t>(cell)] += 1.0;
                for (int k = 0; k < 3; ++k) {
                    const double v = frame.at(r, c, k);
                    s[static_cast<std::size_t>(k)] += v;
                    s[static_cast<std::size_t>(3 + k)] += v * v;
                    s[static_cast<std::size_t>(6 + cell * 3 + k)] += v;
                }
            }
        }
        for (int k = 0; k < 3; ++k) {
            const double mean = s[static_cast<std::size_t>(k)] / n;
            const double var = std::max(0.0, s[static_cast<std::size_t>(3 + k)] / n - mean * mean);
            s[static_cast<std::size_t>(k)] = mean;
            s[static_cast<std::size_t>(3 + k)] = std::sqrt(var);
        }
        for (int cell = 0; cell < kGrid * kGrid; ++cell) {
            const double cnt = std::max(1.0, cell_count[static_cast<std::size_t>(cell)]);
            for (int k = 0; k < 3; ++k) s[static_cast<std::size_t>(6 + cell * 3 + k)] /= cnt;
        }
        return s;
    }

private:
    std::size_t dim_;
    std::vector<double> projection_;
};

/// Adapter factory behind the `--adapter` flag.
inline std::unique_ptr<BackboneAdapter> make_adapter(const std::string& name, std::size_t dim, std::uint64_t seed) {
    if (name == "mock") return std::make_unique<ProjectedStatsAdapter>(dim, seed);
    if (name == "mean-intensity") return std::make_unique<MeanIntensityAdapter>(dim);
    if (name == "onnx-export") {
        throw Error(ErrorKind::MissingDependency,
                    "adapter 'onnx-export' needs a neural runtime, which this build does not link; use 'mock'");
    }
    throw Error(ErrorKind::Config, "unknown backbone adapter: " + name);
}

}  // namespace hcad::features

#pragma once

#include <cmath>
#include <vector>

#include "hcad/core/error.hpp"
#include "hcad/core/image.hpp"

namespace hcad::suppress {

/// Sigma used when the caller passes sigma <= 0: the common kernel-size rule
/// 0.3 * ((k - 1) * 0.5 - 1) + 0.8, evaluated as (3 (k - 3) + 16) / 20 so the
/// result is correctly rounded (exactly 8.0 for k = 51).
inline double derived_sigma(int kernel_size) { return (3.0 * (kernel_size - 3) + 16.0) / 20.0; }

/// Sampled 1-D Gaussian normalized to unit sum.
inline std::vector<double> gaussian_kernel(int kernel_size, double sigma) {
    if (kernel_size < 1 || kernel_size % 2 == 0) {
        throw Error(ErrorKind::Config, "gaussian kernel size must be odd and >= 1, got " + std::to_string(kernel_size));
    }
    if (sigma < 0.0) throw Error(ErrorKind::Config, "gaussian sigma must be >= 0");
    if (kernel_size == 1) return {1.0};
    const double s = sigma > 0.0 ? sigma : derived_sigma(kernel_size);
    const int radius = kernel_size / 2;
    std::vector<double> k(static_cast<std::size_t>(kernel_size));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(i * i) / (2.0 * s * s));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& v : k) v /= sum;
    return k;
}

/// Reflect-101 index mapping (`gfedcb|abcdefgh|gfedcba`), valid for any offset.
inline int reflect101(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

/// Separable Gaussian blur: horizontal pass then vertical pass, per channel,
/// reflect-101 borders, double-precision accumulation.
template <class Pixel>
Image<Pixel> gaussian_blur(const Image<Pixel>& src, int kernel_size, double sigma) {
    const auto k = gaussian_kernel(kernel_size, sigma);
    const int r = kernel_size / 2;
    const int hgt = src.height(), wid = src.width(), ch = src.channels();

    std::vector<double> tmp(static_cast<std::size_t>(hgt) * wid * ch);
    auto tmp_at = [&](int y, int x, int c) -> double& {
        return tmp[(static_cast<std::size_t>(y) * wid + x) * ch + c];
    };
    for (int y = 0; y < hgt; ++y) {
        for (int x = 0; x < wid; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int t = -r; t <= r; ++t) acc += k[t + r] * static_cast<double>(src.at(y, reflect101(x + t, wid), c));
                tmp_at(y, x, c) = acc;
            }
        }
    }
    Image<Pixel> out(hgt, wid, ch);
    for (int y = 0; y < hgt; ++y) {
        for (int x = 0; x < wid; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int t = -r; t <= r; ++t) acc += k[t + r] * tmp_at(reflect101(y + t, hgt), x, c);
                out.at(y, x, c) = saturate_cast<Pixel>(acc);
            }
        }
    }
    return out;
}

}  // namespace hcad::suppress

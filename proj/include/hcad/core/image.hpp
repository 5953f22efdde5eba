#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "hcad/core/error.hpp"
#include "hcad/core/types.hpp"

namespace hcad {

/// Interleaved H x W x C pixel grid. `Pixel` is either an 8-bit integer or a
/// floating-point type; intermediate filtering always runs in double.
template <class Pixel>
class Image {
public:
    using value_type = Pixel;

    Image() = default;

    Image(int height, int width, int channels, Pixel fill = Pixel{})
        : height_(height), width_(width), channels_(channels) {
        if (height <= 0 || width <= 0 || channels <= 0) {
            throw Error(ErrorKind::Validation, "image dimensions must be positive");
        }
        data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
    }

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    FrameSize size() const { return {height_, width_}; }
    bool empty() const { return data_.empty(); }

    Pixel& at(int row, int col, int ch) { return data_[index(row, col, ch)]; }
    const Pixel& at(int row, int col, int ch) const { return data_[index(row, col, ch)]; }

    std::span<Pixel> pixels() { return data_; }
    std::span<const Pixel> pixels() const { return data_; }

    bool same_shape(const auto& other) const {
        return height_ == other.height() && width_ == other.width() && channels_ == other.channels();
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int row, int col, int ch) const {
        return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<Pixel> data_;
};

using Image8 = Image<std::uint8_t>;
using ImageF = Image<double>;

/// Converts a double-precision intensity into `Pixel`. Integral targets round
/// half away from zero and saturate, which is the usual image-library behavior.
template <class Pixel>
Pixel saturate_cast(double v) {
    if constexpr (std::is_floating_point_v<Pixel>) {
        return static_cast<Pixel>(v);
    } else {
        const double r = std::round(v);
        const double lo = static_cast<double>(std::numeric_limits<Pixel>::min());
        const double hi = static_cast<double>(std::numeric_limits<Pixel>::max());
        return static_cast<Pixel>(std::clamp(r, lo, hi));
    }
}

template <class To, class From>
Image<To> convert_image(const Image<From>& src) {
    Image<To> out(src.height(), src.width(), src.channels());
    auto in = src.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < in.size(); ++i) dst[i] = saturate_cast<To>(static_cast<double>(in[i]));
    return out;
}

}  // namespace hcad

#pragma once

#include <cmath>
#include <vector>

#include "hcad/core/error.hpp"
#include "hcad/core/image.hpp"
#include "hcad/core/types.hpp"
#include "hcad/suppress/gaussian.hpp"

namespace hcad::suppress {

struct SuppressionParams {
    int margin = 30;
    int kernel_size = 51;
    double sigma = 0.0;  // 0 derives sigma from kernel_size

    void validate() const {
        if (margin < 0) throw Error(ErrorKind::Config, "margin must be >= 0");
        if (kernel_size < 1 || kernel_size % 2 == 0) throw Error(ErrorKind::Config, "kernel size must be odd and >= 1");
        if (sigma < 0.0) throw Error(ErrorKind::Config, "sigma must be >= 0");
    }
};

/// Row-major H x W grid of {0,1}.
class BinaryMask {
public:
    BinaryMask(int height, int width) : height_(height), width_(width), data_(static_cast<std::size_t>(height) * width, 0) {}

    int height() const { return height_; }
    int width() const { return width_; }
    std::uint8_t at(int row, int col) const { return data_[static_cast<std::size_t>(row) * width_ + col]; }
    void set(int row, int col) { data_[static_cast<std::size_t>(row) * width_ + col] = 1; }
    std::size_t count() const {
        std::size_t n = 0;
        for (auto v : data_) n += v;
        return n;
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    int height_;
    int width_;
    std::vector<std::uint8_t> data_;
};

/// Grows the box by `margin` on every side and clips it to the frame.
inline BoundingBox expand_box(const BoundingBox& b, int margin, FrameSize frame) {
    const double m = margin;
    return clamp_box({b.x - m, b.y - m, b.w + 2 * m, b.h + 2 * m}, frame);
}

/// A pixel belongs to a box when the box overlaps any part of it; for integer
/// boxes this is exactly rows [y, y+h) x cols [x, x+w).
inline BinaryMask build_mask(const std::vector<BoundingBox>& boxes, FrameSize frame) {
    BinaryMask mask(frame.height, frame.width);
    for (const auto& raw : boxes) {
        const auto b = clamp_box(raw, frame);
        if (!b.valid()) continue;
        const int x0 = static_cast<int>(std::floor(b.x));
        const int y0 = static_cast<int>(std::floor(b.y));
        const int x1 = std::min(frame.width, static_cast<int>(std::ceil(b.right())));
        const int y1 = std::min(frame.height, static_cast<int>(std::ceil(b.bottom())));
        for (int r = y0; r < y1; ++r) {
            for (int c = x0; c < x1; ++c) mask.set(r, c);
        }
    }
    return mask;
}

template <class Pixel>
Image<Pixel> blur_frame(const Image<Pixel>& frame, const SuppressionParams& p) {
    return gaussian_blur(frame, p.kernel_size, p.sigma);
}

/// Hard composition: source pixel where the mask is set, blurred pixel elsewhere.
template <class Pixel>
Image<Pixel> compose_suppressed_frame(const Image<Pixel>& source, const BinaryMask& mask, const Image<Pixel>& blurred) {
    if (!source.same_shape(blurred) || mask.height() != source.height() || mask.width() != source.width()) {
        throw Error(ErrorKind::Validation, "compose: frame, mask and blurred frame dimensions differ");
    }
    Image<Pixel> out = blurred;
    for (int r = 0; r < source.height(); ++r) {
        for (int c = 0; c < source.width(); ++c) {
            if (!mask.at(r, c)) continue;
            for (int k = 0; k < source.channels(); ++k) out.at(r, c, k) = source.at(r, c, k);
        }
    }
    return out;
}

/// Expanded boxes for one frame's records.
inline std::vector<BoundingBox> frame_boxes(const std::vector<TrackRecord>& log, std::int64_t frame_index,
                                            int margin, FrameSize frame) {
    std::vector<BoundingBox> boxes;
    for (const auto& r : log) {
        if (r.frame_index != frame_index) continue;
        auto e = expand_box(r.box, margin, frame);
        if (e.valid()) boxes.push_back(e);
    }
    return boxes;
}

template <class Pixel>
Image<Pixel> suppress_frame(const Image<Pixel>& frame, const std::vector<BoundingBox>& expanded_boxes,
                            const SuppressionParams& p) {
    const auto mask = build_mask(expanded_boxes, frame.size());
    // A fully masked frame never reads the blurred copy.
    if (mask.count() == static_cast<std::size_t>(frame.height()) * frame.width()) return frame;
    return compose_suppressed_frame(frame, mask, blur_frame(frame, p));
}

/// Every logged record (any track id) contributes a box to its frame; frames
/// without records come out fully blurred.
template <class Pixel>
std::vector<Image<Pixel>> suppress_video(const std::vector<Image<Pixel>>& frames, const std::vector<TrackRecord>& log,
                                         const SuppressionParams& p) {
    p.validate();
    std::vector<Image<Pixel>> out;
    out.reserve(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto boxes = frame_boxes(log, static_cast<std::int64_t>(f), p.margin, frames[f].size());
        out.push_back(suppress_frame(frames[f], boxes, p));
    }
    return out;
}

}  // namespace hcad::suppress

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hcad/core/binary_io.hpp"
#include "hcad/core/error.hpp"
#include "hcad/core/image.hpp"

namespace hcad::clip {

enum class Preprocess { BackboneScaling, None };

struct SamplerParams {
    int clip_length = 32;
    int target_height = 299;
    int target_width = 224;
    Preprocess preprocess = Preprocess::BackboneScaling;

    /// Square input the Inception-family backbones are usually exported with.
    static SamplerParams square299() {
        SamplerParams p;
        p.target_width = 299;
        return p;
    }

    void validate() const {
        if (clip_length < 1) throw Error(ErrorKind::Config, "clip_length must be >= 1");
        if (target_height < 1 || target_width < 1) throw Error(ErrorKind::Config, "target dimensions must be >= 1");
    }
};

/// T x H x W x 3 frames stored as 32-bit floats. Frames at or past
/// valid_length are all zero.
class ClipTensor {
public:
    static constexpr int kChannels = 3;

    ClipTensor() = default;
    ClipTensor(int clip_length, int height, int width)
        : clip_length_(clip_length), height_(height), width_(width),
          data_(static_cast<std::size_t>(clip_length) * height * width * kChannels, 0.0f) {}

    int clip_length() const { return clip_length_; }
    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return kChannels; }
    int valid_length() const { return valid_length_; }
    void set_valid_length(int n) { valid_length_ = n; }

    std::size_t frame_size() const { return static_cast<std::size_t>(height_) * width_ * kChannels; }

    std::span<float> frame_data(int t) { return std::span<float>(data_).subspan(t * frame_size(), frame_size()); }
    std::span<const float> frame_data(int t) const {
        return std::span<const float>(data_).subspan(t * frame_size(), frame_size());
    }

    ImageF frame(int t) const {
        ImageF img(height_, width_, kChannels);
        auto src = frame_data(t);
        std::copy(src.begin(), src.end(), img.pixels().begin());
        return img;
    }

    void set_frame(int t, const ImageF& img) {
        if (img.height() != height_ || img.width() != width_ || img.channels() != kChannels) {
            throw Error(ErrorKind::Validation, "clip frame shape mismatch");
        }
        auto dst = frame_data(t);
        auto src = img.pixels();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<float>(src[i]);
    }

    std::span<const float> data() const { return data_; }
    std::span<float> data() { return data_; }

    friend bool operator==(const ClipTensor&, const ClipTensor&) = default;

private:
    int clip_length_ = 0;
    int height_ = 0;
    int width_ = 0;
    int valid_length_ = 0;
    std::vector<float> data_;
};

/// floor(i * total / target) when there are enough frames, otherwise every
/// frame once (the clip is zero-padded afterwards).
inline std::vector<std::size_t> uniform_sample_indices(std::size_t total, std::size_t target) {
    if (target == 0) throw Error(ErrorKind::Config, "sample target must be >= 1");
    std::vector<std::size_t> idx;
    if (total < target) {
        for (std::size_t i = 0; i < total; ++i) idx.push_back(i);
        return idx;
    }
    idx.reserve(target);
    for (std::size_t i = 0; i < target; ++i) idx.push_back(i * total / target);
    return idx;
}

/// Bilinear resize with half-pixel centers (align_corners = false) and edge clamping.
template <class Pixel>
ImageF resize_frame(const Image<Pixel>& src, int target_height, int target_width) {
    ImageF out(target_height, target_width, src.channels());
    const double sy = static_cast<double>(src.height()) / target_height;
    const double sx = static_cast<double>(src.width()) / target_width;

    struct Tap {
        int i0, i1;
        double w1;
    };
    auto taps = [](int n_out, int n_in, double scale) {
        std::vector<Tap> t(static_cast<std::size_t>(n_out));
        for (int o = 0; o < n_out; ++o) {
            double s = (o + 0.5) * scale - 0.5;
            s = std::clamp(s, 0.0, static_cast<double>(n_in - 1));
            const int i0 = static_cast<int>(std::floor(s));
            const int i1 = std::min(i0 + 1, n_in - 1);
            t[static_cast<std::size_t>(o)] = {i0, i1, s - i0};
        }
        return t;
    };
    const auto ty = taps(target_height, src.height(), sy);
    const auto tx = taps(target_width, src.width(), sx);

    for (int y = 0; y < target_height; ++y) {
        const auto& a = ty[static_cast<std::size_t>(y)];
        for (int x = 0; x < target_width; ++x) {
            const auto& b = tx[static_cast<std::size_t>(x)];
            for (int c = 0; c < src.channels(); ++c) {
                const double p00 = src.at(a.i0, b.i0, c), p01 = src.at(a.i0, b.i1, c);
                const double p10 = src.at(a.i1, b.i0, c), p11 = src.at(a.i1, b.i1, c);
                // Zero weights keep exact source values for identity resizes.
                const double top = b.w1 == 0.0 ? p00 : p00 + (p01 - p00) * b.w1;
                const double bot = b.w1 == 0.0 ? p10 : p10 + (p11 - p10) * b.w1;
                out.at(y, x, c) = a.w1 == 0.0 ? top : top + (bot - top) * a.w1;
            }
        }
    }
    return out;
}

/// Maps 8-bit range [0, 255] linearly onto [-1, 1].
inline ImageF backbone_preprocess(ImageF img) {
    for (auto& v : img.pixels()) v = v / 127.5 - 1.0;
    return img;
}

inline ImageF to_three_channels(const ImageF& img) {
    if (img.channels() == 3) return img;
    if (img.channels() != 1) throw Error(ErrorKind::Validation, "frames must have 1 or 3 channels");
    ImageF out(img.height(), img.width(), 3);
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            for (int k = 0; k < 3; ++k) out.at(r, c, k) = img.at(r, c, 0);
        }
    }
    return out;
}

/// Samples, resizes, preprocesses and stacks frames; short inputs are padded
/// with trailing all-zero frames.
template <class Pixel>
ClipTensor assemble_clip(const std::vector<Image<Pixel>>& frames, const SamplerParams& p) {
    p.validate();
    if (frames.empty()) throw Error(ErrorKind::Validation, "assemble_clip: empty frame sequence");
    ClipTensor clip(p.clip_length, p.target_height, p.target_width);
    const auto idx = uniform_sample_indices(frames.size(), static_cast<std::size_t>(p.clip_length));
    for (std::size_t t = 0; t < idx.size(); ++t) {
        auto img = to_three_channels(resize_frame(frames[idx[t]], p.target_height, p.target_width));
        if (p.preprocess == Preprocess::BackboneScaling) img = backbone_preprocess(std::move(img));
        clip.set_frame(static_cast<int>(t), img);
    }
    clip.set_valid_length(static_cast<int>(idx.size()));
    return clip;
}

// Clip files: "CLIP1", u32 T, H, W, C, valid_length, then T*H*W*C f32, all little-endian.
inline constexpr std::string_view kClipMagic = "CLIP1";

inline std::string encode_clip(const ClipTensor& clip) {
    io::ByteWriter w;
    w.bytes(kClipMagic);
    w.u32(static_cast<std::uint32_t>(clip.clip_length()));
    w.u32(static_cast<std::uint32_t>(clip.height()));
    w.u32(static_cast<std::uint32_t>(clip.width()));
    w.u32(static_cast<std::uint32_t>(clip.channels()));
    w.u32(static_cast<std::uint32_t>(clip.valid_length()));
    for (float v : clip.data()) w.f32(v);
    return w.data();
}

inline ClipTensor decode_clip(std::string_view bytes, const std::string& ctx = "clip") {
    io::ByteReader r(bytes, ctx);
    if (r.bytes(kClipMagic.size()) != kClipMagic) throw Error(ErrorKind::Format, ctx + ": bad clip magic");
    const auto t = r.u32(), h = r.u32(), w = r.u32(), c = r.u32(), valid = r.u32();
    if (c != ClipTensor::kChannels || valid > t) throw Error(ErrorKind::Format, ctx + ": malformed clip header");
    ClipTensor clip(static_cast<int>(t), static_cast<int>(h), static_cast<int>(w));
    clip.set_valid_length(static_cast<int>(valid));
    r.require(clip.data().size() * 4);
    for (auto& v : clip.data()) v = r.f32();
    if (r.remaining() != 0) throw Error(ErrorKind::Format, ctx + ": trailing bytes after payload");
    return clip;
}

inline void store_clip(const std::filesystem::path& path, const ClipTensor& clip) {
    io::write_file_atomic(path, encode_clip(clip));
}

inline ClipTensor load_clip(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    return decode_clip(bytes, path.string());
}

}  // namespace hcad::clip

#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>

#include "hcad/clip/sampler.hpp"
#include "hcad/core/binary_io.hpp"
#include "hcad/features/backbone.hpp"

namespace hcad::features {

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// T x D embeddings for one video; rows at or past valid_length are zero.
struct FeatureSequence {
    std::string video_id;
    std::string label;
    int valid_length = 0;
    FeatureMatrix matrix;

    int length() const { return static_cast<int>(matrix.rows()); }
    int dim() const { return static_cast<int>(matrix.cols()); }

    friend bool operator==(const FeatureSequence& a, const FeatureSequence& b) {
        return a.video_id == b.video_id && a.label == b.label && a.valid_length == b.valid_length &&
               a.matrix.rows() == b.matrix.rows() && a.matrix.cols() == b.matrix.cols() &&
               (a.matrix.array() == b.matrix.array()).all();
    }
};

/// Runs the adapter on every valid clip frame. Padding rows are left zero and
/// the adapter is never called for them.
inline FeatureSequence extract_features(const clip::ClipTensor& clip, BackboneAdapter& adapter,
                                        std::string video_id = {}, std::string label = {}) {
    FeatureSequence seq{std::move(video_id), std::move(label), clip.valid_length(),
                        FeatureMatrix::Zero(clip.clip_length(), static_cast<Eigen::Index>(adapter.output_dim()))};
    for (int t = 0; t < clip.valid_length(); ++t) {
        std::vector<float> f;
        try {
            f = adapter.evaluate(clip.frame(t));
        } catch (const std::exception& e) {
            throw Error(ErrorKind::Numeric, "backbone '" + adapter.name() + "' failed on frame " + std::to_string(t) +
                                                ": " + e.what());
        }
        if (f.size() != adapter.output_dim()) {
            throw Error(ErrorKind::Validation, "backbone '" + adapter.name() + "' returned " + std::to_string(f.size()) +
                                                   " values for frame " + std::to_string(t));
        }
        for (std::size_t d = 0; d < f.size(); ++d) seq.matrix(t, static_cast<Eigen::Index>(d)) = f[d];
    }
    return seq;
}

// .fseq layout: "FSEQ1", u32 T, u32 D, u32 valid_length, u16 label length,
// label bytes, then T*D f32 row-major. All integers little-endian. The video id
// is the file stem.
inline constexpr std::string_view kFeatureMagic = "FSEQ1";

inline std::size_t feature_header_bytes(const std::string& label) { return kFeatureMagic.size() + 12 + 2 + label.size(); }

inline std::string encode_features(const FeatureSequence& seq) {
    io::ByteWriter w;
    w.bytes(kFeatureMagic);
    w.u32(static_cast<std::uint32_t>(seq.matrix.rows()));
    w.u32(static_cast<std::uint32_t>(seq.matrix.cols()));
    w.u32(static_cast<std::uint32_t>(seq.valid_length));
    w.short_string(seq.label);
    for (Eigen::Index r = 0; r < seq.matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < seq.matrix.cols(); ++c) w.f32(seq.matrix(r, c));
    }
    return w.data();
}

inline FeatureSequence decode_features(std::string_view bytes, std::string video_id,
                                       std::optional<std::size_t> expected_dim = std::nullopt,
                                       const std::string& ctx = "feature file") {
    io::ByteReader r(bytes, ctx);
    if (bytes.size() < kFeatureMagic.size() || r.bytes(kFeatureMagic.size()) != kFeatureMagic) {
        throw Error(ErrorKind::Format, ctx + ": malformed header (bad magic)");
    }
    const auto t = r.u32(), d = r.u32(), valid = r.u32();
    if (valid > t) throw Error(ErrorKind::Format, ctx + ": malformed header (valid_length > T)");
    if (expected_dim && d != *expected_dim) {
        throw Error(ErrorKind::Validation, ctx + ": dimension mismatch (file D=" + std::to_string(d) +
                                               ", expected " + std::to_string(*expected_dim) + ")");
    }
    FeatureSequence seq;
    seq.video_id = std::move(video_id);
    seq.label = r.short_string();
    seq.valid_length = static_cast<int>(valid);
    r.require(static_cast<std::size_t>(t) * d * 4);
    seq.matrix.resize(t, d);
    for (Eigen::Index i = 0; i < seq.matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < seq.matrix.cols(); ++j) seq.matrix(i, j) = r.f32();
    }
    if (r.remaining() != 0) throw Error(ErrorKind::Format, ctx + ": trailing bytes after payload");
    return seq;
}

inline void store_features(const FeatureSequence& seq, const std::filesystem::path& path) {
    io::write_file_atomic(path, encode_features(seq));
}

inline FeatureSequence load_features(const std::filesystem::path& path,
                                     std::optional<std::size_t> expected_dim = std::nullopt) {
    const auto bytes = io::read_file(path);
    return decode_features(bytes, path.stem().string(), expected_dim, path.string());
}

inline std::filesystem::path feature_path(const std::filesystem::path& cache_root, const std::string& video_id) {
    return cache_root / (video_id + ".fseq");
}

}  // namespace hcad::features

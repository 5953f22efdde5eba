#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hcad/core/binary_io.hpp"
#include "hcad/model/params.hpp"

namespace hcad::model {

/// Model plus the class labels its output units correspond to.
struct Checkpoint {
    ModelParams params;
    std::vector<std::string> class_labels;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// .seqc layout, little-endian:
//   "SEQC1"
//   u32 input_dim, units1, units2, dense_units, num_classes; u8 bidirectional
//   f64 dropout_seq, dropout_ctx, lstm_input_dropout, recurrent_dropout, l2_lambda
//   u16 label count, then u16-length-prefixed UTF-8 labels
//   every tensor of ModelParams::tensors() as f32, column-major
inline constexpr std::string_view kCheckpointMagic = "SEQC1";

inline std::string encode_checkpoint(const Checkpoint& ck) {
    const auto& c = ck.params.config;
    io::ByteWriter w;
    w.bytes(kCheckpointMagic);
    for (int v : {c.input_dim, c.units1, c.units2, c.dense_units, c.num_classes}) w.u32(static_cast<std::uint32_t>(v));
    w.u8(c.bidirectional ? 1 : 0);
    for (double v : {c.dropout_seq, c.dropout_ctx, c.lstm_input_dropout, c.recurrent_dropout, c.l2_lambda}) w.f64(v);
    w.u16(static_cast<std::uint16_t>(ck.class_labels.size()));
    for (const auto& l : ck.class_labels) w.short_string(l);
    for (auto t : ck.params.tensors()) {
        for (double v : t) w.f32(static_cast<float>(v));
    }
    return w.data();
}

inline Checkpoint decode_checkpoint(std::string_view bytes, const std::string& ctx = "checkpoint") {
    io::ByteReader r(bytes, ctx);
    if (bytes.size() < kCheckpointMagic.size() || r.bytes(kCheckpointMagic.size()) != kCheckpointMagic) {
        throw Error(ErrorKind::Format, ctx + ": bad checkpoint magic");
    }
    ModelConfig c;
    c.input_dim = static_cast<int>(r.u32());
    c.units1 = static_cast<int>(r.u32());
    c.units2 = static_cast<int>(r.u32());
    c.dense_units = static_cast<int>(r.u32());
    c.num_classes = static_cast<int>(r.u32());
    c.bidirectional = r.u8() != 0;
    c.dropout_seq = r.f64();
    c.dropout_ctx = r.f64();
    c.lstm_input_dropout = r.f64();
    c.recurrent_dropout = r.f64();
    c.l2_lambda = r.f64();
    try {
        c.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::Format, ctx + ": invalid config block: " + e.what());
    }
    Checkpoint ck;
    const auto n_labels = r.u16();
    for (std::uint16_t i = 0; i < n_labels; ++i) ck.class_labels.push_back(r.short_string());
    if (!ck.class_labels.empty() && static_cast<int>(ck.class_labels.size()) != c.num_classes) {
        throw Error(ErrorKind::Format, ctx + ": label count does not match num_classes");
    }
    ck.params = ModelParams::zeros(c);
    for (auto t : ck.params.tensors()) {
        r.require(t.size() * 4);
        for (auto& v : t) v = static_cast<double>(r.f32());
    }
    if (r.remaining() != 0) throw Error(ErrorKind::Format, ctx + ": trailing bytes after parameters");
    return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
    io::write_file_atomic(path, encode_checkpoint(ck));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    return decode_checkpoint(bytes, path.string());
}

}  // namespace hcad::model

#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "hcad/core/random.hpp"
#include "hcad/features/feature_cache.hpp"
#include "hcad/model/lstm.hpp"
#include "hcad/model/params.hpp"

namespace hcad::model {

inline constexpr double kProbabilityFloor = 1e-12;

/// Inverted dropout: in training, each element is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate). Identity otherwise.
inline Vec dropout_mask(Eigen::Index n, double rate, Rng& rng, bool training) {
    if (!training || rate <= 0.0) return Vec::Ones(n);
    Vec m(n);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (Eigen::Index i = 0; i < n; ++i) m(i) = rng.uniform() < rate ? 0.0 : keep_scale;
    return m;
}

inline Vec apply_dropout(const Vec& v, double rate, Rng& rng, bool training) {
    return v.cwiseProduct(dropout_mask(v.size(), rate, rng, training));
}

inline Vec softmax(const Vec& logits) {
    const double m = logits.maxCoeff();
    Vec e = (logits.array() - m).exp().matrix();
    return e / e.sum();
}

/// Everything the backward pass needs from one forward pass.
struct ForwardCache {
    int valid_length = 0;
    DirectionCache l1f, l1b, l2f, l2b;
    Mat seq_mask;  // (dirs*u1) x L
    Vec ctx_mask;  // dirs*u2
    Vec context;   // pre-dropout context vector
    Vec dense_in;  // post-dropout context vector
    Vec dense_pre;
    Vec dense_out;
    Vec probs;
};

namespace detail {

inline Mat to_columns(const features::FeatureSequence& seq) {
    return seq.matrix.topRows(seq.valid_length).cast<double>().transpose();
}

}  // namespace detail

/// Full forward pass over the first `valid_length` columns of `x` (d x L).
/// Padding never enters the computation, and every dropout mask depends only
/// on L, so appending padded timesteps cannot change the result.
///
/// Masks are drawn from `seed` in a fixed order: layer-1 input/recurrent masks
/// (forward, then backward), the inter-layer mask, layer-2 masks, then the
/// context mask.
inline ForwardCache forward_columns(const ModelParams& p, const Mat& x, bool training, std::uint64_t seed) {
    const auto& cfg = p.config;
    if (x.rows() != cfg.input_dim) {
        throw Error(ErrorKind::Validation, "feature dimension mismatch: sequence D=" + std::to_string(x.rows()) +
                                               ", model expects " + std::to_string(cfg.input_dim));
    }
    if (x.cols() < 1) throw Error(ErrorKind::Validation, "sequence has no valid timesteps");
    const Eigen::Index len = x.cols();
    const bool bidir = cfg.bidirectional;
    Rng rng(seed);
    ForwardCache fc;
    fc.valid_length = static_cast<int>(len);

    auto run = [&](const LstmParams& lp, const Mat& in, bool reversed) {
        const Vec mx = dropout_mask(in.rows(), cfg.lstm_input_dropout, rng, training);
        const Vec mh = dropout_mask(lp.units(), cfg.recurrent_dropout, rng, training);
        return run_direction(lp, in, reversed, mx, mh);
    };

    fc.l1f = run(p.l1_fwd, x, false);
    if (bidir) fc.l1b = run(p.l1_bwd, x, true);
    const int u1 = cfg.units1;
    Mat seq(cfg.seq_width(), len);
    for (Eigen::Index t = 0; t < len; ++t) {
        seq.col(t).head(u1) = fc.l1f.h.col(t);
        if (bidir) seq.col(t).tail(u1) = fc.l1b.h.col(len - 1 - t);
    }
    fc.seq_mask.resize(seq.rows(), len);
    for (Eigen::Index t = 0; t < len; ++t) fc.seq_mask.col(t) = dropout_mask(seq.rows(), cfg.dropout_seq, rng, training);
    const Mat seq_dropped = seq.cwiseProduct(fc.seq_mask);

    fc.l2f = run(p.l2_fwd, seq_dropped, false);
    if (bidir) fc.l2b = run(p.l2_bwd, seq_dropped, true);
    const int u2 = cfg.units2;
    fc.context.resize(cfg.context_width());
    fc.context.head(u2) = fc.l2f.h.col(len - 1);
    if (bidir) fc.context.tail(u2) = fc.l2b.h.col(len - 1);

    fc.ctx_mask = dropout_mask(fc.context.size(), cfg.dropout_ctx, rng, training);
    fc.dense_in = fc.context.cwiseProduct(fc.ctx_mask);
    fc.dense_pre = p.dense_w * fc.dense_in + p.dense_b;
    fc.dense_out = fc.dense_pre.cwiseMax(0.0);
    fc.probs = softmax(p.out_w * fc.dense_out + p.out_b);
    return fc;
}

/// Class probabilities for a T x D sequence whose first `valid_length` rows are real.
inline Vec model_forward(const Mat& x_rows, int valid_length, const ModelParams& p, bool training = false,
                         std::uint64_t seed = 0) {
    if (valid_length < 1 || valid_length > x_rows.rows()) throw Error(ErrorKind::Validation, "valid_length out of range");
    return forward_columns(p, x_rows.topRows(valid_length).transpose(), training, seed).probs;
}

inline Vec model_forward(const features::FeatureSequence& seq, const ModelParams& p, bool training = false,
                         std::uint64_t seed = 0) {
    if (seq.dim() != p.config.input_dim) {
        throw Error(ErrorKind::Validation, "feature dimension mismatch for " + seq.video_id);
    }
    if (seq.valid_length < 1) throw Error(ErrorKind::Validation, "sequence " + seq.video_id + " has no valid frames");
    return forward_columns(p, detail::to_columns(seq), training, seed).probs;
}

inline double l2_penalty(const ModelParams& p) {
    return p.config.l2_lambda * (p.dense_w.squaredNorm() + p.out_w.squaredNorm());
}

/// Categorical cross-entropy of one prediction (probabilities floored at
/// 1e-12) plus the L2 penalty on the dense and output weights.
inline double cross_entropy_loss(const Vec& y_onehot, const Vec& probs, const ModelParams& p) {
    double data = 0.0;
    for (Eigen::Index c = 0; c < y_onehot.size(); ++c) {
        if (y_onehot(c) != 0.0) data -= y_onehot(c) * std::log(std::max(probs(c), kProbabilityFloor));
    }
    return data + l2_penalty(p);
}

inline Vec one_hot(int label, int num_classes) {
    Vec y = Vec::Zero(num_classes);
    y(label) = 1.0;
    return y;
}

struct LossAndGradients {
    double loss = 0.0;
    Vec probs;
    Gradients grads;
};

/// Exact gradients of `loss_scale * cross_entropy_loss` for one sequence,
/// using the dropout masks that `forward_columns` draws from the same seed.
inline LossAndGradients model_backward(const Mat& x, const Vec& y_onehot, const ModelParams& p, bool training,
                                       std::uint64_t seed, double loss_scale = 1.0) {
    const auto& cfg = p.config;
    const auto fc = forward_columns(p, x, training, seed);
    const Eigen::Index len = fc.valid_length;
    const bool bidir = cfg.bidirectional;

    LossAndGradients out;
    out.probs = fc.probs;
    out.loss = loss_scale * cross_entropy_loss(y_onehot, fc.probs, p);
    out.grads = p.zeros_like();
    auto& g = out.grads;

    const Vec dlogits = loss_scale * (fc.probs - y_onehot);
    const double l2 = 2.0 * cfg.l2_lambda * loss_scale;
    g.out_w = dlogits * fc.dense_out.transpose() + l2 * p.out_w;
    g.out_b = dlogits;
    const Vec d_dense_out = p.out_w.transpose() * dlogits;
    const Vec d_dense_pre = d_dense_out.cwiseProduct((fc.dense_pre.array() > 0.0).cast<double>().matrix());
    g.dense_w = d_dense_pre * fc.dense_in.transpose() + l2 * p.dense_w;
    g.dense_b = d_dense_pre;
    const Vec d_context = (p.dense_w.transpose() * d_dense_pre).cwiseProduct(fc.ctx_mask);

    // Layer 2 only emits its final state: the last processing step of each direction.
    const int u2 = cfg.units2;
    Mat dh2f = Mat::Zero(u2, len);
    dh2f.col(len - 1) = d_context.head(u2);
    Mat d_seq_dropped = backprop_direction(p.l2_fwd, fc.l2f, dh2f, g.l2_fwd);
    if (bidir) {
        Mat dh2b = Mat::Zero(u2, len);
        dh2b.col(len - 1) = d_context.tail(u2);
        d_seq_dropped += backprop_direction(p.l2_bwd, fc.l2b, dh2b, g.l2_bwd);
    }
    const Mat d_seq = d_seq_dropped.cwiseProduct(fc.seq_mask);

    const int u1 = cfg.units1;
    backprop_direction(p.l1_fwd, fc.l1f, d_seq.topRows(u1), g.l1_fwd);
    if (bidir) {
        Mat dh1b(u1, len);
        for (Eigen::Index t = 0; t < len; ++t) dh1b.col(len - 1 - t) = d_seq.col(t).tail(u1);
        backprop_direction(p.l1_bwd, fc.l1b, dh1b, g.l1_bwd);
    }
    return out;
}

inline LossAndGradients model_backward(const features::FeatureSequence& seq, int label, const ModelParams& p,
                                       bool training, std::uint64_t seed, double loss_scale = 1.0) {
    return model_backward(detail::to_columns(seq), one_hot(label, p.config.num_classes), p, training, seed, loss_scale);
}

inline int argmax(const Vec& v) {
    Eigen::Index i = 0;
    v.maxCoeff(&i);
    return static_cast<int>(i);
}

}  // namespace hcad::model

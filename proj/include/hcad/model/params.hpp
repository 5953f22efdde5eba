#pragma once

#include <Eigen/Core>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hcad/core/error.hpp"
#include "hcad/core/random.hpp"

namespace hcad::model {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Architecture and regularization settings of the sequence classifier.
struct ModelConfig {
    int input_dim = 2048;
    int units1 = 256;
    int units2 = 128;
    int dense_units = 64;
    int num_classes = 5;
    bool bidirectional = true;
    double dropout_seq = 0.5;         // between the two recurrent layers
    double dropout_ctx = 0.3;         // on the context vector before the dense layer
    double lstm_input_dropout = 0.3;  // variational mask on each LSTM's inputs
    double recurrent_dropout = 0.2;   // variational mask on each LSTM's h_{t-1}
    double l2_lambda = 1e-4;          // dense and output weights only

    /// Two BiLSTM layers (256/128), dropout 0.5 and 0.3, dense-64 ReLU head.
    static ModelConfig bilstm(int input_dim, int num_classes) {
        ModelConfig c;
        c.input_dim = input_dim;
        c.num_classes = num_classes;
        return c;
    }

    /// Unidirectional stack with a single 0.4 dropout and a dense-32 head.
    static ModelConfig unidirectional_base(int input_dim, int num_classes) {
        ModelConfig c = bilstm(input_dim, num_classes);
        c.bidirectional = false;
        c.dropout_seq = 0.0;
        c.dropout_ctx = 0.4;
        c.dense_units = 32;
        return c;
    }

    int directions() const { return bidirectional ? 2 : 1; }
    int seq_width() const { return units1 * directions(); }
    int context_width() const { return units2 * directions(); }

    void validate() const {
        if (input_dim < 1 || units1 < 1 || units2 < 1 || dense_units < 1 || num_classes < 2) {
            throw Error(ErrorKind::Config, "model dimensions must be positive and num_classes >= 2");
        }
        for (double r : {dropout_seq, dropout_ctx, lstm_input_dropout, recurrent_dropout}) {
            if (!(r >= 0.0 && r < 1.0)) throw Error(ErrorKind::Config, "dropout rates must lie in [0,1)");
        }
        if (!(l2_lambda >= 0.0)) throw Error(ErrorKind::Config, "l2_lambda must be >= 0");
    }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// One LSTM direction. Gate blocks are stacked (input, forget, cell, output):
/// W is 4u x d, U is 4u x u, b has 4u entries.
struct LstmParams {
    Mat W;
    Mat U;
    Vec b;

    int units() const { return static_cast<int>(U.cols()); }
    int input_dim() const { return static_cast<int>(W.cols()); }
    bool empty() const { return W.size() == 0; }

    static LstmParams zeros(int input_dim, int units) {
        return {Mat::Zero(4 * units, input_dim), Mat::Zero(4 * units, units), Vec::Zero(4 * units)};
    }
};

struct ModelParams {
    ModelConfig config;
    LstmParams l1_fwd, l1_bwd, l2_fwd, l2_bwd;
    Mat dense_w;
    Vec dense_b;
    Mat out_w;
    Vec out_b;

    static ModelParams zeros(const ModelConfig& c) {
        c.validate();
        ModelParams p;
        p.config = c;
        p.l1_fwd = LstmParams::zeros(c.input_dim, c.units1);
        p.l2_fwd = LstmParams::zeros(c.seq_width(), c.units2);
        if (c.bidirectional) {
            p.l1_bwd = LstmParams::zeros(c.input_dim, c.units1);
            p.l2_bwd = LstmParams::zeros(c.seq_width(), c.units2);
        }
        p.dense_w = Mat::Zero(c.dense_units, c.context_width());
        p.dense_b = Vec::Zero(c.dense_units);
        p.out_w = Mat::Zero(c.num_classes, c.dense_units);
        p.out_b = Vec::Zero(c.num_classes);
        return p;
    }

    ModelParams zeros_like() const { return zeros(config); }

    /// Every tensor in checkpoint order; Eigen storage is column-major.
    std::vector<std::span<double>> tensors() {
        std::vector<std::span<double>> out;
        auto add = [&](auto& t) {
            if (t.size() > 0) out.emplace_back(t.data(), static_cast<std::size_t>(t.size()));
        };
        for (LstmParams* l : {&l1_fwd, &l1_bwd, &l2_fwd, &l2_bwd}) {
            add(l->W);
            add(l->U);
            add(l->b);
        }
        add(dense_w);
        add(dense_b);
        add(out_w);
        add(out_b);
        return out;
    }

    std::vector<std::span<const double>> tensors() const {
        std::vector<std::span<const double>> out;
        for (auto s : const_cast<ModelParams*>(this)->tensors()) out.emplace_back(s.data(), s.size());
        return out;
    }

    static std::vector<std::string> tensor_names(const ModelConfig& c) {
        std::vector<std::string> names;
        std::vector<std::string> layers = {"l1_fwd"};
        if (c.bidirectional) layers.push_back("l1_bwd");
        layers.push_back("l2_fwd");
        if (c.bidirectional) layers.push_back("l2_bwd");
        for (const auto& l : layers) {
            for (const char* t : {".W", ".U", ".b"}) names.push_back(l + t);
        }
        for (const char* t : {"dense.W", "dense.b", "out.W", "out.b"}) names.emplace_back(t);
        return names;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (auto t : tensors()) n += t.size();
        return n;
    }

    ModelParams& operator+=(const ModelParams& o) {
        auto a = tensors();
        auto b = o.tensors();
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
        }
        return *this;
    }

    ModelParams& operator*=(double s) {
        for (auto t : tensors()) {
            for (auto& v : t) v *= s;
        }
        return *this;
    }

    bool all_finite() const {
        for (auto t : tensors()) {
            for (double v : t) {
                if (!std::isfinite(v)) return false;
            }
        }
        return true;
    }

    friend bool operator==(const ModelParams& a, const ModelParams& b) {
        if (!(a.config == b.config)) return false;
        auto ta = a.tensors();
        auto tb = b.tensors();
        if (ta.size() != tb.size()) return false;
        for (std::size_t i = 0; i < ta.size(); ++i) {
            if (ta[i].size() != tb[i].size() || !std::equal(ta[i].begin(), ta[i].end(), tb[i].begin())) return false;
        }
        return true;
    }
};

/// Gradients share the parameter layout.
using Gradients = ModelParams;

namespace detail {

inline void glorot_uniform(Mat& m, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
    }
}

/// Each u x u gate block of U gets an independent orthogonal matrix.
inline void orthogonal_blocks(Mat& u_mat, Rng& rng) {
    const Eigen::Index u = u_mat.cols();
    for (int g = 0; g < 4; ++g) {
        Mat a(u, u);
        for (Eigen::Index j = 0; j < u; ++j) {
            for (Eigen::Index i = 0; i < u; ++i) a(i, j) = rng.normal();
        }
        Eigen::HouseholderQR<Mat> qr(a);
        Mat q = qr.householderQ();
        // Sign fix makes the distribution uniform over orthogonal matrices.
        const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Eigen::Index j = 0; j < u; ++j) {
            if (r(j, j) < 0) q.col(j) *= -1.0;
        }
        u_mat.middleRows(g * u, u) = q;
    }
}

inline void init_lstm(LstmParams& l, Rng& rng) {
    if (l.empty()) return;
    glorot_uniform(l.W, rng);
    orthogonal_blocks(l.U, rng);
    l.b.setZero();
    l.b.segment(l.units(), l.units()).setOnes();  // forget gate
}

}  // namespace detail

/// Glorot-uniform input and dense weights, orthogonal recurrent weights,
/// forget-gate bias 1, all other biases 0.
inline ModelParams initialize_params(const ModelConfig& c, std::uint64_t seed) {
    auto p = ModelParams::zeros(c);
    Rng rng(seed);
    for (LstmParams* l : {&p.l1_fwd, &p.l1_bwd, &p.l2_fwd, &p.l2_bwd}) detail::init_lstm(*l, rng);
    detail::glorot_uniform(p.dense_w, rng);
    detail::glorot_uniform(p.out_w, rng);
    return p;
}

/// Rounds every parameter to the nearest 32-bit float, i.e. the precision kept
/// by checkpoint files.
inline ModelParams round_to_float(ModelParams p) {
    for (auto t : p.tensors()) {
        for (auto& v : t) v = static_cast<double>(static_cast<float>(v));
    }
    return p;
}

}  // namespace hcad::model

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <utility>
#include <variant>

#include "hcad/model/params.hpp"

namespace hcad::model {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// One LSTM step: i, f, o sigmoid gates, g tanh candidate,
/// c = f*c_prev + i*g, h = o*tanh(c).
inline std::pair<Vec, Vec> lstm_cell_forward(const Vec& x, const Vec& h_prev, const Vec& c_prev, const LstmParams& p) {
    const int u = p.units();
    const Vec a = p.W * x + p.U * h_prev + p.b;
    Vec c(u), h(u);
    for (int k = 0; k < u; ++k) {
        const double i = sigmoid(a(k));
        const double f = sigmoid(a(u + k));
        const double g = std::tanh(a(2 * u + k));
        const double o = sigmoid(a(3 * u + k));
        c(k) = f * c_prev(k) + i * g;
        h(k) = o * std::tanh(c(k));
    }
    return {h, c};
}

/// Activations of one direction over the valid prefix, indexed by processing
/// step (step s reads input column `reversed ? L-1-s : s`).
struct DirectionCache {
    bool reversed = false;
    Mat x_in;     // d x L masked inputs, processing order
    Mat h_in;     // u x L masked h_{s-1}
    Mat gates;    // 4u x L post-activation (i, f, g, o)
    Mat c;        // u x L
    Mat tanh_c;   // u x L
    Mat h;        // u x L
    Vec input_mask;
    Vec recurrent_mask;
};

/// Runs one direction over the first L columns of `x` (d x L). Masks are
/// per-sequence (variational) and may be all-ones.
inline DirectionCache run_direction(const LstmParams& p, const Mat& x, bool reversed, const Vec& input_mask,
                                    const Vec& recurrent_mask) {
    const Eigen::Index len = x.cols();
    const int u = p.units();
    DirectionCache cache;
    cache.reversed = reversed;
    cache.input_mask = input_mask;
    cache.recurrent_mask = recurrent_mask;
    cache.x_in.resize(x.rows(), len);
    for (Eigen::Index s = 0; s < len; ++s) {
        cache.x_in.col(s) = x.col(reversed ? len - 1 - s : s).cwiseProduct(input_mask);
    }
    Mat pre = p.W * cache.x_in;
    pre.colwise() += p.b;

    cache.h_in.resize(u, len);
    cache.gates.resize(4 * u, len);
    cache.c.resize(u, len);
    cache.tanh_c.resize(u, len);
    cache.h.resize(u, len);
    Vec h_prev = Vec::Zero(u), c_prev = Vec::Zero(u);
    for (Eigen::Index s = 0; s < len; ++s) {
        cache.h_in.col(s) = h_prev.cwiseProduct(recurrent_mask);
        Vec a = pre.col(s) + p.U * cache.h_in.col(s);
        for (int k = 0; k < u; ++k) {
            const double i = sigmoid(a(k));
            const double f = sigmoid(a(u + k));
            const double g = std::tanh(a(2 * u + k));
            const double o = sigmoid(a(3 * u + k));
            const double c = f * c_prev(k) + i * g;
            const double tc = std::tanh(c);
            cache.gates(k, s) = i;
            cache.gates(u + k, s) = f;
            cache.gates(2 * u + k, s) = g;
            cache.gates(3 * u + k, s) = o;
            cache.c(k, s) = c;
            cache.tanh_c(k, s) = tc;
            cache.h(k, s) = o * tc;
        }
        h_prev = cache.h.col(s);
        c_prev = cache.c.col(s);
    }
    return cache;
}

/// Backpropagation through time for one direction. `dh_ext` (u x L) holds the
/// loss gradient w.r.t. each step's output h, in processing order. Accumulates
/// into `grad` and returns d(loss)/d(x) as d x L in original time order.
inline Mat backprop_direction(const LstmParams& p, const DirectionCache& cache, const Mat& dh_ext, LstmParams& grad) {
    const Eigen::Index len = cache.h.cols();
    const int u = p.units();
    Mat da(4 * u, len);
    Vec dh_next = Vec::Zero(u), dc_next = Vec::Zero(u);
    for (Eigen::Index s = len - 1; s >= 0; --s) {
        const Vec dh = dh_ext.col(s) + dh_next;
        Vec dc_prev(u);
        for (int k = 0; k < u; ++k) {
            const double i = cache.gates(k, s), f = cache.gates(u + k, s);
            const double g = cache.gates(2 * u + k, s), o = cache.gates(3 * u + k, s);
            const double tc = cache.tanh_c(k, s);
            const double c_prev = s > 0 ? cache.c(k, s - 1) : 0.0;
            const double dc = dc_next(k) + dh(k) * o * (1.0 - tc * tc);
            da(k, s) = dc * g * i * (1.0 - i);
            da(u + k, s) = dc * c_prev * f * (1.0 - f);
            da(2 * u + k, s) = dc * i * (1.0 - g * g);
            da(3 * u + k, s) = dh(k) * tc * o * (1.0 - o);
            dc_prev(k) = dc * f;
        }
        dh_next = (p.U.transpose() * da.col(s)).cwiseProduct(cache.recurrent_mask);
        dc_next = dc_prev;
    }
    grad.W.noalias() += da * cache.x_in.transpose();
    grad.U.noalias() += da * cache.h_in.transpose();
    grad.b += da.rowwise().sum();

    Mat dx_proc = p.W.transpose() * da;
    Mat dx(dx_proc.rows(), len);
    for (Eigen::Index s = 0; s < len; ++s) {
        dx.col(cache.reversed ? len - 1 - s : s) = dx_proc.col(s).cwiseProduct(cache.input_mask);
    }
    return dx;
}

/// Bidirectional (or forward-only, when `bwd` is empty) layer in inference
/// mode over a T x d sequence whose first `valid_length` rows are real.
/// With return_sequences the result is T x (dirs*u) with zero padded rows;
/// otherwise a (dirs*u)-vector [forward final state; backward final state].
inline std::variant<Mat, Vec> bilstm_layer_forward(const Mat& x_rows, int valid_length, const LstmParams& fwd,
                                                   const LstmParams& bwd, bool return_sequences) {
    if (valid_length < 1 || valid_length > x_rows.rows()) {
        throw Error(ErrorKind::Validation, "valid_length must lie in [1, T]");
    }
    const int u = fwd.units();
    const Mat x = x_rows.topRows(valid_length).transpose();
    const Vec in_ones = Vec::Ones(x.rows()), rec_ones = Vec::Ones(u);
    const auto f = run_direction(fwd, x, false, in_ones, rec_ones);
    const bool bidir = !bwd.empty();
    DirectionCache b;
    if (bidir) b = run_direction(bwd, x, true, in_ones, rec_ones);
    const int width = bidir ? 2 * u : u;
    if (return_sequences) {
        Mat out = Mat::Zero(x_rows.rows(), width);
        for (int t = 0; t < valid_length; ++t) {
            out.row(t).head(u) = f.h.col(t).transpose();
            if (bidir) out.row(t).tail(u) = b.h.col(valid_length - 1 - t).transpose();
        }
        return out;
    }
    Vec out(width);
    out.head(u) = f.h.col(valid_length - 1);
    if (bidir) out.tail(u) = b.h.col(valid_length - 1);
    return out;
}

}  // namespace hcad::model

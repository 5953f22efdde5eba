#include <gtest/gtest.h>

#include <random>

#include "hcad/model/adam.hpp"
#include "hcad/model/checkpoint.hpp"
#include "hcad/model/classifier.hpp"
#include "hcad/model/lstm.hpp"
#include "hcad/model/params.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace hcad;
using namespace hcad::model;

namespace {

Mat random_mat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 0.5) {
    std::normal_distribution<double> n(0.0, scale);
    Mat m(r, c);
    for (Eigen::Index j = 0; j < c; ++j) {
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(rng);
    }
    return m;
}

LstmParams random_lstm(int d, int u, std::mt19937_64& rng) {
    return {random_mat(4 * u, d, rng), random_mat(4 * u, u, rng), random_mat(4 * u, 1, rng).col(0)};
}

std::vector<std::vector<double>> nested(const Mat& m) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    }
    return out;
}

std::vector<double> stdvec(const Vec& v) { return {v.data(), v.data() + v.size()}; }

ModelConfig tiny_config() {
    ModelConfig c;
    c.input_dim = 6;
    c.units1 = 4;
    c.units2 = 3;
    c.dense_units = 5;
    c.num_classes = 3;
    c.l2_lambda = 1e-2;
    return c;
}

ModelParams random_params(const ModelConfig& c, std::uint64_t seed, double scale = 0.5) {
    auto p = ModelParams::zeros(c);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, scale);
    for (auto t : p.tensors()) {
        for (auto& v : t) v = n(rng);
    }
    // Positive dense biases keep ReLU units away from their kink.
    p.dense_b.array() += 0.5;
    return p;
}

}  // namespace

// ---------------------------------------------------------------- cell

TEST(LstmCell, ZeroInputsGiveZeroState) {
    const auto p = LstmParams::zeros(3, 4);
    const auto [h, c] = lstm_cell_forward(Vec::Zero(3), Vec::Zero(4), Vec::Zero(4), p);
    EXPECT_TRUE(h.isZero(0.0));
    EXPECT_TRUE(c.isZero(0.0));
}

TEST(LstmCell, SaturatedForgetGateKeepsCell) {
    std::mt19937_64 rng(1);
    auto p = random_lstm(3, 4, rng);
    p.b.segment(4, 4).setConstant(50.0);
    const Vec x = random_mat(3, 1, rng).col(0), h_prev = random_mat(4, 1, rng).col(0), c_prev = random_mat(4, 1, rng).col(0);
    const auto [h, c] = lstm_cell_forward(x, h_prev, c_prev, p);
    const Vec a = p.W * x + p.U * h_prev + p.b;
    for (int k = 0; k < 4; ++k) {
        const double i = 1.0 / (1.0 + std::exp(-a(k))), g = std::tanh(a(8 + k));
        EXPECT_NEAR(c(k), c_prev(k) + i * g, 1e-6);
    }
}

TEST(LstmCell, MatchesScalarOracle) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_lstm(5, 3, rng);
        const Vec x = random_mat(5, 1, rng).col(0), h0 = random_mat(3, 1, rng).col(0), c0 = random_mat(3, 1, rng).col(0);
        const auto [h, c] = lstm_cell_forward(x, h0, c0, p);
        std::vector<double> rh, rc;
        oracle::lstm_cell(nested(p.W), nested(p.U), stdvec(p.b), stdvec(x), stdvec(h0), stdvec(c0), rh, rc);
        for (int k = 0; k < 3; ++k) {
            EXPECT_NEAR(h(k), rh[static_cast<std::size_t>(k)], 1e-12);
            EXPECT_NEAR(c(k), rc[static_cast<std::size_t>(k)], 1e-12);
        }
    }
}

// ---------------------------------------------------------------- bilstm layer

TEST(BiLstm, SingleStepDirectionsAgree) {
    std::mt19937_64 rng(3);
    const auto p = random_lstm(4, 3, rng);
    const Mat x = random_mat(6, 4, rng);
    const auto out = std::get<Vec>(bilstm_layer_forward(x, 1, p, p, false));
    EXPECT_TRUE(out.head(3).isApprox(out.tail(3), 0.0));
    const auto seq = std::get<Mat>(bilstm_layer_forward(x, 1, p, p, true));
    EXPECT_TRUE(seq.row(0).head(3).isApprox(seq.row(0).tail(3), 0.0));
    EXPECT_TRUE(seq.bottomRows(5).isZero(0.0));
}

TEST(BiLstm, PalindromeIsSelfReverseUnderHalfSwap) {
    std::mt19937_64 rng(4);
    const auto p = random_lstm(4, 3, rng);
    Mat x = random_mat(7, 4, rng);
    for (int t = 0; t < 3; ++t) x.row(6 - t) = x.row(t);
    const auto seq = std::get<Mat>(bilstm_layer_forward(x, 7, p, p, true));
    for (int t = 0; t < 7; ++t) {
        EXPECT_NEAR((seq.row(t).head(3) - seq.row(6 - t).tail(3)).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    }
}

TEST(BiLstm, MatchesManualCellComposition) {
    std::mt19937_64 rng(5);
    const auto fwd = random_lstm(3, 2, rng), bwd = random_lstm(3, 2, rng);
    const Mat x = random_mat(4, 3, rng);
    const auto seq = std::get<Mat>(bilstm_layer_forward(x, 4, fwd, bwd, true));
    const auto fin = std::get<Vec>(bilstm_layer_forward(x, 4, fwd, bwd, false));
    std::vector<double> h(2, 0.0), c(2, 0.0), nh, nc;
    for (int t = 0; t < 4; ++t) {
        oracle::lstm_cell(nested(fwd.W), nested(fwd.U), stdvec(fwd.b), stdvec(x.row(t).transpose()), h, c, nh, nc);
        h = nh;
        c = nc;
        for (int k = 0; k < 2; ++k) EXPECT_NEAR(seq(t, k), h[static_cast<std::size_t>(k)], 1e-12);
    }
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(fin(k), h[static_cast<std::size_t>(k)], 1e-12);
    h.assign(2, 0.0);
    c.assign(2, 0.0);
    for (int t = 3; t >= 0; --t) {
        oracle::lstm_cell(nested(bwd.W), nested(bwd.U), stdvec(bwd.b), stdvec(x.row(t).transpose()), h, c, nh, nc);
        h = nh;
        c = nc;
        for (int k = 0; k < 2; ++k) EXPECT_NEAR(seq(t, 2 + k), h[static_cast<std::size_t>(k)], 1e-12);
    }
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(fin(2 + k), h[static_cast<std::size_t>(k)], 1e-12);
}

TEST(BiLstm, ValidLengthOutOfRangeRejected) {
    std::mt19937_64 rng(6);
    const auto p = random_lstm(2, 2, rng);
    EXPECT_THROW(bilstm_layer_forward(Mat::Zero(3, 2), 0, p, p, false), Error);
    EXPECT_THROW(bilstm_layer_forward(Mat::Zero(3, 2), 4, p, p, false), Error);
}

// ---------------------------------------------------------------- model forward

TEST(ModelForward, OutputIsProbabilitySimplex) {
    std::mt19937_64 rng(7);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto p = random_params(tiny_config(), s, 2.0);
        const Mat x = random_mat(5, 6, rng, 3.0);
        for (bool training : {false, true}) {
            const Vec y = model_forward(x, 5, p, training, s);
            ASSERT_EQ(y.size(), 3);
            EXPECT_NEAR(y.sum(), 1.0, 1e-9);
            EXPECT_GE(y.minCoeff(), 0.0);
            EXPECT_LE(y.maxCoeff(), 1.0);
        }
    }
}

TEST(ModelForward, ZeroWeightsGiveUniform) {
    const auto p = ModelParams::zeros(tiny_config());
    std::mt19937_64 rng(8);
    const Vec y = model_forward(random_mat(5, 6, rng), 5, p);
    for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(y(c), 1.0 / 3.0);
}

TEST(ModelForward, OutputBiasShiftInvariance) {
    auto p = random_params(tiny_config(), 9);
    std::mt19937_64 rng(9);
    const Mat x = random_mat(5, 6, rng);
    const Vec a = model_forward(x, 5, p);
    p.out_b.array() += 3.7;
    const Vec b = model_forward(x, 5, p);
    EXPECT_NEAR((a - b).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(ModelForward, InferenceIsBitReproducible) {
    const auto p = random_params(tiny_config(), 10);
    std::mt19937_64 rng(10);
    const Mat x = random_mat(5, 6, rng);
    const Vec a = model_forward(x, 5, p, false, 1);
    const Vec b = model_forward(x, 5, p, false, 999);
    EXPECT_TRUE((a.array() == b.array()).all());
}

TEST(ModelForward, DropoutOnlyWhenTraining) {
    const auto p = random_params(tiny_config(), 11);
    std::mt19937_64 rng(11);
    const Mat x = random_mat(5, 6, rng);
    const Vec a = model_forward(x, 5, p, true, 1);
    const Vec b = model_forward(x, 5, p, true, 2);
    EXPECT_FALSE(a.isApprox(b));
    EXPECT_TRUE((model_forward(x, 5, p, true, 1).array() == a.array()).all());
}

TEST(ModelForward, DimensionMismatchRejected) {
    const auto p = random_params(tiny_config(), 12);
    try {
        model_forward(Mat::Zero(5, 7), 5, p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Validation);
    }
}

TEST(ModelForward, UnidirectionalPresetRuns) {
    auto c = ModelConfig::unidirectional_base(6, 3);
    c.units1 = 4;
    c.units2 = 3;
    const auto p = random_params(c, 13);
    EXPECT_TRUE(p.l1_bwd.empty());
    EXPECT_EQ(p.dense_w.rows(), 32);
    EXPECT_EQ(p.dense_w.cols(), 3);
    std::mt19937_64 rng(13);
    EXPECT_NEAR(model_forward(random_mat(4, 6, rng), 4, p).sum(), 1.0, 1e-12);
}

TEST(ModelConfig, DefaultsAndValidation) {
    const auto c = ModelConfig::bilstm(2048, 5);
    EXPECT_EQ(c.units1, 256);
    EXPECT_EQ(c.units2, 128);
    EXPECT_EQ(c.dense_units, 64);
    EXPECT_DOUBLE_EQ(c.dropout_seq, 0.5);
    EXPECT_DOUBLE_EQ(c.dropout_ctx, 0.3);
    EXPECT_DOUBLE_EQ(c.l2_lambda, 1e-4);
    EXPECT_EQ(c.context_width(), 256);
    auto bad = c;
    bad.dropout_seq = 1.0;
    EXPECT_THROW(bad.validate(), Error);
    bad = c;
    bad.num_classes = 1;
    EXPECT_THROW(bad.validate(), Error);
}

// ---------------------------------------------------------------- loss

TEST(Loss, PerfectPredictionHasZeroDataTerm) {
    auto p = ModelParams::zeros(tiny_config());
    EXPECT_DOUBLE_EQ(cross_entropy_loss(one_hot(1, 3), one_hot(1, 3), p), 0.0);
}

TEST(Loss, UniformFiveClassesIsLogFive) {
    auto c = tiny_config();
    c.num_classes = 5;
    const auto p = ModelParams::zeros(c);
    EXPECT_NEAR(cross_entropy_loss(one_hot(0, 5), Vec::Constant(5, 0.2), p), std::log(5.0), 1e-15);
    EXPECT_NEAR(std::log(5.0), 1.6094, 1e-4);
}

TEST(Loss, SpecificDistribution) {
    auto c = tiny_config();
    c.num_classes = 5;
    const auto p = ModelParams::zeros(c);
    Vec y(5);
    y << 0.1, 0.2, 0.4, 0.2, 0.1;
    EXPECT_NEAR(cross_entropy_loss(one_hot(2, 5), y, p), -std::log(0.4), 1e-15);
    EXPECT_NEAR(-std::log(0.4), 0.9163, 1e-4);
}

TEST(Loss, ZeroProbabilityIsClamped) {
    const auto p = ModelParams::zeros(tiny_config());
    EXPECT_NEAR(cross_entropy_loss(one_hot(0, 3), one_hot(1, 3), p), -std::log(1e-12), 1e-9);
}

TEST(Loss, L2PenaltyCoversDenseAndOutputOnly) {
    auto p = ModelParams::zeros(tiny_config());
    p.dense_w.setConstant(1.0);   // 5 x 6 = 30
    p.out_w.setConstant(2.0);     // 3 x 5 = 15 entries of 4
    p.l1_fwd.W.setConstant(9.0);  // ignored
    EXPECT_NEAR(cross_entropy_loss(one_hot(0, 3), one_hot(0, 3), p), 1e-2 * (30 + 60), 1e-12);
}

// ---------------------------------------------------------------- gradients

TEST(Backward, PerfectPredictionGivesZeroOutputBiasGradient) {
    auto p = ModelParams::zeros(tiny_config());
    p.config.l2_lambda = 0.0;
    p.out_b << 60.0, 0.0, 0.0;
    std::mt19937_64 rng(14);
    const auto r = model_backward(random_mat(6, 5, rng), one_hot(0, 3), p, false, 0);
    EXPECT_NEAR(r.grads.out_b.cwiseAbs().maxCoeff(), 0.0, 1e-20);
}

namespace {

double relative_error(double a, double n) {
    const double denom = std::max({std::abs(a), std::abs(n), 1e-6});
    return std::abs(a - n) / denom;
}

/// Largest relative error over every parameter between the analytic gradient
/// and a central finite difference with step 1e-5.
double gradient_check(std::uint64_t seed, bool training) {
    const auto cfg = tiny_config();
    auto p = random_params(cfg, seed);
    std::mt19937_64 rng(seed + 1000);
    const Mat x = random_mat(6, 5, rng, 1.0);
    const Vec y = one_hot(static_cast<int>(seed % 3), 3);
    const auto analytic = model_backward(x, y, p, training, seed);
    auto loss = [&](const ModelParams& q) { return cross_entropy_loss(y, forward_columns(q, x, training, seed).probs, q); };
    EXPECT_NEAR(analytic.loss, loss(p), 1e-12);
    double worst = 0.0;
    auto params = p.tensors();
    auto grads = analytic.grads.tensors();
    const double h = 1e-5;
    for (std::size_t t = 0; t < params.size(); ++t) {
        for (std::size_t i = 0; i < params[t].size(); ++i) {
            const double orig = params[t][i];
            params[t][i] = orig + h;
            const double up = loss(p);
            params[t][i] = orig - h;
            const double down = loss(p);
            params[t][i] = orig;
            worst = std::max(worst, relative_error(grads[t][i], (up - down) / (2 * h)));
        }
    }
    return worst;
}

}  // namespace

TEST(Backward, FiniteDifferenceCheckInference) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) EXPECT_LT(gradient_check(seed, false), 1e-4) << "seed " << seed;
}

TEST(Backward, FiniteDifferenceCheckWithDropoutMasks) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) EXPECT_LT(gradient_check(seed, true), 1e-4) << "seed " << seed;
}

TEST(Backward, LossScaleIsLinear) {
    const auto p = random_params(tiny_config(), 15);
    std::mt19937_64 rng(15);
    const Mat x = random_mat(6, 5, rng);
    const auto a = model_backward(x, one_hot(2, 3), p, true, 3, 1.0);
    const auto b = model_backward(x, one_hot(2, 3), p, true, 3, 2.0);
    EXPECT_NEAR(b.loss, 2 * a.loss, 1e-12);
    auto ta = a.grads.tensors();
    auto tb = b.grads.tensors();
    for (std::size_t t = 0; t < ta.size(); ++t) {
        for (std::size_t i = 0; i < ta[t].size(); ++i) EXPECT_NEAR(tb[t][i], 2 * ta[t][i], 1e-12);
    }
}

TEST(Backward, PaddingNeverChangesLossOrGradients) {
    const auto p = random_params(tiny_config(), 16);
    std::mt19937_64 rng(16);
    const int T = 8;
    const Mat full = random_mat(T, 6, rng);
    for (int valid = 1; valid < T; ++valid) {
        features::FeatureSequence exact{"v", "x", valid, full.topRows(valid).cast<float>()};
        features::FeatureSequence padded{"v", "x", valid, features::FeatureMatrix::Zero(T, 6)};
        padded.matrix.topRows(valid) = full.topRows(valid).cast<float>();
        const auto a = model_backward(exact, 1, p, true, 42);
        const auto b = model_backward(padded, 1, p, true, 42);
        EXPECT_EQ(a.loss, b.loss) << valid;
        EXPECT_TRUE(a.grads == b.grads) << valid;
        const Vec pa = model_forward(exact, p), pb = model_forward(padded, p);
        EXPECT_TRUE((pa.array() == pb.array()).all());
    }
}

// ---------------------------------------------------------------- adam

TEST(Adam, ZeroGradientsLeaveParamsUnchanged) {
    auto p = random_params(tiny_config(), 17);
    const auto before = p;
    auto s = AdamState::for_params(p, 1e-3);
    for (int k = 0; k < 3; ++k) adam_step(p, p.zeros_like(), s);
    EXPECT_TRUE(p == before);
    EXPECT_EQ(s.step, 3);
}

TEST(Adam, ZeroLearningRateLeavesParamsUnchanged) {
    auto p = random_params(tiny_config(), 18);
    const auto before = p;
    auto s = AdamState::for_params(p, 0.0);
    adam_step(p, random_params(tiny_config(), 19), s);
    EXPECT_TRUE(p == before);
}

TEST(Adam, FirstStepIsLearningRateTimesSign) {
    auto p = ModelParams::zeros(tiny_config());
    auto g = p.zeros_like();
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> u(-2, 2);
    for (auto t : g.tensors()) {
        for (auto& v : t) v = u(rng);
    }
    auto s = AdamState::for_params(p, 1e-3);
    EXPECT_DOUBLE_EQ(s.beta1, 0.9);
    EXPECT_DOUBLE_EQ(s.beta2, 0.999);
    EXPECT_DOUBLE_EQ(s.epsilon, 1e-7);
    adam_step(p, g, s);
    auto tp = p.tensors();
    auto tg = g.tensors();
    for (std::size_t t = 0; t < tp.size(); ++t) {
        for (std::size_t i = 0; i < tp[t].size(); ++i) {
            const double gi = tg[t][i];
            EXPECT_NEAR(tp[t][i], -1e-3 * gi / (std::abs(gi) + 1e-7), 1e-12);
            EXPECT_NEAR(tp[t][i], -1e-3 * (gi > 0 ? 1.0 : -1.0), 1e-6);
        }
    }
}

TEST(Adam, DefaultLearningRate) {
    EXPECT_DOUBLE_EQ(AdamState{}.learning_rate, 1e-4);
}

// ---------------------------------------------------------------- dropout

TEST(Dropout, RateZeroAndInferenceAreIdentity) {
    Rng rng(1);
    const Vec v = Vec::LinSpaced(50, -3, 3);
    EXPECT_EQ(apply_dropout(v, 0.0, rng, true), v);
    EXPECT_EQ(apply_dropout(v, 0.5, rng, false), v);
}

TEST(Dropout, InvertedExpectationIsPreserved) {
    Rng rng(2);
    const Vec out = apply_dropout(Vec::Ones(100000), 0.5, rng, true);
    EXPECT_NEAR(out.mean(), 1.0, 0.01);
    for (Eigen::Index i = 0; i < out.size(); ++i) ASSERT_TRUE(out(i) == 0.0 || out(i) == 2.0);
}

// ---------------------------------------------------------------- init and checkpoint

TEST(Init, ShapesAndBiases) {
    const auto c = tiny_config();
    const auto p = initialize_params(c, 3);
    EXPECT_EQ(p.l1_fwd.W.rows(), 16);
    EXPECT_EQ(p.l1_fwd.W.cols(), 6);
    EXPECT_EQ(p.l2_fwd.W.cols(), 8);
    EXPECT_EQ(p.dense_w.cols(), 6);
    EXPECT_TRUE(p.l1_fwd.b.segment(4, 4).isOnes(0.0));
    EXPECT_TRUE(p.l1_fwd.b.head(4).isZero(0.0));
    const Mat block = p.l1_fwd.U.middleRows(0, 4);
    EXPECT_TRUE((block.transpose() * block).isIdentity(1e-12));
    const double limit = std::sqrt(6.0 / (16 + 6));
    EXPECT_LE(p.l1_fwd.W.cwiseAbs().maxCoeff(), limit);
    EXPECT_TRUE(initialize_params(c, 3) == p);
    EXPECT_FALSE(initialize_params(c, 4) == p);
}

TEST(CheckpointFile, RoundTripIsBitExact) {
    test::TempDir dir;
    const auto p = round_to_float(initialize_params(tiny_config(), 5));
    const Checkpoint ck{p, {"A", "B", "C"}};
    save_checkpoint(dir.path() / "m.seqc", ck);
    const auto back = load_checkpoint(dir.path() / "m.seqc");
    EXPECT_TRUE(back == ck);
    std::mt19937_64 rng(5);
    const Mat x = random_mat(5, 6, rng);
    EXPECT_TRUE((model_forward(x, 5, back.params).array() == model_forward(x, 5, p).array()).all());
}

TEST(CheckpointFile, CorruptionIsFormatError) {
    const auto bytes = encode_checkpoint({initialize_params(tiny_config(), 6), {"A", "B", "C"}});
    for (const auto& b : {bytes.substr(0, bytes.size() - 2), bytes + "z", "SEQC0" + bytes.substr(5), std::string("SE")}) {
        try {
            decode_checkpoint(b);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::Format);
        }
    }
}

// ---------------------------------------------------------------- capacity

TEST(Capacity, OverfitsFiftySeparableSequences) {
    // Each class has its own mean pattern; per-frame noise keeps samples distinct.
    ModelConfig c;
    c.input_dim = 16;
    c.units1 = 32;
    c.units2 = 16;
    c.num_classes = 5;
    std::mt19937_64 rng(21);
    const Mat centers = random_mat(5, 16, rng, 1.0);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<Mat> xs;
    std::vector<int> ys;
    for (int i = 0; i < 50; ++i) {
        const int label = i % 5;
        Mat x(16, 8);
        for (int t = 0; t < 8; ++t) {
            for (int d = 0; d < 16; ++d) x(d, t) = centers(label, d) + noise(rng);
        }
        xs.push_back(x);
        ys.push_back(label);
    }
    auto p = initialize_params(c, 7);
    auto s = AdamState::for_params(p);
    auto accuracy = [&] {
        int ok = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) ok += argmax(forward_columns(p, xs[i], false, 0).probs) == ys[i];
        return static_cast<double>(ok) / static_cast<double>(xs.size());
    };
    int epochs = 0;
    double acc = 0.0;
    for (; epochs < 200 && acc < 0.99; ++epochs) {
        for (std::size_t start = 0; start < xs.size(); start += 10) {
            auto g = p.zeros_like();
            for (std::size_t i = start; i < start + 10; ++i) {
                g += model_backward(xs[i], one_hot(ys[i], 5), p, true, static_cast<std::uint64_t>(epochs * 100 + static_cast<int>(i)), 0.1).grads;
            }
            adam_step(p, g, s);
        }
        acc = accuracy();
    }
    EXPECT_GE(acc, 0.99) << "after " << epochs << " epochs";
}

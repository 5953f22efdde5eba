#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hcad/core/binary_io.hpp"
#include "hcad/core/error.hpp"
#include "hcad/core/manifest.hpp"
#include "hcad/core/parallel.hpp"
#include "hcad/core/text.hpp"
#include "hcad/model/adam.hpp"
#include "hcad/model/checkpoint.hpp"
#include "hcad/model/classifier.hpp"
#include "hcad/train/balance.hpp"
#include "hcad/train/batches.hpp"
#include "hcad/train/callbacks.hpp"

namespace hcad::train {

/// Sequences with integer labels. Pointers are borrowed.
struct LabeledSet {
    std::vector<const features::FeatureSequence*> seqs;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    void add(const features::FeatureSequence& s, int label) {
        seqs.push_back(&s);
        labels.push_back(label);
    }
};

inline LabeledSet labeled_set(const DatasetManifest& m, FeatureStore& store) {
    LabeledSet out;
    for (const auto& e : m.entries) out.add(store.get(e), static_cast<int>(m.label_index(e)));
    return out;
}

struct TrainConfig {
    model::ModelConfig model;
    double learning_rate = 1e-4;
    int batch_size = 16;
    int max_epochs = 100;
    CallbackConfig callbacks;
    bool balance = true;
    std::optional<std::size_t> cap_normal;  // default: largest anomaly class
    std::optional<int> normal_class = 0;
    std::uint64_t seed = 1;
    int jobs = 1;

    void validate() const {
        model.validate();
        callbacks.validate();
        if (!(learning_rate >= 0.0)) throw Error(ErrorKind::Config, "learning_rate must be >= 0");
        if (batch_size < 1) throw Error(ErrorKind::Config, "batch_size must be >= 1");
        if (max_epochs < 1) throw Error(ErrorKind::Config, "max_epochs must be >= 1");
    }
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    double learning_rate = 0.0;  // rate used during this epoch
    bool improved = false;
    bool lr_reduced = false;     // reduction takes effect from the next epoch
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
    bool early_stopped = false;

    std::string to_csv() const {
        std::string out = "epoch,train_loss,train_accuracy,val_loss,val_accuracy,learning_rate\n";
        for (const auto& e : epochs) {
            out += std::to_string(e.epoch) + "," + text::exact(e.train_loss) + "," + text::exact(e.train_accuracy) + "," +
                   text::exact(e.val_loss) + "," + text::exact(e.val_accuracy) + "," + text::exact(e.learning_rate) +
                   "\n";
        }
        return out;
    }
};

struct TrainResult {
    model::ModelParams best_params;  // float-rounded, as persisted
    TrainHistory history;
};

struct Evaluation {
    double loss = 0.0;  // mean cross-entropy plus the L2 term
    double accuracy = 0.0;
    std::vector<int> predictions;
    std::vector<model::Vec> probabilities;
};

/// Inference-mode loss and accuracy. Per-sample work may run in parallel;
/// the reduction is sequential in sample order.
inline Evaluation evaluate_model(const model::ModelParams& p, const LabeledSet& set, int jobs = 1) {
    Evaluation ev;
    const std::size_t n = set.size();
    ev.predictions.resize(n);
    ev.probabilities.resize(n);
    std::vector<double> losses(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        ev.probabilities[i] = model::model_forward(*set.seqs[i], p, false);
        ev.predictions[i] = model::argmax(ev.probabilities[i]);
        losses[i] = model::cross_entropy_loss(model::one_hot(set.labels[i], p.config.num_classes), ev.probabilities[i], p);
    });
    if (n == 0) return ev;
    double loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        loss += losses[i];
        correct += ev.predictions[i] == set.labels[i] ? 1 : 0;
    }
    ev.loss = loss / static_cast<double>(n);
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return ev;
}

struct TrainHooks {
    /// Replaces the validation pass; returns (loss, accuracy) for an epoch.
    std::function<std::pair<double, double>(int epoch, const model::ModelParams&)> validate;
    /// Called with the float-rounded parameters at every new best epoch.
    std::function<void(int epoch, const model::ModelParams&)> on_checkpoint;
    std::function<void(const EpochRecord&)> on_epoch;
};

namespace detail {

inline constexpr std::size_t kGradientChunk = 4;

struct BatchStep {
    double loss_sum = 0.0;
    std::size_t correct = 0;
};

/// Accumulates mean-over-batch gradients. Items are grouped in fixed chunks so
/// the summation order does not depend on the number of threads.
inline BatchStep batch_gradients(const model::ModelParams& p, const LabeledSet& data,
                                 const std::vector<std::size_t>& items, std::uint64_t dropout_seed,
                                 std::size_t first_position, int jobs, model::Gradients& total) {
    const double scale = 1.0 / static_cast<double>(items.size());
    const std::size_t chunks = (items.size() + kGradientChunk - 1) / kGradientChunk;
    std::vector<model::Gradients> partial(chunks);
    std::vector<double> losses(items.size());
    std::vector<char> hits(items.size());
    parallel_for(chunks, jobs, [&](std::size_t c) {
        const std::size_t lo = c * kGradientChunk, hi = std::min(items.size(), lo + kGradientChunk);
        for (std::size_t k = lo; k < hi; ++k) {
            const auto idx = items[k];
            const auto& seq = *data.seqs[idx];
            auto r = model::model_backward(seq, data.labels[idx], p, true, mix_seed(dropout_seed, first_position + k),
                                           scale);
            losses[k] = model::cross_entropy_loss(model::one_hot(data.labels[idx], p.config.num_classes), r.probs, p);
            hits[k] = model::argmax(r.probs) == data.labels[idx];
            if (k == lo) {
                partial[c] = std::move(r.grads);
            } else {
                partial[c] += r.grads;
            }
        }
    });
    total = std::move(partial[0]);
    for (std::size_t c = 1; c < chunks; ++c) total += partial[c];
    BatchStep s;
    for (std::size_t k = 0; k < items.size(); ++k) {
        s.loss_sum += losses[k];
        s.correct += hits[k] ? 1 : 0;
    }
    return s;
}

}  // namespace detail

/// Epoch loop: balanced resample, mini-batch Adam, validation, callbacks.
/// Returns the parameters from the best validation epoch, not the last one.
inline TrainResult fit(const LabeledSet& train_set, const LabeledSet& val_set, const TrainConfig& cfg,
                       const TrainHooks& hooks = {}) {
    cfg.validate();
    if (train_set.size() == 0) throw Error(ErrorKind::Validation, "training set is empty");
    if (val_set.size() == 0 && !hooks.validate) throw Error(ErrorKind::Validation, "validation set is empty");
    const int num_classes = cfg.model.num_classes;
    for (std::size_t i = 0; i < train_set.size(); ++i) {
        if (train_set.seqs[i]->dim() != cfg.model.input_dim) {
            throw Error(ErrorKind::Validation, "feature dimension mismatch for " + train_set.seqs[i]->video_id);
        }
    }

    auto params = model::initialize_params(cfg.model, mix_seed(cfg.seed, 1));
    auto adam = model::AdamState::for_params(params, cfg.learning_rate);
    PlateauCallbacks callbacks(cfg.callbacks);
    const std::size_t cap = cfg.cap_normal.value_or(default_cap_normal(train_set.labels, num_classes, cfg.normal_class));

    TrainResult result;
    result.best_params = model::round_to_float(params);
    auto& hist = result.history;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::vector<std::size_t> order;
        if (cfg.balance) {
            order = balanced_indices(train_set.labels, num_classes, cfg.normal_class, cap,
                                     mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch)));
        } else {
            order.resize(train_set.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            Rng(mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch))).shuffle(order);
        }
        const auto dropout_seed = mix_seed(cfg.seed, 2000000 + static_cast<std::uint64_t>(epoch));

        EpochRecord rec;
        rec.epoch = epoch;
        rec.learning_rate = adam.learning_rate;
        double loss_sum = 0.0;
        std::size_t correct = 0;
        const auto bs = static_cast<std::size_t>(cfg.batch_size);
        for (std::size_t start = 0; start < order.size(); start += bs) {
            std::vector<std::size_t> items(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + bs)));
            model::Gradients grads;
            const auto step = detail::batch_gradients(params, train_set, items, dropout_seed, start, cfg.jobs, grads);
            if (!std::isfinite(step.loss_sum) || !grads.all_finite()) {
                throw Error(ErrorKind::Numeric, "non-finite training loss at epoch " + std::to_string(epoch) +
                                                    ", batch " + std::to_string(start / bs + 1) +
                                                    " (first sample " + train_set.seqs[items.front()]->video_id + ")");
            }
            loss_sum += step.loss_sum;
            correct += step.correct;
            model::adam_step(params, grads, adam);
        }
        rec.train_loss = loss_sum / static_cast<double>(order.size());
        rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());

        const auto snapshot = model::round_to_float(params);
        if (hooks.validate) {
            std::tie(rec.val_loss, rec.val_accuracy) = hooks.validate(epoch, snapshot);
        } else {
            const auto ev = evaluate_model(snapshot, val_set, cfg.jobs);
            rec.val_loss = ev.loss;
            rec.val_accuracy = ev.accuracy;
        }
        if (!std::isfinite(rec.val_loss)) {
            throw Error(ErrorKind::Numeric, "non-finite validation loss at epoch " + std::to_string(epoch));
        }

        const auto decision = callbacks.on_epoch_end(rec.val_loss);
        rec.improved = decision.improved;
        rec.lr_reduced = decision.reduce_lr;
        if (decision.improved) {
            hist.best_epoch = epoch;
            hist.best_val_loss = rec.val_loss;
            result.best_params = snapshot;
            if (hooks.on_checkpoint) hooks.on_checkpoint(epoch, snapshot);
        }
        if (decision.reduce_lr) {
            adam.learning_rate = std::max(adam.learning_rate * cfg.callbacks.lr_reduce_factor,
                                          cfg.callbacks.min_learning_rate);
        }
        hist.epochs.push_back(rec);
        if (hooks.on_epoch) hooks.on_epoch(rec);
        if (decision.stop) {
            hist.early_stopped = true;
            break;
        }
    }
    return result;
}

/// Manifest-level training: loads features, fits, and writes the best
/// checkpoint to `checkpoint_path` at every improvement.
inline model::Checkpoint train(const DatasetManifest& train_m, const DatasetManifest& val_m, FeatureStore& store,
                               TrainConfig cfg, const std::optional<std::filesystem::path>& checkpoint_path,
                               TrainHistory* history_out = nullptr) {
    const auto train_set = labeled_set(train_m, store);
    const auto val_set = labeled_set(val_m, store);
    if (train_set.size() == 0) throw Error(ErrorKind::Validation, "training set is empty");
    cfg.model.input_dim = train_set.seqs.front()->dim();
    cfg.model.num_classes = static_cast<int>(train_m.classes.size());
    cfg.normal_class.reset();
    if (auto n = train_m.classes.find("Normal")) cfg.normal_class = static_cast<int>(*n);

    model::Checkpoint ck;
    ck.class_labels = train_m.classes.labels();
    TrainHooks hooks;
    if (checkpoint_path) {
        hooks.on_checkpoint = [&](int, const model::ModelParams& p) {
            save_checkpoint(*checkpoint_path, model::Checkpoint{p, ck.class_labels});
        };
    }
    auto result = fit(train_set, val_set, cfg, hooks);
    ck.params = std::move(result.best_params);
    if (history_out) *history_out = std::move(result.history);
    return ck;
}

}  // namespace hcad::train

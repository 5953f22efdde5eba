#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "hcad/core/error.hpp"
#include "hcad/core/manifest.hpp"
#include "hcad/core/text.hpp"
#include "hcad/train/split.hpp"
#include "hcad/train/trainer.hpp"

namespace hcad::train {

struct SampleStats {
    double mean = 0.0;
    double sample_std = 0.0;      // n-1 denominator; 0 for a single value
    double population_std = 0.0;  // n denominator
};

inline SampleStats sample_stats(const std::vector<double>& v) {
    if (v.empty()) throw Error(ErrorKind::Validation, "no values to summarize");
    SampleStats s;
    const double n = static_cast<double>(v.size());
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.population_std = std::sqrt(ss / n);
    s.sample_std = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    return s;
}

struct TrialResult {
    std::uint64_t seed = 0;
    double accuracy = 0.0;  // percent
    double loss = 0.0;
    int best_epoch = 0;
    int epochs_run = 0;
};

struct TrialSummary {
    std::vector<TrialResult> trials;
    SampleStats accuracy;
    SampleStats loss;

    std::string to_text() const {
        std::string out = "| Run | Accuracy (%) | Test Loss |\n|---|---|---|\n";
        for (std::size_t i = 0; i < trials.size(); ++i) {
            out += "| " + std::to_string(i + 1) + " | " + text::fixed(trials[i].accuracy, 2) + " | " +
                   text::fixed(trials[i].loss, 2) + " |\n";
        }
        out += "| Mean ± sample std | " + text::fixed(accuracy.mean, 2) + " ± " + text::fixed(accuracy.sample_std, 2) +
               " | " + text::fixed(loss.mean, 2) + " ± " + text::fixed(loss.sample_std, 2) + " |\n";
        out += "| Mean ± population std | " + text::fixed(accuracy.mean, 2) + " ± " +
               text::fixed(accuracy.population_std, 2) + " | " + text::fixed(loss.mean, 2) + " ± " +
               text::fixed(loss.population_std, 2) + " |\n";
        return out;
    }

    std::string to_csv() const {
        std::string out = "trial,seed,accuracy,loss,best_epoch,epochs_run\n";
        for (std::size_t i = 0; i < trials.size(); ++i) {
            const auto& t = trials[i];
            out += std::to_string(i + 1) + "," + std::to_string(t.seed) + "," + text::exact(t.accuracy) + "," +
                   text::exact(t.loss) + "," + std::to_string(t.best_epoch) + "," + std::to_string(t.epochs_run) + "\n";
        }
        return out;
    }
};

inline TrialSummary summarize_trials(std::vector<TrialResult> trials) {
    TrialSummary s;
    std::vector<double> acc, loss;
    for (const auto& t : trials) {
        acc.push_back(t.accuracy);
        loss.push_back(t.loss);
    }
    s.accuracy = sample_stats(acc);
    s.loss = sample_stats(loss);
    s.trials = std::move(trials);
    return s;
}

struct TrialConfig {
    TrainConfig train;
    double test_fraction = 0.15;
    double validation_fraction = 0.15;
};

/// Seeds for n trials derived from one base seed.
inline std::vector<std::uint64_t> trial_seeds(std::uint64_t base, int n) {
    if (n < 1) throw Error(ErrorKind::Config, "n_trials must be >= 1");
    std::vector<std::uint64_t> out;
    for (int i = 0; i < n; ++i) out.push_back(mix_seed(base, 500 + static_cast<std::uint64_t>(i)));
    return out;
}

/// Each trial re-splits with its own seed, trains on train minus a validation
/// carve, and evaluates the best checkpoint on its test split.
inline TrialSummary run_trials(const DatasetManifest& m, FeatureStore& store, const TrialConfig& cfg,
                               const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw Error(ErrorKind::Config, "n_trials must be >= 1");
    std::vector<TrialResult> results;
    for (auto seed : seeds) {
        auto [train_full, test] = stratified_split(m, {cfg.test_fraction, seed, true});
        auto [train_m, val_m] = stratified_split(train_full, {cfg.validation_fraction, mix_seed(seed, 77), true});
        auto tc = cfg.train;
        tc.seed = seed;
        TrainHistory hist;
        const auto ck = train(train_m, val_m, store, tc, std::nullopt, &hist);
        const auto ev = evaluate_model(ck.params, labeled_set(test, store), tc.jobs);
        results.push_back({seed, 100.0 * ev.accuracy, ev.loss, hist.best_epoch, static_cast<int>(hist.epochs.size())});
    }
    return summarize_trials(std::move(results));
}

}  // namespace hcad::train

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "hcad/model/checkpoint.hpp"
#include "hcad/train/balance.hpp"
#include "hcad/train/batches.hpp"
#include "hcad/train/callbacks.hpp"
#include "hcad/train/split.hpp"
#include "hcad/train/trainer.hpp"
#include "hcad/train/trials.hpp"
#include "temp_dir.hpp"

using namespace hcad;
using namespace hcad::train;

namespace {

DatasetManifest manifest_with(const std::vector<std::pair<std::string, int>>& counts,
                              const ClassSet& classes = ClassSet::defaults()) {
    DatasetManifest m;
    m.classes = classes;
    int id = 0;
    for (const auto& [label, n] : counts) {
        for (int i = 0; i < n; ++i) m.entries.push_back({"v" + std::to_string(id++), label, "frames", std::nullopt});
    }
    return m;
}

std::map<std::string, int> count_labels(const std::vector<ManifestEntry>& entries) {
    std::map<std::string, int> out;
    for (const auto& e : entries) ++out[e.class_label];
    return out;
}

/// Small separable corpus held entirely in a FeatureStore.
struct SyntheticCorpus {
    DatasetManifest manifest;
    std::unique_ptr<FeatureStore> store;
};

SyntheticCorpus synthetic_corpus(int per_class, int dim, std::uint64_t seed, const std::filesystem::path& root = "unused") {
    SyntheticCorpus c;
    c.store = std::make_unique<FeatureStore>(root);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    const auto classes = ClassSet::defaults();
    std::vector<std::vector<double>> centers(classes.size(), std::vector<double>(static_cast<std::size_t>(dim)));
    for (auto& ctr : centers) {
        for (auto& v : ctr) v = n(rng);
    }
    int id = 0;
    for (std::size_t k = 0; k < classes.size(); ++k) {
        const int count = k == 0 ? 2 * per_class : per_class;  // Normal is the majority class
        for (int i = 0; i < count; ++i) {
            const std::string vid = "s" + std::to_string(id++);
            const int valid = 4 + static_cast<int>(rng() % 3);
            features::FeatureSequence seq{vid, classes.label(k), valid, features::FeatureMatrix::Zero(6, dim)};
            for (int t = 0; t < valid; ++t) {
                for (int d = 0; d < dim; ++d) seq.matrix(t, d) = static_cast<float>(centers[k][static_cast<std::size_t>(d)] + 0.4 * n(rng));
            }
            c.store->put(seq);
            c.manifest.entries.push_back({vid, classes.label(k), "frames/" + vid, std::nullopt});
        }
    }
    return c;
}

TrainConfig small_train_config(int dim) {
    TrainConfig cfg;
    cfg.model = model::ModelConfig::bilstm(dim, 5);
    cfg.model.units1 = 6;
    cfg.model.units2 = 4;
    cfg.model.dense_units = 8;
    cfg.learning_rate = 1e-2;
    cfg.batch_size = 8;
    cfg.max_epochs = 12;
    cfg.seed = 3;
    return cfg;
}

}  // namespace

// ---------------------------------------------------------------- split

TEST(Split, SingleClassHundredSamples) {
    const auto m = manifest_with({{"Normal", 100}}, ClassSet({"Normal"}));
    const auto [train, test] = stratified_split(m, {0.15, 1, true});
    EXPECT_EQ(test.entries.size(), 15u);
    EXPECT_EQ(train.entries.size(), 85u);
}

TEST(Split, FiveClassSupports) {
    const auto m = manifest_with({{"Arson", 208}, {"Burglary", 866}, {"Explosion", 179}, {"Fighting", 273}, {"Normal", 1974}});
    const auto [train, test] = stratified_split(m, {0.15, 11, true});
    const auto counts = count_labels(test.entries);
    EXPECT_EQ(counts.at("Arson"), 31);
    EXPECT_EQ(counts.at("Burglary"), 130);
    EXPECT_EQ(counts.at("Explosion"), 27);
    EXPECT_EQ(counts.at("Fighting"), 41);
    EXPECT_EQ(counts.at("Normal"), 296);
    // The expected counts follow from round(0.15 n) per class.
    for (auto [n, k] : std::vector<std::pair<int, int>>{{208, 31}, {866, 130}, {179, 27}, {273, 41}, {1974, 296}}) {
        EXPECT_EQ(static_cast<int>(std::lround(0.15 * n)), k);
    }
}

TEST(Split, DeterministicUnderSeedAndSeedSensitive) {
    const auto m = manifest_with({{"Normal", 40}, {"Arson", 20}, {"Burglary", 20}, {"Fighting", 20}, {"Explosion", 20}});
    EXPECT_EQ(stratified_split(m, {0.15, 5, true}), stratified_split(m, {0.15, 5, true}));
    EXPECT_NE(stratified_split(m, {0.15, 5, true}).second, stratified_split(m, {0.15, 6, true}).second);
}

TEST(Split, DisjointExhaustiveAndWithinOneSample) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::pair<std::string, int>> counts;
        const auto classes = ClassSet::defaults();
        for (const auto& l : classes.labels()) counts.emplace_back(l, 2 + static_cast<int>(rng() % 60));
        const auto m = manifest_with(counts);
        const auto [train, test] = stratified_split(m, {0.15, static_cast<std::uint64_t>(trial), true});
        std::set<std::string> a, b;
        for (const auto& e : train.entries) a.insert(e.video_id);
        for (const auto& e : test.entries) b.insert(e.video_id);
        EXPECT_EQ(a.size() + b.size(), m.entries.size());
        for (const auto& id : b) EXPECT_FALSE(a.count(id));
        const auto tc = count_labels(test.entries);
        for (const auto& [label, n] : counts) {
            EXPECT_LE(std::abs(tc.at(label) - 0.15 * n), 1.0) << label << " n=" << n;
            EXPECT_GE(tc.at(label), 1);
        }
    }
}

TEST(Split, ClassWithFewerThanTwoSamplesIsError) {
    const auto m = manifest_with({{"Normal", 10}, {"Arson", 1}, {"Burglary", 5}, {"Fighting", 5}, {"Explosion", 5}});
    try {
        stratified_split(m, {0.15, 1, true});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Validation);
        EXPECT_NE(std::string(e.what()).find("Arson"), std::string::npos);
    }
}

TEST(Split, InvalidFractionRejected) {
    const auto m = manifest_with({{"Normal", 10}}, ClassSet({"Normal"}));
    EXPECT_THROW(stratified_split(m, {0.0, 1, true}), Error);
    EXPECT_THROW(stratified_split(m, {1.0, 1, true}), Error);
}

TEST(Split, UnstratifiedUsesWholeDataset) {
    const auto m = manifest_with({{"Normal", 90}, {"Arson", 10}}, ClassSet({"Normal", "Arson"}));
    const auto [train, test] = stratified_split(m, {0.15, 1, false});
    EXPECT_EQ(test.entries.size(), 15u);
}

// ---------------------------------------------------------------- balance

TEST(Balance, EqualClassesUnderCapAreUnchanged) {
    const auto m = manifest_with({{"Normal", 7}, {"Burglary", 7}, {"Fighting", 7}, {"Arson", 7}, {"Explosion", 7}});
    const auto epoch = build_balanced_epoch(m, 10, 3);
    for (const auto& [label, n] : count_labels(epoch)) EXPECT_EQ(n, 7) << label;
    std::set<std::string> ids;
    for (const auto& e : epoch) ids.insert(e.video_id);
    EXPECT_EQ(ids.size(), 35u);
}

TEST(Balance, NormalCappedArsonOversampled) {
    const ClassSet classes({"Normal", "Arson"});
    const auto m = manifest_with({{"Normal", 1000}, {"Arson", 100}}, classes);
    const auto epoch = build_balanced_epoch(m, 300, 9);
    const auto counts = count_labels(epoch);
    EXPECT_EQ(counts.at("Normal"), 300);
    EXPECT_EQ(counts.at("Arson"), 300);
    std::set<std::string> normal_ids, arson_ids;
    for (const auto& e : epoch) (e.class_label == "Normal" ? normal_ids : arson_ids).insert(e.video_id);
    EXPECT_EQ(normal_ids.size(), 300u);  // without replacement
    EXPECT_EQ(arson_ids.size(), 100u);   // every original kept, rest repeats
}

TEST(Balance, DifferentSeedsReorderSameCounts) {
    const auto m = manifest_with({{"Normal", 50}, {"Burglary", 20}, {"Fighting", 9}, {"Arson", 5}, {"Explosion", 3}});
    const auto a = build_balanced_epoch(m, 25, 1), b = build_balanced_epoch(m, 25, 2);
    EXPECT_NE(a, b);
    EXPECT_EQ(count_labels(a), count_labels(b));
    EXPECT_EQ(a, build_balanced_epoch(m, 25, 1));
}

TEST(Balance, CountsInvariantOnRandomManifests) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::pair<std::string, int>> counts;
        const auto classes = ClassSet::defaults();
        for (const auto& l : classes.labels()) counts.emplace_back(l, 1 + static_cast<int>(rng() % 40));
        const auto m = manifest_with(counts);
        const std::size_t cap = 1 + rng() % 50;
        const auto c = count_labels(build_balanced_epoch(m, cap, static_cast<std::uint64_t>(trial)));
        EXPECT_LE(static_cast<std::size_t>(c.at("Normal")), cap);
        const int anomaly = c.at("Burglary");
        for (const char* l : {"Fighting", "Arson", "Explosion"}) EXPECT_EQ(c.at(l), anomaly);
        EXPECT_GE(anomaly, c.at("Normal"));
    }
}

TEST(Balance, EmptyClassOrZeroCapIsError) {
    const auto m = manifest_with({{"Normal", 5}, {"Burglary", 5}});
    EXPECT_THROW(build_balanced_epoch(m, 5, 1), Error);
    const auto full = manifest_with({{"Normal", 5}, {"Burglary", 5}, {"Fighting", 5}, {"Arson", 5}, {"Explosion", 5}});
    EXPECT_THROW(build_balanced_epoch(full, 0, 1), Error);
}

TEST(Balance, DefaultCapIsLargestAnomalyClass) {
    EXPECT_EQ(default_cap_normal({0, 0, 0, 0, 1, 1, 2, 2, 2, 3, 4}, 5, 0), 3u);
}

// ---------------------------------------------------------------- batches

TEST(Batches, TenSamplesBatchFourGivesFourFourTwo) {
    auto corpus = synthetic_corpus(2, 4, 1);
    corpus.manifest.entries.resize(10);
    auto it = batch_iterator(corpus.manifest.entries, 4, *corpus.store);
    EXPECT_EQ(it.batch_count(), 3u);
    std::vector<std::size_t> sizes;
    while (auto b = it.next()) {
        sizes.push_back(b->size());
        for (Eigen::Index r = 0; r < b->one_hot.rows(); ++r) EXPECT_DOUBLE_EQ(b->one_hot.row(r).sum(), 1.0);
        EXPECT_EQ(b->one_hot.cols(), 5);
    }
    EXPECT_EQ(sizes, (std::vector<std::size_t>{4, 4, 2}));
}

TEST(Batches, RepeatIterationIsIdentical) {
    auto corpus = synthetic_corpus(2, 4, 2);
    const auto samples = build_balanced_epoch(corpus.manifest, 2, 7);
    auto collect = [&] {
        std::vector<std::string> ids;
        auto it = batch_iterator(samples, 3, *corpus.store);
        while (auto b = it.next()) {
            for (auto* f : b->features) ids.push_back(f->video_id);
        }
        return ids;
    };
    EXPECT_EQ(collect(), collect());
}

TEST(Batches, MissingCacheNamesVideo) {
    test::TempDir dir;
    FeatureStore store(dir.path());
    std::vector<ManifestEntry> samples{{"arson_042", "Arson", "f", std::nullopt}};
    auto it = batch_iterator(samples, 2, store);
    try {
        it.next();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingDependency);
        EXPECT_NE(std::string(e.what()).find("arson_042"), std::string::npos);
    }
}

TEST(Batches, LoadsFromCacheDirectory) {
    test::TempDir dir;
    features::FeatureSequence seq{"a1", "Arson", 2, features::FeatureMatrix::Ones(3, 4)};
    features::store_features(seq, features::feature_path(dir.path(), "a1"));
    FeatureStore store(dir.path(), 4);
    const auto& got = store.get({"a1", "Arson", "f", std::nullopt});
    EXPECT_EQ(got.valid_length, 2);
    EXPECT_EQ(&got, &store.get({"a1", "Arson", "f", std::nullopt}));
}

// ---------------------------------------------------------------- callbacks

TEST(Callbacks, StrictlyDecreasingNeverReducesOrStops) {
    PlateauCallbacks cb;
    for (int e = 1; e <= 20; ++e) {
        const auto d = cb.on_epoch_end(1.0 / e);
        EXPECT_TRUE(d.improved);
        EXPECT_FALSE(d.reduce_lr);
        EXPECT_FALSE(d.stop);
    }
}

TEST(Callbacks, FlatFromEpochFiveTrace) {
    PlateauCallbacks cb;
    std::vector<int> reductions;
    int stopped = 0, best = 0;
    for (int e = 1; e <= 30 && !stopped; ++e) {
        const double loss = e <= 5 ? 1.0 - 0.1 * e : 0.5;
        const auto d = cb.on_epoch_end(loss);
        if (d.improved) best = e;
        if (d.reduce_lr) reductions.push_back(e);
        if (d.stop) stopped = e;
    }
    EXPECT_EQ(best, 5);
    ASSERT_FALSE(reductions.empty());
    EXPECT_EQ(reductions.front(), 8);
    EXPECT_EQ(reductions, (std::vector<int>{8, 11}));
    EXPECT_EQ(stopped, 13);
}

TEST(Callbacks, InvalidConfigRejected) {
    EXPECT_THROW(PlateauCallbacks(CallbackConfig{0, 0.5, 3}), Error);
    EXPECT_THROW(PlateauCallbacks(CallbackConfig{8, 1.0, 3}), Error);
}

namespace {

/// Runs `fit` with a scripted validation loss and returns the history.
TrainHistory scripted_fit(const std::function<double(int)>& val_loss, int max_epochs) {
    auto corpus = synthetic_corpus(2, 4, 5);
    const auto set = labeled_set(corpus.manifest, *corpus.store);
    auto cfg = small_train_config(4);
    cfg.max_epochs = max_epochs;
    TrainHooks hooks;
    hooks.validate = [&](int epoch, const model::ModelParams&) { return std::make_pair(val_loss(epoch), 0.5); };
    return fit(set, {}, cfg, hooks).history;
}

}  // namespace

TEST(Fit, StrictlyDecreasingRunsAllEpochs) {
    const auto h = scripted_fit([](int e) { return 2.0 - 0.05 * e; }, 20);
    EXPECT_EQ(h.epochs.size(), 20u);
    EXPECT_EQ(h.best_epoch, 20);
    EXPECT_FALSE(h.early_stopped);
    for (const auto& e : h.epochs) EXPECT_DOUBLE_EQ(e.learning_rate, 1e-2);
}

TEST(Fit, FlatFromEpochFiveHalvesAtEightStopsAtThirteen) {
    const auto h = scripted_fit([](int e) { return e <= 5 ? 1.0 - 0.1 * e : 0.5; }, 100);
    EXPECT_EQ(h.best_epoch, 5);
    EXPECT_TRUE(h.early_stopped);
    ASSERT_EQ(h.epochs.size(), 13u);
    EXPECT_TRUE(h.epochs[7].lr_reduced);
    for (int e = 1; e <= 8; ++e) EXPECT_DOUBLE_EQ(h.epochs[static_cast<std::size_t>(e - 1)].learning_rate, 1e-2);
    for (int e = 9; e <= 11; ++e) EXPECT_DOUBLE_EQ(h.epochs[static_cast<std::size_t>(e - 1)].learning_rate, 5e-3);
    EXPECT_DOUBLE_EQ(h.epochs[11].learning_rate, 2.5e-3);
}

TEST(Fit, NeverRunsMoreThanPatiencePastBest) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> losses(60);
        for (auto& l : losses) l = std::uniform_real_distribution<double>(0, 1)(rng);
        const auto h = scripted_fit([&](int e) { return losses[static_cast<std::size_t>(e - 1)]; }, 60);
        EXPECT_LE(static_cast<int>(h.epochs.size()) - h.best_epoch, 8);
        double best = 1e9;
        for (const auto& e : h.epochs) best = std::min(best, e.val_loss);
        EXPECT_EQ(h.best_val_loss, best);
        EXPECT_EQ(h.epochs[static_cast<std::size_t>(h.best_epoch - 1)].val_loss, best);
    }
}

TEST(Fit, NonFiniteValidationLossAborts) {
    try {
        scripted_fit([](int e) { return e == 3 ? std::nan("") : 1.0 / e; }, 10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Numeric);
        EXPECT_NE(std::string(e.what()).find("epoch 3"), std::string::npos);
    }
}

TEST(Fit, NonFiniteFeaturesAbortWithDiagnostic) {
    auto corpus = synthetic_corpus(2, 4, 6);
    auto bad = corpus.store->get(corpus.manifest.entries[0]);
    bad.matrix(0, 0) = std::numeric_limits<float>::infinity();
    corpus.store->put(bad);
    const auto set = labeled_set(corpus.manifest, *corpus.store);
    try {
        fit(set, set, small_train_config(4));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Numeric);
        EXPECT_NE(std::string(e.what()).find("non-finite training loss at epoch"), std::string::npos) << e.what();
    }
}

TEST(Fit, ResultDoesNotDependOnThreadCount) {
    auto corpus = synthetic_corpus(3, 5, 7);
    const auto set = labeled_set(corpus.manifest, *corpus.store);
    auto cfg = small_train_config(5);
    cfg.max_epochs = 3;
    const auto a = fit(set, set, cfg);
    cfg.jobs = 3;
    const auto b = fit(set, set, cfg);
    EXPECT_TRUE(a.best_params == b.best_params);
    EXPECT_EQ(a.history.to_csv(), b.history.to_csv());
}

TEST(Fit, LearnsSeparableSyntheticSet) {
    auto corpus = synthetic_corpus(6, 8, 9);
    const auto set = labeled_set(corpus.manifest, *corpus.store);
    auto cfg = small_train_config(8);
    cfg.max_epochs = 60;
    const auto r = fit(set, set, cfg);
    EXPECT_GE(evaluate_model(r.best_params, set).accuracy, 0.99);
}

// ---------------------------------------------------------------- checkpoint fidelity

TEST(Train, ReloadedCheckpointReproducesBestValidationLoss) {
    test::TempDir dir;
    auto corpus = synthetic_corpus(5, 6, 10);
    const auto [train_m, val_m] = stratified_split(corpus.manifest, {0.3, 4, true});
    TrainHistory hist;
    const auto ck_path = dir.path() / "best.seqc";
    const auto ck = hcad::train::train(train_m, val_m, *corpus.store, small_train_config(6), ck_path, &hist);
    ASSERT_TRUE(std::filesystem::exists(ck_path));
    const auto loaded = model::load_checkpoint(ck_path);
    EXPECT_TRUE(loaded == ck);
    EXPECT_EQ(loaded.class_labels, ClassSet::defaults().labels());
    const auto ev = evaluate_model(loaded.params, labeled_set(val_m, *corpus.store));
    EXPECT_EQ(ev.loss, hist.best_val_loss);
}

TEST(Train, HistoryCsvHasOneRowPerEpoch) {
    auto corpus = synthetic_corpus(3, 4, 11);
    TrainHistory hist;
    hcad::train::train(corpus.manifest, corpus.manifest, *corpus.store, small_train_config(4), std::nullopt, &hist);
    const auto csv = hist.to_csv();
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), hist.epochs.size() + 1);
    EXPECT_EQ(csv.rfind("epoch,train_loss,train_accuracy,val_loss,val_accuracy,learning_rate\n", 0), 0u);
}

// ---------------------------------------------------------------- trials

TEST(Trials, ThreeTrialMeans) {
    const auto acc = sample_stats({92.80, 92.95, 91.48});
    EXPECT_NEAR(acc.mean, 92.41, 0.005);
    const std::vector<double> xs{92.80, 92.95, 91.48};
    double ss = 0.0;
    for (double x : xs) ss += (x - acc.mean) * (x - acc.mean);
    EXPECT_NEAR(acc.sample_std, std::sqrt(ss / 2.0), 1e-12);
    EXPECT_NEAR(acc.population_std, std::sqrt(ss / 3.0), 1e-12);
    // Sample and population conventions bracket a reported 0.76.
    EXPECT_GT(acc.sample_std, 0.76);
    EXPECT_LT(acc.population_std, 0.76);
    const auto loss = sample_stats({0.24, 0.26, 0.31});
    EXPECT_NEAR(loss.mean, 0.27, 0.005);
}

TEST(Trials, IdenticalTrialsHaveZeroStd) {
    const auto s = summarize_trials({{1, 90.0, 0.3, 4, 9}, {2, 90.0, 0.3, 5, 10}, {3, 90.0, 0.3, 6, 11}});
    EXPECT_DOUBLE_EQ(s.accuracy.sample_std, 0.0);
    EXPECT_DOUBLE_EQ(s.loss.population_std, 0.0);
    EXPECT_NE(s.to_text().find("90.00 ± 0.00"), std::string::npos);
    EXPECT_EQ(s.to_csv().rfind("trial,seed,accuracy,loss,best_epoch,epochs_run\n", 0), 0u);
}

TEST(Trials, SummaryTextShowsBothStdConventions) {
    const auto s = summarize_trials({{1, 92.80, 0.24, 1, 1}, {2, 92.95, 0.26, 1, 1}, {3, 91.48, 0.31, 1, 1}});
    const auto txt = s.to_text();
    EXPECT_NE(txt.find("92.41 ± 0.81"), std::string::npos) << txt;
    EXPECT_NE(txt.find("92.41 ± 0.66"), std::string::npos) << txt;
}

TEST(Trials, RunTrialsIsDeterministicAndUsesDistinctSeeds) {
    auto corpus = synthetic_corpus(8, 4, 12);
    TrialConfig cfg;
    cfg.train = small_train_config(4);
    cfg.train.max_epochs = 4;
    const auto seeds = trial_seeds(1, 3);
    EXPECT_EQ(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size(), 3u);
    const auto a = run_trials(corpus.manifest, *corpus.store, cfg, seeds);
    const auto b = run_trials(corpus.manifest, *corpus.store, cfg, seeds);
    ASSERT_EQ(a.trials.size(), 3u);
    EXPECT_EQ(a.to_csv(), b.to_csv());
    for (const auto& t : a.trials) {
        EXPECT_GE(t.accuracy, 0.0);
        EXPECT_LE(t.accuracy, 100.0);
        EXPECT_GT(t.loss, 0.0);
    }
    EXPECT_THROW(trial_seeds(1, 0), Error);
}

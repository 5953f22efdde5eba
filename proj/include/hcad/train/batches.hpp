#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hcad/core/error.hpp"
#include "hcad/core/manifest.hpp"
#include "hcad/features/feature_cache.hpp"
#include "hcad/model/params.hpp"

namespace hcad::train {

/// Loads feature files on first use and keeps them in memory.
class FeatureStore {
public:
    explicit FeatureStore(std::filesystem::path cache_root, std::optional<std::size_t> expected_dim = std::nullopt)
        : root_(std::move(cache_root)), expected_dim_(expected_dim) {}

    std::filesystem::path path_for(const ManifestEntry& e) const {
        if (e.feature_path) return resolve_path(root_, *e.feature_path);
        return features::feature_path(root_, e.video_id);
    }

    const features::FeatureSequence& get(const ManifestEntry& e) {
        {
            std::lock_guard lock(mu_);
            if (auto it = cache_.find(e.video_id); it != cache_.end()) return *it->second;
        }
        const auto path = path_for(e);
        if (!std::filesystem::exists(path)) {
            throw Error(ErrorKind::MissingDependency,
                        "missing feature cache for video " + e.video_id + ": " + path.string());
        }
        auto seq = std::make_shared<features::FeatureSequence>(features::load_features(path, expected_dim_));
        seq->video_id = e.video_id;
        std::lock_guard lock(mu_);
        return *cache_.emplace(e.video_id, std::move(seq)).first->second;
    }

    /// Stores a sequence directly, bypassing the filesystem.
    void put(features::FeatureSequence seq) {
        std::lock_guard lock(mu_);
        auto id = seq.video_id;
        cache_[id] = std::make_shared<features::FeatureSequence>(std::move(seq));
    }

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
    std::optional<std::size_t> expected_dim_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<features::FeatureSequence>> cache_;
};

struct Batch {
    std::vector<const features::FeatureSequence*> features;
    std::vector<int> labels;
    model::Mat one_hot;  // B x C

    std::size_t size() const { return labels.size(); }
};

/// Walks a sample list in order, batch_size at a time; the last batch may be short.
class BatchIterator {
public:
    BatchIterator(std::vector<ManifestEntry> samples, std::size_t batch_size, FeatureStore& store, ClassSet classes)
        : samples_(std::move(samples)), batch_size_(batch_size), store_(&store), classes_(std::move(classes)) {
        if (batch_size_ < 1) throw Error(ErrorKind::Config, "batch_size must be >= 1");
    }

    std::size_t batch_count() const { return (samples_.size() + batch_size_ - 1) / batch_size_; }

    std::optional<Batch> next() {
        if (pos_ >= samples_.size()) return std::nullopt;
        const std::size_t end = std::min(samples_.size(), pos_ + batch_size_);
        Batch b;
        b.one_hot = model::Mat::Zero(static_cast<Eigen::Index>(end - pos_), static_cast<Eigen::Index>(classes_.size()));
        for (std::size_t i = pos_; i < end; ++i) {
            const auto& e = samples_[i];
            const auto label = static_cast<int>(classes_.index_of(e.class_label));
            b.features.push_back(&store_->get(e));
            b.labels.push_back(label);
            b.one_hot(static_cast<Eigen::Index>(i - pos_), label) = 1.0;
        }
        pos_ = end;
        return b;
    }

    void reset() { pos_ = 0; }

private:
    std::vector<ManifestEntry> samples_;
    std::size_t batch_size_;
    FeatureStore* store_;
    ClassSet classes_;
    std::size_t pos_ = 0;
};

inline BatchIterator batch_iterator(std::vector<ManifestEntry> samples, std::size_t batch_size, FeatureStore& store,
                                    const ClassSet& classes = ClassSet::defaults()) {
    return BatchIterator(std::move(samples), batch_size, store, classes);
}

}  // namespace hcad::train

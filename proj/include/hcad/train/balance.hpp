#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hcad/core/error.hpp"
#include "hcad/core/manifest.hpp"
#include "hcad/core/random.hpp"

namespace hcad::train {

/// Index-level balancing. The class `normal_class` (if any) is down-sampled to
/// `cap_normal` without replacement; every other class keeps all its samples and
/// is topped up with replacement to the size of the largest post-cap class.
/// The result is shuffled.
inline std::vector<std::size_t> balanced_indices(const std::vector<int>& labels, int num_classes,
                                                 std::optional<int> normal_class, std::size_t cap_normal,
                                                 std::uint64_t seed) {
    if (cap_normal < 1) throw Error(ErrorKind::Config, "cap_normal must be >= 1");
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes) throw Error(ErrorKind::Validation, "label out of range");
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (int c = 0; c < num_classes; ++c) {
        if (by_class[static_cast<std::size_t>(c)].empty()) {
            throw Error(ErrorKind::Validation, "class index " + std::to_string(c) + " has no training samples");
        }
    }

    Rng rng(seed);
    if (normal_class) {
        auto& normal = by_class[static_cast<std::size_t>(*normal_class)];
        if (normal.size() > cap_normal) {
            rng.shuffle(normal);
            normal.resize(cap_normal);
            std::sort(normal.begin(), normal.end());
        }
    }
    std::size_t target = 0;
    for (const auto& g : by_class) target = std::max(target, g.size());

    std::vector<std::size_t> out;
    for (int c = 0; c < num_classes; ++c) {
        const auto& g = by_class[static_cast<std::size_t>(c)];
        out.insert(out.end(), g.begin(), g.end());
        if (normal_class && c == *normal_class) continue;
        for (std::size_t k = g.size(); k < target; ++k) out.push_back(g[rng.below(g.size())]);
    }
    rng.shuffle(out);
    return out;
}

/// One epoch's sample list for a training manifest.
inline std::vector<ManifestEntry> build_balanced_epoch(const DatasetManifest& train, std::size_t cap_normal,
                                                       std::uint64_t seed, const std::string& normal_label = "Normal") {
    std::vector<int> labels;
    labels.reserve(train.entries.size());
    for (const auto& e : train.entries) labels.push_back(static_cast<int>(train.label_index(e)));
    std::optional<int> normal;
    if (auto n = train.classes.find(normal_label)) normal = static_cast<int>(*n);
    const auto idx = balanced_indices(labels, static_cast<int>(train.classes.size()), normal, cap_normal, seed);
    std::vector<ManifestEntry> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(train.entries[i]);
    return out;
}

/// Default cap: the largest anomaly class of the training split.
inline std::size_t default_cap_normal(const std::vector<int>& labels, int num_classes, std::optional<int> normal_class) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    std::size_t cap = 0;
    for (int c = 0; c < num_classes; ++c) {
        if (normal_class && c == *normal_class) continue;
        cap = std::max(cap, counts[static_cast<std::size_t>(c)]);
    }
    return std::max<std::size_t>(cap, 1);
}

}  // namespace hcad::train

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcad/core/error.hpp"

namespace hcad::eval {

/// counts[i][j] = samples of true class i predicted as class j.
struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<std::int64_t>> counts;

    std::size_t classes() const { return counts.size(); }
    std::int64_t at(std::size_t i, std::size_t j) const { return counts.at(i).at(j); }

    std::int64_t total() const {
        std::int64_t n = 0;
        for (const auto& row : counts) {
            for (auto v : row) n += v;
        }
        return n;
    }

    std::int64_t trace() const {
        std::int64_t n = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) n += counts[i][i];
        return n;
    }

    std::int64_t row_sum(std::size_t i) const {
        std::int64_t n = 0;
        for (auto v : counts.at(i)) n += v;
        return n;
    }

    std::int64_t col_sum(std::size_t j) const {
        std::int64_t n = 0;
        for (const auto& row : counts) n += row.at(j);
        return n;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion_matrix(const std::vector<int>& y_true, const std::vector<int>& y_pred, int num_classes,
                                        std::vector<std::string> labels = {}) {
    if (num_classes < 1) throw Error(ErrorKind::Validation, "confusion matrix needs at least one class");
    if (y_true.size() != y_pred.size()) throw Error(ErrorKind::Validation, "label and prediction counts differ");
    if (!labels.empty() && static_cast<int>(labels.size()) != num_classes) {
        throw Error(ErrorKind::Validation, "label names do not match class count");
    }
    if (labels.empty()) {
        for (int c = 0; c < num_classes; ++c) labels.push_back("class_" + std::to_string(c));
    }
    ConfusionMatrix cm;
    cm.labels = std::move(labels);
    cm.counts.assign(static_cast<std::size_t>(num_classes), std::vector<std::int64_t>(static_cast<std::size_t>(num_classes), 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if (t < 0 || t >= num_classes || p < 0 || p >= num_classes) {
            throw Error(ErrorKind::Validation, "label out of range at sample " + std::to_string(i));
        }
        ++cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    return cm;
}

}  // namespace hcad::eval

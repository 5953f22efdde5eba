#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcad/core/error.hpp"
#include "hcad/eval/confusion.hpp"

namespace hcad::eval {

struct BinaryCounts {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }
    friend bool operator==(const BinaryCounts&, const BinaryCounts&) = default;
};

/// One-vs-rest reduction for class c.
inline BinaryCounts per_class_counts(const ConfusionMatrix& cm, std::size_t c) {
    if (c >= cm.classes()) throw Error(ErrorKind::Validation, "class index out of range");
    BinaryCounts b;
    b.tp = cm.at(c, c);
    b.fp = cm.col_sum(c) - b.tp;
    b.fn = cm.row_sum(c) - b.tp;
    b.tn = cm.total() - b.tp - b.fp - b.fn;
    return b;
}

/// A ratio whose zero denominator yields 0 and clears `defined`.
struct Ratio {
    double value = 0.0;
    bool defined = true;

    operator double() const { return value; }
};

inline Ratio safe_ratio(double num, double den) {
    if (den == 0.0) return {0.0, false};
    return {num / den, true};
}

inline Ratio accuracy(const BinaryCounts& b) {
    return safe_ratio(static_cast<double>(b.tp + b.tn), static_cast<double>(b.total()));
}
inline Ratio precision(const BinaryCounts& b) {
    return safe_ratio(static_cast<double>(b.tp), static_cast<double>(b.tp + b.fp));
}
inline Ratio recall(const BinaryCounts& b) {
    return safe_ratio(static_cast<double>(b.tp), static_cast<double>(b.tp + b.fn));
}
inline Ratio specificity(const BinaryCounts& b) {
    return safe_ratio(static_cast<double>(b.tn), static_cast<double>(b.tn + b.fp));
}

/// Harmonic mean of precision and recall.
inline Ratio f1_from(double p, double r) { return safe_ratio(2.0 * p * r, p + r); }

inline Ratio f1(const BinaryCounts& b) {
    const auto p = precision(b), r = recall(b);
    auto out = f1_from(p, r);
    out.defined = out.defined && p.defined && r.defined;
    return out;
}

struct ClassMetrics {
    std::string label;
    BinaryCounts counts;
    double accuracy = 0, precision = 0, recall = 0, specificity = 0, f1 = 0;
    std::int64_t support = 0;
    std::vector<std::string> undefined;  // metrics that hit a zero denominator
};

inline std::vector<ClassMetrics> class_metrics(const ConfusionMatrix& cm) {
    std::vector<ClassMetrics> out;
    for (std::size_t c = 0; c < cm.classes(); ++c) {
        ClassMetrics m;
        m.label = cm.labels.at(c);
        m.counts = per_class_counts(cm, c);
        m.support = cm.row_sum(c);
        const std::pair<const char*, Ratio> values[] = {{"accuracy", accuracy(m.counts)},
                                                        {"precision", precision(m.counts)},
                                                        {"recall", recall(m.counts)},
                                                        {"specificity", specificity(m.counts)},
                                                        {"f1", f1(m.counts)}};
        for (const auto& [name, r] : values) {
            if (!r.defined) m.undefined.emplace_back(name);
        }
        m.accuracy = values[0].second;
        m.precision = values[1].second;
        m.recall = values[2].second;
        m.specificity = values[3].second;
        m.f1 = values[4].second;
        out.push_back(std::move(m));
    }
    return out;
}

struct PRF {
    double precision = 0, recall = 0, f1 = 0;
};

struct Averages {
    PRF macro;
    PRF weighted;
};

inline Averages macro_weighted_averages(const std::vector<PRF>& per_class, const std::vector<double>& supports) {
    if (per_class.empty() || per_class.size() != supports.size()) {
        throw Error(ErrorKind::Validation, "need one support per class");
    }
    double total = 0.0;
    for (double s : supports) {
        if (s < 0) throw Error(ErrorKind::Validation, "supports must be non-negative");
        total += s;
    }
    if (total == 0.0) throw Error(ErrorKind::Validation, "all supports are zero");
    Averages a;
    const double n = static_cast<double>(per_class.size());
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        const auto& m = per_class[c];
        a.macro.precision += m.precision / n;
        a.macro.recall += m.recall / n;
        a.macro.f1 += m.f1 / n;
        const double w = supports[c] / total;
        a.weighted.precision += w * m.precision;
        a.weighted.recall += w * m.recall;
        a.weighted.f1 += w * m.f1;
    }
    return a;
}

inline Averages macro_weighted_averages(const std::vector<ClassMetrics>& metrics) {
    std::vector<PRF> prf;
    std::vector<double> supports;
    for (const auto& m : metrics) {
        prf.push_back({m.precision, m.recall, m.f1});
        supports.push_back(static_cast<double>(m.support));
    }
    return macro_weighted_averages(prf, supports);
}

}  // namespace hcad::eval

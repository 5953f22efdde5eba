#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "hcad/core/error.hpp"

namespace hcad::eval {

/// x is FPR (ROC) or recall (PR); y is TPR or precision. A sample is called
/// positive when score >= threshold.
struct CurvePoint {
    double threshold = 0.0;
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

namespace detail {

struct ThresholdCounts {
    double threshold;
    double tp;
    double fp;
};

/// Cumulative (tp, fp) at each unique score, highest score first.
inline std::vector<ThresholdCounts> sweep(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw Error(ErrorKind::Validation, "scores and labels differ in length");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    std::vector<ThresholdCounts> out;
    double tp = 0, fp = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto i = order[k];
        (labels[i] ? tp : fp) += 1.0;
        if (k + 1 == order.size() || scores[order[k + 1]] != scores[i]) out.push_back({scores[i], tp, fp});
    }
    return out;
}

}  // namespace detail

inline std::vector<CurvePoint> roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
    const auto pos = static_cast<double>(std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; }));
    const auto neg = static_cast<double>(labels.size()) - pos;
    if (pos == 0 || neg == 0) {
        throw Error(ErrorKind::Validation, "ROC needs at least one positive and one negative sample");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<CurvePoint> out{{inf, 0.0, 0.0}};
    for (const auto& t : detail::sweep(scores, labels)) out.push_back({t.threshold, t.fp / neg, t.tp / pos});
    out.push_back({-inf, 1.0, 1.0});
    return out;
}

/// The +inf sentinel sits at recall 0 with the precision of the highest threshold.
inline std::vector<CurvePoint> pr_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
    const auto pos = static_cast<double>(std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; }));
    if (pos == 0) throw Error(ErrorKind::Validation, "PR curve needs at least one positive sample");
    std::vector<CurvePoint> out;
    for (const auto& t : detail::sweep(scores, labels)) out.push_back({t.threshold, t.tp / pos, t.tp / (t.tp + t.fp)});
    out.insert(out.begin(), CurvePoint{std::numeric_limits<double>::infinity(), 0.0, out.front().y});
    return out;
}

/// Trapezoidal area over x; points must be ordered by non-decreasing x.
inline double auc(const std::vector<CurvePoint>& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        area += (curve[i].x - curve[i - 1].x) * (curve[i].y + curve[i - 1].y) * 0.5;
    }
    return area;
}

struct ClassCurves {
    std::string label;
    std::vector<CurvePoint> roc;
    std::vector<CurvePoint> pr;
    double roc_auc = 0.0;
    double pr_auc = 0.0;
};

/// One-vs-rest curves per class from an N x C score table. Classes without
/// both positives and negatives in `labels` are skipped.
inline std::vector<ClassCurves> one_vs_rest_curves(const std::vector<std::vector<double>>& scores,
                                                   const std::vector<int>& labels,
                                                   const std::vector<std::string>& class_labels) {
    std::vector<ClassCurves> out;
    for (std::size_t c = 0; c < class_labels.size(); ++c) {
        std::vector<double> s;
        std::vector<int> y;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            s.push_back(scores[i].at(c));
            y.push_back(labels[i] == static_cast<int>(c) ? 1 : 0);
        }
        const auto pos = std::count(y.begin(), y.end(), 1);
        if (pos == 0 || pos == static_cast<long>(y.size())) continue;
        ClassCurves cc;
        cc.label = class_labels[c];
        cc.roc = roc_curve(s, y);
        cc.pr = pr_curve(s, y);
        cc.roc_auc = auc(cc.roc);
        cc.pr_auc = auc(cc.pr);
        out.push_back(std::move(cc));
    }
    return out;
}

}  // namespace hcad::eval

#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hcad/core/binary_io.hpp"
#include "hcad/core/error.hpp"
#include "hcad/core/text.hpp"
#include "hcad/eval/confusion.hpp"
#include "hcad/eval/curves.hpp"
#include "hcad/eval/metrics.hpp"
#include "hcad/train/trainer.hpp"
#include "hcad/train/trials.hpp"

namespace hcad::eval {

struct ReportInputs {
    std::string title = "Evaluation report";
    ConfusionMatrix cm;
    std::vector<ClassMetrics> metrics;
    std::optional<Averages> averages;
    std::vector<ClassCurves> curves;
    std::optional<train::TrialSummary> trials;
    std::optional<train::TrainHistory> history;
};

/// Builds the metric rows straight from a confusion matrix.
inline ReportInputs report_inputs(ConfusionMatrix cm, std::vector<ClassCurves> curves = {}) {
    ReportInputs in;
    in.metrics = class_metrics(cm);
    if (cm.total() > 0) in.averages = macro_weighted_averages(in.metrics);
    in.cm = std::move(cm);
    in.curves = std::move(curves);
    return in;
}

/// Per-class precision/recall/F1/support table with macro and weighted rows,
/// classes in alphabetical order.
inline std::string metrics_table(const std::vector<ClassMetrics>& metrics, const std::optional<Averages>& avg) {
    std::vector<const ClassMetrics*> rows;
    for (const auto& m : metrics) rows.push_back(&m);
    std::stable_sort(rows.begin(), rows.end(), [](auto a, auto b) { return a->label < b->label; });
    std::string out = "| Class | Precision | Recall | F1-Score | Support |\n|---|---|---|---|---|\n";
    for (const auto* m : rows) {
        out += "| " + m->label + " | " + text::fixed(m->precision, 2) + " | " + text::fixed(m->recall, 2) + " | " +
               text::fixed(m->f1, 2) + " | " + std::to_string(m->support) + " |\n";
    }
    if (avg) {
        out += "| Macro Avg | " + text::fixed(avg->macro.precision, 2) + " | " + text::fixed(avg->macro.recall, 2) +
               " | " + text::fixed(avg->macro.f1, 2) + " | --- |\n";
        out += "| Weighted Avg | " + text::fixed(avg->weighted.precision, 2) + " | " +
               text::fixed(avg->weighted.recall, 2) + " | " + text::fixed(avg->weighted.f1, 2) + " | --- |\n";
    }
    return out;
}

inline std::string confusion_grid(const ConfusionMatrix& cm) {
    std::string out = "| true \\ predicted |";
    for (const auto& l : cm.labels) out += " " + l + " |";
    out += "\n|---|";
    for (std::size_t j = 0; j < cm.classes(); ++j) out += "---|";
    out += "\n";
    for (std::size_t i = 0; i < cm.classes(); ++i) {
        out += "| " + cm.labels[i] + " |";
        for (std::size_t j = 0; j < cm.classes(); ++j) out += " " + std::to_string(cm.at(i, j)) + " |";
        out += "\n";
    }
    return out;
}

inline std::string confusion_csv(const ConfusionMatrix& cm) {
    std::string out = "true";
    for (const auto& l : cm.labels) out += "," + l;
    out += "\n";
    for (std::size_t i = 0; i < cm.classes(); ++i) {
        out += cm.labels[i];
        for (std::size_t j = 0; j < cm.classes(); ++j) out += "," + std::to_string(cm.at(i, j));
        out += "\n";
    }
    return out;
}

inline std::string curve_csv(const std::vector<CurvePoint>& curve) {
    std::string out = "threshold,x,y\n";
    for (const auto& p : curve) out += text::exact(p.threshold) + "," + text::exact(p.x) + "," + text::exact(p.y) + "\n";
    return out;
}

inline std::string render_markdown(const ReportInputs& in) {
    std::string out = "# " + in.title + "\n\n";
    const auto total = in.cm.total();
    out += "Samples: " + std::to_string(total) + "\n\n";
    if (total > 0) {
        out += "Overall accuracy: " +
               text::fixed(100.0 * static_cast<double>(in.cm.trace()) / static_cast<double>(total), 2) + "%\n\n";
    }
    out += "## Per-class metrics\n\n" + metrics_table(in.metrics, in.averages) + "\n";

    std::vector<std::string> flags;
    for (const auto& m : in.metrics) {
        for (const auto& u : m.undefined) flags.push_back(m.label + " " + u);
    }
    if (!flags.empty()) {
        out += "Zero-denominator metrics reported as 0:";
        for (const auto& f : flags) out += " " + f + ";";
        out.back() = '\n';
        out += "\n";
    }

    out += "## Confusion matrix\n\n" + confusion_grid(in.cm) + "\n";

    out += "## Curves\n\n";
    if (in.curves.empty()) {
        out += "no curves\n\n";
    } else {
        out += "| Class | ROC AUC | PR AUC |\n|---|---|---|\n";
        for (const auto& c : in.curves) {
            out += "| " + c.label + " | " + text::fixed(c.roc_auc, 4) + " | " + text::fixed(c.pr_auc, 4) + " |\n";
        }
        out += "\n![ROC](roc.svg)\n![PR](pr.svg)\n\n";
    }

    if (in.trials) out += "## Trials\n\n" + in.trials->to_text() + "\n";
    if (in.history) {
        out += "## Training\n\nBest epoch " + std::to_string(in.history->best_epoch) + " of " +
               std::to_string(in.history->epochs.size()) + ", validation loss " +
               text::fixed(in.history->best_val_loss, 4) + ".\n\n![Training](training.svg)\n";
    }
    return out;
}

namespace svg {

inline const char* color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return palette[i % 10];
}

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

/// Line plot in a fixed 360x320 canvas; data coordinates map from the given ranges.
inline std::string line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                             const std::vector<Series>& series, double x0, double x1, double y0, double y1) {
    const double left = 50, top = 30, w = 220, h = 220;
    auto px = [&](double x) { return left + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.0) * w; };
    auto py = [&](double y) { return top + h - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.0) * h; };
    std::string out =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"360\" height=\"320\" font-family=\"sans-serif\" "
        "font-size=\"10\">\n<rect width=\"360\" height=\"320\" fill=\"white\"/>\n";
    out += text::format("<text x=\"%g\" y=\"18\" font-size=\"12\">%s</text>\n", left, title.c_str());
    out += text::format("<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n", left,
                        top, w, h);
    out += text::format("<text x=\"%g\" y=\"%g\">%s</text>\n", left + w / 2 - 20, top + h + 28, xlabel.c_str());
    out += text::format("<text x=\"12\" y=\"%g\" transform=\"rotate(-90 12 %g)\">%s</text>\n", top + h / 2 + 20,
                        top + h / 2 + 20, ylabel.c_str());
    out += text::format("<text x=\"%g\" y=\"%g\">%s</text><text x=\"%g\" y=\"%g\">%s</text>\n", left - 4, top + h + 12,
                        text::format("%g", x0).c_str(), left + w - 8, top + h + 12, text::format("%g", x1).c_str());
    out += text::format("<text x=\"%g\" y=\"%g\">%s</text><text x=\"%g\" y=\"%g\">%s</text>\n", left - 30, top + h,
                        text::format("%.3g", y0).c_str(), left - 30, top + 8, text::format("%.3g", y1).c_str());
    for (std::size_t s = 0; s < series.size(); ++s) {
        std::string pts;
        for (const auto& [x, y] : series[s].points) pts += text::format("%.2f,%.2f ", px(x), py(y));
        if (!pts.empty()) pts.pop_back();
        out += text::format("<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\" points=\"%s\"/>\n", color(s),
                            pts.c_str());
        const double ly = top + 10 + 14.0 * static_cast<double>(s);
        out += text::format("<line x1=\"280\" y1=\"%g\" x2=\"292\" y2=\"%g\" stroke=\"%s\" stroke-width=\"2\"/>", ly - 3,
                            ly - 3, color(s));
        out += text::format("<text x=\"296\" y=\"%g\">%s</text>\n", ly, series[s].name.c_str());
    }
    out += "</svg>\n";
    return out;
}

inline std::string confusion_heatmap(const ConfusionMatrix& cm) {
    const std::size_t n = cm.classes();
    const double cell = 40, left = 80, top = 30;
    const double size = left + cell * static_cast<double>(n) + 20;
    std::int64_t peak = 1;
    for (const auto& row : cm.counts) {
        for (auto v : row) peak = std::max(peak, v);
    }
    std::string out = text::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" font-family=\"sans-serif\" "
        "font-size=\"10\">\n<rect width=\"%g\" height=\"%g\" fill=\"white\"/>\n",
        size, size + 20, size, size + 20);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = top + cell * static_cast<double>(i);
        out += text::format("<text x=\"4\" y=\"%g\">%s</text>\n", y + cell / 2 + 3, cm.labels[i].c_str());
        out += text::format("<text x=\"%g\" y=\"%g\" transform=\"rotate(-45 %g %g)\">%s</text>\n",
                            left + cell * static_cast<double>(i) + 4, top - 4, left + cell * static_cast<double>(i) + 4,
                            top - 4, cm.labels[i].c_str());
        for (std::size_t j = 0; j < n; ++j) {
            const double x = left + cell * static_cast<double>(j);
            const int shade = 255 - static_cast<int>(200.0 * static_cast<double>(cm.at(i, j)) / static_cast<double>(peak));
            out += text::format("<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"rgb(%d,%d,255)\" "
                                "stroke=\"gray\"/><text x=\"%g\" y=\"%g\">%lld</text>\n",
                                x, y, cell, cell, shade, shade, x + 4, y + cell / 2 + 3,
                                static_cast<long long>(cm.at(i, j)));
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace svg

/// Writes report.md, confusion_matrix.csv/.svg, per-class curve CSVs and plots.
/// Output is a pure function of the inputs. Returns the files written.
inline std::vector<std::filesystem::path> render_report(const ReportInputs& in, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw Error(ErrorKind::Io, "cannot create report directory " + out_dir.string());
    }
    std::vector<std::filesystem::path> written;
    auto put = [&](const std::filesystem::path& rel, const std::string& content) {
        io::write_file_atomic(out_dir / rel, content);
        written.push_back(out_dir / rel);
    };
    put("report.md", render_markdown(in));
    put("confusion_matrix.csv", confusion_csv(in.cm));
    put("confusion_matrix.svg", svg::confusion_heatmap(in.cm));
    if (!in.curves.empty()) {
        std::vector<svg::Series> roc, pr;
        for (const auto& c : in.curves) {
            put("curves/roc_" + c.label + ".csv", curve_csv(c.roc));
            put("curves/pr_" + c.label + ".csv", curve_csv(c.pr));
            svg::Series r{c.label, {}}, p{c.label, {}};
            for (const auto& pt : c.roc) r.points.emplace_back(pt.x, pt.y);
            for (const auto& pt : c.pr) p.points.emplace_back(pt.x, pt.y);
            roc.push_back(std::move(r));
            pr.push_back(std::move(p));
        }
        put("roc.svg", svg::line_plot("ROC (one-vs-rest)", "false positive rate", "true positive rate", roc, 0, 1, 0, 1));
        put("pr.svg", svg::line_plot("Precision-recall", "recall", "precision", pr, 0, 1, 0, 1));
    }
    if (in.trials) put("trials.csv", in.trials->to_csv());
    if (in.history && !in.history->epochs.empty()) {
        svg::Series tl{"train loss", {}}, vl{"val loss", {}};
        double hi = 0.0;
        for (const auto& e : in.history->epochs) {
            tl.points.emplace_back(e.epoch, e.train_loss);
            vl.points.emplace_back(e.epoch, e.val_loss);
            hi = std::max({hi, e.train_loss, e.val_loss});
        }
        put("training.svg", svg::line_plot("Loss per epoch", "epoch", "loss", {tl, vl}, 1,
                                           static_cast<double>(in.history->epochs.size()), 0, hi));
        put("history.csv", in.history->to_csv());
    }
    return written;
}

}  // namespace hcad::eval

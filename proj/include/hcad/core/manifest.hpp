#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "hcad/core/binary_io.hpp"
#include "hcad/core/error.hpp"
#include "hcad/core/text.hpp"

namespace hcad {

/// Ordered set of class labels; a label's position is its class index.
class ClassSet {
public:
    ClassSet() = default;
    explicit ClassSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
        std::unordered_set<std::string> seen;
        for (const auto& l : labels_) {
            if (l.empty() || !seen.insert(l).second) {
                throw Error(ErrorKind::Config, "class set labels must be non-empty and unique");
            }
        }
    }

    /// Normal plus the four anomaly categories studied on the surveillance subset.
    static ClassSet defaults() { return ClassSet({"Normal", "Burglary", "Fighting", "Arson", "Explosion"}); }

    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(std::size_t i) const { return labels_.at(i); }

    std::optional<std::size_t> find(const std::string& label) const {
        auto it = std::find(labels_.begin(), labels_.end(), label);
        if (it == labels_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - labels_.begin());
    }

    std::size_t index_of(const std::string& label) const {
        if (auto i = find(label)) return *i;
        throw Error(ErrorKind::Validation, "unknown class label: " + label);
    }

    friend bool operator==(const ClassSet&, const ClassSet&) = default;

private:
    std::vector<std::string> labels_;
};

struct ManifestEntry {
    std::string video_id;
    std::string class_label;
    std::string frame_dir;
    std::optional<std::string> feature_path;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
    ClassSet classes = ClassSet::defaults();
    std::vector<ManifestEntry> entries;

    /// Per-class entry counts in class-set order.
    std::vector<std::size_t> class_histogram() const {
        std::vector<std::size_t> h(classes.size(), 0);
        for (const auto& e : entries) ++h[classes.index_of(e.class_label)];
        return h;
    }

    std::size_t label_index(const ManifestEntry& e) const { return classes.index_of(e.class_label); }

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Throws on duplicate ids or labels outside the class set.
inline void validate_manifest(const DatasetManifest& m) {
    std::unordered_set<std::string> ids;
    for (const auto& e : m.entries) {
        if (e.video_id.empty()) throw Error(ErrorKind::Validation, "empty video_id");
        if (!ids.insert(e.video_id).second) throw Error(ErrorKind::Validation, "duplicate video_id: " + e.video_id);
        if (!m.classes.find(e.class_label)) throw Error(ErrorKind::Validation, "unknown class label: " + e.class_label);
    }
}

inline DatasetManifest parse_manifest(const std::string& text, const ClassSet& classes = ClassSet::defaults()) {
    DatasetManifest m;
    m.classes = classes;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = text::trim(line);
        if (line.empty() || line.front() == '#') continue;
        auto fields = text::split(line, ',');
        if (fields.size() < 3 || fields.size() > 4) {
            throw Error(ErrorKind::Format, "manifest line " + std::to_string(lineno) +
                                               ": expected video_id,class_label,frame_dir[,feature_path]");
        }
        ManifestEntry e{text::trim(fields[0]), text::trim(fields[1]), text::trim(fields[2]), std::nullopt};
        if (fields.size() == 4 && !text::trim(fields[3]).empty()) e.feature_path = text::trim(fields[3]);
        m.entries.push_back(std::move(e));
    }
    validate_manifest(m);
    return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path,
                                     const ClassSet& classes = ClassSet::defaults()) {
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorKind::MissingDependency, "manifest not found: " + path.string());
    }
    return parse_manifest(io::read_file(path), classes);
}

inline std::string serialize_manifest(const DatasetManifest& m) {
    std::string out;
    for (const auto& e : m.entries) {
        out += e.video_id + "," + e.class_label + "," + e.frame_dir;
        if (e.feature_path) out += "," + *e.feature_path;
        out += "\n";
    }
    return out;
}

inline void save_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
    io::write_file_atomic(path, serialize_manifest(m));
}

/// Relative manifest paths are interpreted against the manifest's own directory.
inline std::filesystem::path resolve_path(const std::filesystem::path& base_dir, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
}

}  // namespace hcad

#pragma once

#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hcad/core/binary_io.hpp"
#include "hcad/core/text.hpp"
#include "hcad/core/types.hpp"

namespace hcad {

enum class FieldSeparator { Space, Comma };

/// Parses `frame_index track_id x y w h confidence` lines. Spaces and commas are
/// both accepted on input; blank lines and `#` comments are skipped.
inline std::vector<TrackRecord> parse_track_log(const std::string& text, const std::string& ctx = "track log") {
    std::vector<TrackRecord> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto f = text::split_fields(t, true);
        const auto where = ctx + " line " + std::to_string(lineno);
        if (f.size() != 7) throw Error(ErrorKind::Format, where + ": expected 7 fields");
        TrackRecord r;
        r.frame_index = text::parse_int(f[0], where);
        r.track_id = text::parse_int(f[1], where);
        r.box = {text::parse_double(f[2], where), text::parse_double(f[3], where), text::parse_double(f[4], where),
                 text::parse_double(f[5], where)};
        r.confidence = text::parse_double(f[6], where);
        out.push_back(r);
    }
    return out;
}

inline std::string format_track_log(const std::vector<TrackRecord>& records, FieldSeparator sep = FieldSeparator::Space) {
    const char* s = sep == FieldSeparator::Comma ? "," : " ";
    std::string out;
    for (const auto& r : records) {
        out += std::to_string(r.frame_index) + s + std::to_string(r.track_id) + s + text::exact(r.box.x) + s +
               text::exact(r.box.y) + s + text::exact(r.box.w) + s + text::exact(r.box.h) + s +
               text::exact(r.confidence) + "\n";
    }
    return out;
}

inline std::vector<TrackRecord> read_track_log(const std::filesystem::path& path) {
    return parse_track_log(io::read_file(path), path.string());
}

inline void write_track_log(const std::filesystem::path& path, const std::vector<TrackRecord>& records,
                            FieldSeparator sep = FieldSeparator::Space) {
    io::write_file_atomic(path, format_track_log(records, sep));
}

/// Groups raw log lines into per-frame detections for frames [0, frame_count).
inline std::vector<std::vector<Detection>> detections_by_frame(const std::vector<TrackRecord>& records,
                                                               std::int64_t frame_count) {
    std::vector<std::vector<Detection>> frames(static_cast<std::size_t>(std::max<std::int64_t>(frame_count, 0)));
    for (const auto& r : records) {
        if (r.frame_index < 0 || r.frame_index >= frame_count) continue;
        frames[static_cast<std::size_t>(r.frame_index)].push_back({r.frame_index, r.box, r.confidence, kPersonLabel});
    }
    return frames;
}

struct TrackLogIssue {
    enum class Kind { FrameOutOfRange, DuplicateId, NonPositiveBox, ConfidenceOutOfRange };
    Kind kind;
    std::size_t record_index;
    std::string message;
};

struct TrackLogReport {
    std::vector<TrackLogIssue> issues;

    bool valid() const { return issues.empty(); }
    std::size_t count(TrackLogIssue::Kind k) const {
        std::size_t n = 0;
        for (const auto& i : issues) n += i.kind == k;
        return n;
    }
};

inline TrackLogReport validate_track_log(const std::vector<TrackRecord>& records, std::int64_t frame_count) {
    TrackLogReport report;
    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const auto where = "record " + std::to_string(i) + " (frame " + std::to_string(r.frame_index) + ")";
        if (r.frame_index < 0 || r.frame_index >= frame_count) {
            report.issues.push_back({TrackLogIssue::Kind::FrameOutOfRange, i, where + ": frame index out of range"});
        }
        // Untracked detections (id -1) may legitimately share a frame.
        if (r.track_id >= 0 && !seen.emplace(r.frame_index, r.track_id).second) {
            report.issues.push_back({TrackLogIssue::Kind::DuplicateId, i,
                                     where + ": duplicate track id " + std::to_string(r.track_id)});
        }
        if (!r.box.valid()) {
            report.issues.push_back({TrackLogIssue::Kind::NonPositiveBox, i, where + ": non-positive box size"});
        }
        if (!(r.confidence >= 0.0 && r.confidence <= 1.0)) {
            report.issues.push_back({TrackLogIssue::Kind::ConfidenceOutOfRange, i, where + ": confidence outside [0,1]"});
        }
    }
    return report;
}

}  // namespace hcad

#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "hcad/core/error.hpp"
#include "hcad/core/types.hpp"
#include "hcad/tracking/assignment.hpp"
#include "hcad/tracking/iou.hpp"
#include "hcad/tracking/kalman.hpp"

namespace hcad::tracking {

/// Two-stage association knobs. Defaults follow the ByteTrack reference settings,
/// with separate IoU gates per stage.
struct AssociationParams {
    double high_conf_threshold = 0.6;
    double low_conf_threshold = 0.1;
    double iou_match_threshold_stage1 = 0.3;
    double iou_match_threshold_stage2 = 0.5;
    int max_coast_frames = 30;
    int min_hits_to_confirm = 3;

    void validate() const {
        auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!(low_conf_threshold >= 0.0 && low_conf_threshold < high_conf_threshold && high_conf_threshold <= 1.0)) {
            throw Error(ErrorKind::Config, "association thresholds must satisfy 0 <= low < high <= 1");
        }
        if (!unit(iou_match_threshold_stage1) || !unit(iou_match_threshold_stage2)) {
            throw Error(ErrorKind::Config, "IoU thresholds must lie in [0,1]");
        }
        if (max_coast_frames < 0 || min_hits_to_confirm < 1) {
            throw Error(ErrorKind::Config, "max_coast_frames >= 0 and min_hits_to_confirm >= 1 required");
        }
    }
};

enum class TrackStatus { Tentative, Confirmed, Lost, Removed };

struct ActiveTrack {
    std::int64_t track_id = 0;
    KalmanState state;
    double last_confidence = 0.0;
    int frames_since_update = 0;
    int hits = 0;
    TrackStatus status = TrackStatus::Tentative;
};

struct TrackMatch {
    std::size_t track;      // index into the track list
    std::size_t detection;  // index into the detection list
    int stage;              // 1 = high-conf, 2 = low-conf recovery, 3 = tentative confirmation
};

struct FrameAssociation {
    std::vector<TrackMatch> matched;
    std::vector<std::size_t> unmatched_tracks;
    std::vector<std::size_t> new_tracks;  // detection indices that start tracks
};

namespace detail {

inline void match_stage(const std::vector<ActiveTrack>& tracks, const std::vector<Detection>& dets,
                        std::vector<std::size_t>& track_pool, std::vector<std::size_t>& det_pool, double min_iou,
                        int stage, FrameAssociation& out) {
    if (track_pool.empty() || det_pool.empty()) return;
    CostMatrix cost(static_cast<Eigen::Index>(track_pool.size()), static_cast<Eigen::Index>(det_pool.size()));
    for (std::size_t i = 0; i < track_pool.size(); ++i) {
        const auto predicted = tracks[track_pool[i]].state.box();
        for (std::size_t j = 0; j < det_pool.size(); ++j) {
            const double overlap = iou(predicted, dets[det_pool[j]].box);
            cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                overlap >= min_iou && overlap > 0.0 ? 1.0 - overlap : kForbidden;
        }
    }
    const auto assignment = solve_assignment(cost);
    std::vector<char> track_used(track_pool.size(), 0), det_used(det_pool.size(), 0);
    for (auto [i, j] : assignment.pairs) {
        out.matched.push_back({track_pool[i], det_pool[j], stage});
        track_used[i] = 1;
        det_used[j] = 1;
    }
    std::vector<std::size_t> tracks_left, dets_left;
    for (std::size_t i = 0; i < track_pool.size(); ++i) {
        if (!track_used[i]) tracks_left.push_back(track_pool[i]);
    }
    for (std::size_t j = 0; j < det_pool.size(); ++j) {
        if (!det_used[j]) dets_left.push_back(det_pool[j]);
    }
    track_pool = std::move(tracks_left);
    det_pool = std::move(dets_left);
}

}  // namespace detail

/// BYTE association for one frame. `tracks` must already be predicted to the
/// current frame. Confirmed and lost tracks first meet high-confidence
/// detections; still-unmatched confirmed tracks then meet low-confidence ones;
/// tentative tracks finally compete for leftover high-confidence detections.
inline FrameAssociation associate_frame(const std::vector<ActiveTrack>& tracks, const std::vector<Detection>& dets,
                                        const AssociationParams& p) {
    FrameAssociation out;
    std::vector<std::size_t> high, low, pool, tentative;
    for (std::size_t j = 0; j < dets.size(); ++j) {
        if (dets[j].confidence >= p.high_conf_threshold) {
            high.push_back(j);
        } else if (dets[j].confidence >= p.low_conf_threshold) {
            low.push_back(j);
        }
    }
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        switch (tracks[i].status) {
            case TrackStatus::Confirmed:
            case TrackStatus::Lost:
                pool.push_back(i);
                break;
            case TrackStatus::Tentative:
                tentative.push_back(i);
                break;
            case TrackStatus::Removed:
                break;
        }
    }

    detail::match_stage(tracks, dets, pool, high, p.iou_match_threshold_stage1, 1, out);

    std::vector<std::size_t> second_pool, coasting;
    for (auto i : pool) {
        (tracks[i].status == TrackStatus::Confirmed ? second_pool : coasting).push_back(i);
    }
    detail::match_stage(tracks, dets, second_pool, low, p.iou_match_threshold_stage2, 2, out);
    detail::match_stage(tracks, dets, tentative, high, p.iou_match_threshold_stage1, 3, out);

    out.unmatched_tracks = second_pool;
    out.unmatched_tracks.insert(out.unmatched_tracks.end(), coasting.begin(), coasting.end());
    out.unmatched_tracks.insert(out.unmatched_tracks.end(), tentative.begin(), tentative.end());
    std::sort(out.unmatched_tracks.begin(), out.unmatched_tracks.end());
    out.new_tracks = high;
    return out;
}

/// Stateful per-video tracker. Not thread-safe; use one instance per video.
class ByteTracker {
public:
    struct Observation {
        std::int64_t frame_index;
        BoundingBox box;
        double confidence;
    };

    struct TrackHistory {
        std::int64_t internal_id = 0;
        bool ever_confirmed = false;
        std::vector<Observation> observations;
    };

    explicit ByteTracker(AssociationParams params = {}, KalmanNoise noise = {}) : params_(params), noise_(noise) {
        params_.validate();
    }

    /// Processes one frame of detections and returns its association.
    FrameAssociation update(std::int64_t frame_index, const std::vector<Detection>& dets) {
        for (auto& t : tracks_) t.state = kalman_predict(t.state, noise_);

        auto assoc = associate_frame(tracks_, dets, params_);

        for (const auto& m : assoc.matched) {
            auto& t = tracks_[m.track];
            const auto& d = dets[m.detection];
            t.state = kalman_update(t.state, d, noise_);
            t.frames_since_update = 0;
            t.last_confidence = d.confidence;
            ++t.hits;
            if (t.status == TrackStatus::Lost || (t.status == TrackStatus::Tentative && t.hits >= params_.min_hits_to_confirm)) {
                t.status = TrackStatus::Confirmed;
            }
            record(t, frame_index, d);
        }
        for (auto i : assoc.unmatched_tracks) {
            auto& t = tracks_[i];
            ++t.frames_since_update;
            if (t.status == TrackStatus::Tentative) {
                t.status = TrackStatus::Removed;
            } else if (t.frames_since_update > params_.max_coast_frames) {
                t.status = TrackStatus::Removed;
            } else {
                t.status = TrackStatus::Lost;
            }
        }
        for (auto j : assoc.new_tracks) {
            ActiveTrack t;
            t.track_id = next_id_++;
            t.state = kalman_init(dets[j], noise_);
            t.last_confidence = dets[j].confidence;
            t.hits = 1;
            t.status = params_.min_hits_to_confirm <= 1 ? TrackStatus::Confirmed : TrackStatus::Tentative;
            history_.push_back({t.track_id, false, {}});
            record(t, frame_index, dets[j]);
            tracks_.push_back(t);
        }
        std::erase_if(tracks_, [](const ActiveTrack& t) { return t.status == TrackStatus::Removed; });
        return assoc;
    }

    const std::vector<ActiveTrack>& tracks() const { return tracks_; }
    const std::vector<TrackHistory>& history() const { return history_; }
    const AssociationParams& params() const { return params_; }

private:
    void record(const ActiveTrack& t, std::int64_t frame_index, const Detection& d) {
        auto& h = history_[static_cast<std::size_t>(t.track_id - 1)];
        h.observations.push_back({frame_index, d.box, d.confidence});
        if (t.status == TrackStatus::Confirmed) h.ever_confirmed = true;
    }

    AssociationParams params_;
    KalmanNoise noise_;
    std::vector<ActiveTrack> tracks_;
    std::vector<TrackHistory> history_;
    std::int64_t next_id_ = 1;
};

/// Tracks a whole video offline. Only identities that reached confirmation are
/// logged, including their observations from before confirmation. Ids are
/// renumbered from 1 in order of first appearance; records are sorted by
/// (frame_index, track_id).
inline std::vector<TrackRecord> track_video(const std::vector<std::vector<Detection>>& detections_per_frame,
                                            const AssociationParams& p = {}) {
    ByteTracker tracker(p);
    for (std::size_t f = 0; f < detections_per_frame.size(); ++f) {
        tracker.update(static_cast<std::int64_t>(f), detections_per_frame[f]);
    }
    std::vector<const ByteTracker::TrackHistory*> kept;
    for (const auto& h : tracker.history()) {
        if (h.ever_confirmed && !h.observations.empty()) kept.push_back(&h);
    }
    std::stable_sort(kept.begin(), kept.end(), [](auto* a, auto* b) {
        return a->observations.front().frame_index < b->observations.front().frame_index;
    });
    std::vector<TrackRecord> log;
    for (std::size_t k = 0; k < kept.size(); ++k) {
        for (const auto& o : kept[k]->observations) {
            log.push_back({o.frame_index, static_cast<std::int64_t>(k + 1), o.box, o.confidence});
        }
    }
    std::sort(log.begin(), log.end(), [](const TrackRecord& a, const TrackRecord& b) {
        return a.frame_index != b.frame_index ? a.frame_index < b.frame_index : a.track_id < b.track_id;
    });
    return log;
}

}  // namespace hcad::tracking

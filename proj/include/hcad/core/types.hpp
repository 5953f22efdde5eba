#pragma once

#include <algorithm>
#include <cstdint>
#include <string>

namespace hcad {

/// Axis-aligned box in pixel units; (x, y) is the top-left corner.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double right() const { return x + w; }
    double bottom() const { return y + h; }
    double area() const { return w * h; }
    double center_x() const { return x + 0.5 * w; }
    double center_y() const { return y + 0.5 * h; }
    bool valid() const { return w > 0.0 && h > 0.0; }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Frame extent used for clamping; boxes must lie inside [0,W)x[0,H).
struct FrameSize {
    int height = 0;
    int width = 0;
};

/// Intersects `b` with the frame rectangle. The result may be empty (w or h == 0)
/// when the box lies fully outside.
inline BoundingBox clamp_box(const BoundingBox& b, FrameSize frame) {
    const double x0 = std::clamp(b.x, 0.0, static_cast<double>(frame.width));
    const double y0 = std::clamp(b.y, 0.0, static_cast<double>(frame.height));
    const double x1 = std::clamp(b.right(), 0.0, static_cast<double>(frame.width));
    const double y1 = std::clamp(b.bottom(), 0.0, static_cast<double>(frame.height));
    return {x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
}

inline constexpr const char* kPersonLabel = "person";

struct Detection {
    std::int64_t frame_index = 0;
    BoundingBox box;
    double confidence = 0.0;
    std::string class_label = kPersonLabel;
};

/// One line of a detections/track log. A track_id of -1 marks an untracked raw detection.
struct TrackRecord {
    std::int64_t frame_index = 0;
    std::int64_t track_id = -1;
    BoundingBox box;
    double confidence = 0.0;

    friend bool operator==(const TrackRecord&, const TrackRecord&) = default;
};

}  // namespace hcad

#pragma once

#include <cmath>

namespace uotkit {

/// Axis-aligned box in pixels, `[x, y, w, h]` with (x, y) the top-left corner.
/// A zero-area box is legal and means "no prediction / target absent".
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double right() const { return x + w; }
    double bottom() const { return y + h; }
    double center_x() const { return x + w / 2.0; }
    double center_y() const { return y + h / 2.0; }
    double area() const { return w * h; }

    bool is_finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h);
    }
    bool is_degenerate() const { return !(w > 0.0 && h > 0.0); }

    static BoundingBox from_center(double cx, double cy, double w, double h) {
        return {cx - w / 2.0, cy - h / 2.0, w, h};
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Throws Error(kInvalidGeometry) on non-finite coordinates or negative size.
void validate_box(const BoundingBox& box);

double iou(const BoundingBox& a, const BoundingBox& b);

/// Euclidean distance between box centers, in pixels.
double center_error(const BoundingBox& gt, const BoundingBox& pr);

/// Center offset scaled by the ground-truth size, ‖(Δcx/w, Δcy/h)‖₂.
/// Throws Error(kDegenerateGroundTruth) if gt has zero width or height.
double normalized_center_error(const BoundingBox& gt, const BoundingBox& pr);

/// Aspect-ratio agreement min(r_a, r_b) / max(r_a, r_b) with r = w / h.
/// 1 when both boxes are degenerate, 0 when exactly one is.
double aspect_ratio_consistency(const BoundingBox& a, const BoundingBox& b);

/// Overlap that also penalises aspect-ratio disagreement:
/// iou(gt, pr) * aspect_ratio_consistency(gt, pr).
double complete_iou(const BoundingBox& gt, const BoundingBox& pr);

/// Generalized IoU, iou - (hull - union) / hull. Range [-1, 1].
/// Throws Error(kDegenerateGeometry) when both boxes are degenerate.
double giou(const BoundingBox& a, const BoundingBox& b);

}  // namespace uotkit

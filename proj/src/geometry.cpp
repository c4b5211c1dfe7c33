#include "uotkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "uotkit/error.hpp"

namespace uotkit {

namespace {

// Extents are taken from corner coordinates everywhere (never from w * h)
// so that identical boxes give an intersection bit-equal to each area.
double extent(double lo, double size) { return (lo + size) - lo; }

double corner_area(const BoundingBox& b) { return extent(b.x, b.w) * extent(b.y, b.h); }

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
    const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    return iw * ih;
}

}  // namespace

void validate_box(const BoundingBox& box) {
    if (!box.is_finite() || box.w < 0.0 || box.h < 0.0) {
        std::ostringstream os;
        os << "invalid box [" << box.x << ", " << box.y << ", " << box.w << ", " << box.h << "]";
        throw Error(ErrorCode::kInvalidGeometry, os.str());
    }
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    validate_box(a);
    validate_box(b);
    const double inter = intersection_area(a, b);
    const double uni = corner_area(a) + corner_area(b) - inter;
    if (uni <= 0.0) {
        return 0.0;
    }
    return std::clamp(inter / uni, 0.0, 1.0);
}

double center_error(const BoundingBox& gt, const BoundingBox& pr) {
    validate_box(gt);
    validate_box(pr);
    return std::hypot(pr.center_x() - gt.center_x(), pr.center_y() - gt.center_y());
}

double normalized_center_error(const BoundingBox& gt, const BoundingBox& pr) {
    validate_box(gt);
    validate_box(pr);
    if (gt.is_degenerate()) {
        throw Error(ErrorCode::kDegenerateGroundTruth,
                    "normalized center error needs a ground truth box with positive size");
    }
    return std::hypot((pr.center_x() - gt.center_x()) / gt.w,
                      (pr.center_y() - gt.center_y()) / gt.h);
}

double aspect_ratio_consistency(const BoundingBox& a, const BoundingBox& b) {
    const bool da = a.is_degenerate();
    const bool db = b.is_degenerate();
    if (da && db) {
        return 1.0;
    }
    if (da || db) {
        return 0.0;
    }
    const double ra = a.w / a.h;
    const double rb = b.w / b.h;
    return std::min(ra, rb) / std::max(ra, rb);
}

double complete_iou(const BoundingBox& gt, const BoundingBox& pr) {
    return iou(gt, pr) * aspect_ratio_consistency(gt, pr);
}

double giou(const BoundingBox& a, const BoundingBox& b) {
    validate_box(a);
    validate_box(b);
    if (a.is_degenerate() && b.is_degenerate()) {
        throw Error(ErrorCode::kDegenerateGeometry, "giou is undefined for two degenerate boxes");
    }
    const double inter = intersection_area(a, b);
    const double uni = corner_area(a) + corner_area(b) - inter;
    const double hull = (std::max(a.right(), b.right()) - std::min(a.x, b.x)) *
                        (std::max(a.bottom(), b.bottom()) - std::min(a.y, b.y));
    const double overlap = uni > 0.0 ? inter / uni : 0.0;
    if (hull <= 0.0) {
        return overlap;
    }
    return overlap - (hull - uni) / hull;
}

}  // namespace uotkit

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "uotkit/geometry.hpp"
#include "uotkit/kalman.hpp"

namespace uotkit {

/// Affine map from response-grid cells to frame coordinates. Cell (row, col)
/// decodes to a box of size (box_w, box_h) centred at
/// (origin_x + (col + 0.5) * stride_x, origin_y + (row + 0.5) * stride_y).
struct GridMapping {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double stride_x = 1.0;
    double stride_y = 1.0;
    double box_w = 0.0;
    double box_h = 0.0;

    BoundingBox cell_box(std::size_t row, std::size_t col) const;
    BoundingBox grid_center_box(std::size_t n) const;
};

/// n x n non-negative scores over the search region, row-major.
struct ResponseMap {
    std::size_t n = 0;
    std::vector<float> scores;
    GridMapping mapping;

    float at(std::size_t row, std::size_t col) const { return scores[row * n + col]; }
};

/// Mapping for a map that arrives without geometry: the search region has
/// side search_factor * sqrt(w * h) of the raw box, split into n cells, and
/// is positioned so that the argmax cell decodes to the raw box center.
/// Candidate boxes take the raw box size.
GridMapping anchored_mapping(std::span<const float> grid, std::size_t n, const BoundingBox& raw_box,
                             double search_factor);

struct Candidate {
    BoundingBox box;
    double similarity = 0.0;  // max-normalised response
    std::size_t cell = 0;     // row-major grid index, the final tie-breaker
};

struct MatpConfig {
    std::size_t top_n = 10;
    double alpha = 0.5;           // weight of similarity in location scores
    double conf = 0.6;            // IoU gate between raw box and Kalman estimate
    double threshold = 0.8;       // normalised response threshold for candidates
    double iou_threshold = 0.5;   // NMS suppression threshold
    double search_factor = 4.0;   // used by anchored_mapping
    KalmanConfig kalman;
};

/// Local maxima (8-neighbourhood, non-strict) of the max-normalised map with
/// score >= threshold, best first, truncated to top_n. The global maximum is
/// always among them. An all-zero map yields one candidate at the grid
/// center with similarity 0. Throws Error(kInvalidArgument) for a malformed
/// map or a threshold outside [0, 1].
std::vector<Candidate> extract_candidates(const ResponseMap& map, double threshold, std::size_t top_n);

/// Greedy suppression: keep the best remaining candidate, drop every
/// candidate with IoU > iou_threshold against it, repeat. Order is
/// similarity descending, then cell ascending.
std::vector<Candidate> nms(std::vector<Candidate> candidates, double iou_threshold);

/// alpha * similarity + (1 - alpha) * iou(estimate, box) per candidate.
/// Throws Error(kEmptyCandidates) for an empty list.
std::vector<double> location_scores(const BoundingBox& estimate, std::span<const Candidate> candidates, double alpha);

struct MatpStep {
    BoundingBox box;       // b_M, the output for this frame
    BoundingBox estimate;  // b_E, the Kalman prediction
    KalmanState state;     // filter after the update with `box`
    bool matched = false;  // true when motion-based matching replaced the raw box
};

/// One frame: predict, then keep the raw box if iou(raw, b_E) >= conf,
/// otherwise pick the candidate with the best location score. The filter is
/// updated with the chosen box. Location scores are only computed in match
/// mode since they are not consumed otherwise.
MatpStep matp_step(const KalmanState& state, const ResponseMap& map, const BoundingBox& raw_box,
                   const MatpConfig& config = {});

struct MatpFrame {
    ResponseMap map;
    BoundingBox raw_box;
};

struct MatpTrajectory {
    std::vector<BoundingBox> boxes;       // boxes[0] is the initial box
    std::vector<std::uint8_t> matched;    // per box; 0 for the initial box
    std::size_t match_count = 0;
};

/// Runs the filter over frames in order. Errors are rethrown with the frame
/// index (1-based position in the trajectory) attached.
MatpTrajectory matp_run(const BoundingBox& initial_box, std::span<const MatpFrame> frames,
                        const MatpConfig& config = {});

/// Same loop over maps without geometry (T x n x n floats, frame-major):
/// each frame's mapping comes from anchored_mapping on its raw box, or is
/// centred on the Kalman estimate when the raw box is empty.
MatpTrajectory matp_run_anchored(const BoundingBox& initial_box, std::span<const float> maps, std::size_t n,
                                 std::span<const BoundingBox> raw_boxes, const MatpConfig& config = {});

}  // namespace uotkit

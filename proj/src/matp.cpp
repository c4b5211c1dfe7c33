#include "uotkit/matp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uotkit/error.hpp"

namespace uotkit {

namespace {

bool ranks_before(const Candidate& a, const Candidate& b) {
    if (a.similarity != b.similarity) {
        return a.similarity > b.similarity;
    }
    return a.cell < b.cell;
}

void check_map(const ResponseMap& map) {
    if (map.n == 0 || map.scores.size() != map.n * map.n) {
        throw Error(ErrorCode::kInvalidArgument, "response map must hold n x n scores with n >= 1");
    }
    for (float v : map.scores) {
        if (!std::isfinite(v) || v < 0.0f) {
            throw Error(ErrorCode::kInvalidArgument, "response map scores must be finite and non-negative");
        }
    }
}

GridMapping centred_mapping(double cx, double cy, double w, double h, std::size_t n, double search_factor) {
    const double stride = search_factor * std::sqrt(w * h) / static_cast<double>(n);
    GridMapping m;
    m.stride_x = stride;
    m.stride_y = stride;
    m.origin_x = cx - static_cast<double>(n) * stride / 2.0;
    m.origin_y = cy - static_cast<double>(n) * stride / 2.0;
    m.box_w = w;
    m.box_h = h;
    return m;
}

MatpStep resolve(const KalmanPrediction& pred, const ResponseMap& map, const BoundingBox& raw_box,
                 const MatpConfig& config) {
    MatpStep step;
    step.estimate = pred.box;
    const auto candidates = nms(extract_candidates(map, config.threshold, config.top_n), config.iou_threshold);

    step.matched = iou(raw_box, step.estimate) < config.conf;
    if (step.matched) {
        const auto scores = location_scores(step.estimate, candidates, config.alpha);
        std::size_t best = 0;
        for (std::size_t i = 1; i < candidates.size(); ++i) {
            if (scores[i] > scores[best] ||
                (scores[i] == scores[best] && ranks_before(candidates[i], candidates[best]))) {
                best = i;
            }
        }
        step.box = candidates[best].box;
    } else {
        step.box = raw_box;
    }
    step.state = kf_update(pred.state, step.box, config.kalman);
    return step;
}

Error with_frame(const Error& e, std::size_t frame) {
    return Error(e.code(), "frame " + std::to_string(frame) + ": " + e.what());
}

}  // namespace

BoundingBox GridMapping::cell_box(std::size_t row, std::size_t col) const {
    const double cx = origin_x + (static_cast<double>(col) + 0.5) * stride_x;
    const double cy = origin_y + (static_cast<double>(row) + 0.5) * stride_y;
    return BoundingBox::from_center(cx, cy, box_w, box_h);
}

BoundingBox GridMapping::grid_center_box(std::size_t n) const {
    const double half = static_cast<double>(n) / 2.0;
    return BoundingBox::from_center(origin_x + half * stride_x, origin_y + half * stride_y, box_w, box_h);
}

GridMapping anchored_mapping(std::span<const float> grid, std::size_t n, const BoundingBox& raw_box,
                             double search_factor) {
    if (n == 0 || grid.size() != n * n) {
        throw Error(ErrorCode::kInvalidArgument, "response grid must hold n x n scores with n >= 1");
    }
    if (raw_box.is_degenerate() || !raw_box.is_finite()) {
        throw Error(ErrorCode::kInvalidArgument, "anchoring a response map needs a raw box with positive size");
    }
    GridMapping m = centred_mapping(raw_box.center_x(), raw_box.center_y(), raw_box.w, raw_box.h, n, search_factor);
    const auto peak = std::max_element(grid.begin(), grid.end());
    if (!(*peak > 0.0f)) {
        return m;  // flat map: raw box sits at the grid center
    }
    const auto cell = static_cast<std::size_t>(peak - grid.begin());
    m.origin_x = raw_box.center_x() - (static_cast<double>(cell % n) + 0.5) * m.stride_x;
    m.origin_y = raw_box.center_y() - (static_cast<double>(cell / n) + 0.5) * m.stride_y;
    return m;
}

std::vector<Candidate> extract_candidates(const ResponseMap& map, double threshold, std::size_t top_n) {
    check_map(map);
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "candidate threshold must lie in [0, 1]");
    }
    const std::size_t n = map.n;
    const double peak = *std::max_element(map.scores.begin(), map.scores.end());
    if (!(peak > 0.0)) {
        const std::size_t mid = n / 2;
        return {Candidate{map.mapping.grid_center_box(n), 0.0, mid * n + mid}};
    }

    std::vector<Candidate> out;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const float v = map.at(r, c);
            bool local_max = true;
            for (std::size_t rr = (r == 0 ? 0 : r - 1); local_max && rr <= std::min(n - 1, r + 1); ++rr) {
                for (std::size_t cc = (c == 0 ? 0 : c - 1); cc <= std::min(n - 1, c + 1); ++cc) {
                    if (map.at(rr, cc) > v) {
                        local_max = false;
                        break;
                    }
                }
            }
            const double sim = static_cast<double>(v) / peak;
            if (local_max && sim >= threshold) {
                out.push_back({map.mapping.cell_box(r, c), sim, r * n + c});
            }
        }
    }
    std::sort(out.begin(), out.end(), ranks_before);
    if (top_n > 0 && out.size() > top_n) {
        out.resize(top_n);
    }
    return out;
}

std::vector<Candidate> nms(std::vector<Candidate> candidates, double iou_threshold) {
    std::sort(candidates.begin(), candidates.end(), ranks_before);
    std::vector<Candidate> kept;
    std::vector<bool> dropped(candidates.size(), false);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (dropped[i]) {
            continue;
        }
        kept.push_back(candidates[i]);
        for (std::size_t j = i + 1; j < candidates.size(); ++j) {
            if (!dropped[j] && iou(candidates[i].box, candidates[j].box) > iou_threshold) {
                dropped[j] = true;
            }
        }
    }
    return kept;
}

std::vector<double> location_scores(const BoundingBox& estimate, std::span<const Candidate> candidates,
                                    double alpha) {
    if (candidates.empty()) {
        throw Error(ErrorCode::kEmptyCandidates, "no candidate to score");
    }
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const auto& c : candidates) {
        scores.push_back(alpha * c.similarity + (1.0 - alpha) * iou(estimate, c.box));
    }
    return scores;
}

MatpStep matp_step(const KalmanState& state, const ResponseMap& map, const BoundingBox& raw_box,
                   const MatpConfig& config) {
    return resolve(kf_predict(state, config.kalman), map, raw_box, config);
}

MatpTrajectory matp_run(const BoundingBox& initial_box, std::span<const MatpFrame> frames, const MatpConfig& config) {
    MatpTrajectory out;
    out.boxes.reserve(frames.size() + 1);
    out.matched.reserve(frames.size() + 1);
    out.boxes.push_back(initial_box);
    out.matched.push_back(0);
    if (frames.empty()) {
        return out;
    }
    KalmanState state;
    try {
        state = kf_init(initial_box, config.kalman);
    } catch (const Error& e) {
        throw with_frame(e, 0);
    }
    for (std::size_t t = 0; t < frames.size(); ++t) {
        try {
            MatpStep step = matp_step(state, frames[t].map, frames[t].raw_box, config);
            state = step.state;
            out.boxes.push_back(step.box);
            out.matched.push_back(step.matched ? 1 : 0);
            out.match_count += step.matched ? 1 : 0;
        } catch (const Error& e) {
            throw with_frame(e, t + 1);
        }
    }
    return out;
}

MatpTrajectory matp_run_anchored(const BoundingBox& initial_box, std::span<const float> maps, std::size_t n,
                                 std::span<const BoundingBox> raw_boxes, const MatpConfig& config) {
    if (n == 0 || maps.size() != raw_boxes.size() * n * n) {
        throw Error(ErrorCode::kShapeMismatch, "expected " + std::to_string(raw_boxes.size()) + " maps of " +
                                                   std::to_string(n) + "x" + std::to_string(n) + " scores, got " +
                                                   std::to_string(maps.size()) + " values");
    }
    MatpTrajectory out;
    out.boxes.reserve(raw_boxes.size() + 1);
    out.boxes.push_back(initial_box);
    out.matched.push_back(0);
    if (raw_boxes.empty()) {
        return out;
    }
    KalmanState state;
    try {
        state = kf_init(initial_box, config.kalman);
    } catch (const Error& e) {
        throw with_frame(e, 0);
    }
    ResponseMap map;
    map.n = n;
    for (std::size_t t = 0; t < raw_boxes.size(); ++t) {
        try {
            const auto grid = maps.subspan(t * n * n, n * n);
            map.scores.assign(grid.begin(), grid.end());
            check_map(map);
            const BoundingBox& raw = raw_boxes[t];
            validate_box(raw);
            const KalmanPrediction pred = kf_predict(state, config.kalman);
            if (raw.is_degenerate()) {
                const BoundingBox& e = pred.box;
                map.mapping = centred_mapping(e.center_x(), e.center_y(), e.w, e.h, n, config.search_factor);
            } else {
                map.mapping = anchored_mapping(grid, n, raw, config.search_factor);
            }
            MatpStep step = resolve(pred, map, raw, config);
            state = step.state;
            out.boxes.push_back(step.box);
            out.matched.push_back(step.matched ? 1 : 0);
            out.match_count += step.matched ? 1 : 0;
        } catch (const Error& e) {
            throw with_frame(e, t + 1);
        }
    }
    return out;
}

}  // namespace uotkit

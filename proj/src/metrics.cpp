#include "uotkit/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "uotkit/error.hpp"
#include "uotkit/parallel.hpp"
#include "uotkit/rng.hpp"
#include "uotkit/text.hpp"

namespace uotkit {

namespace {

std::vector<std::size_t> evaluable_frames(const TrackView& view) {
    std::vector<std::size_t> idx;
    idx.reserve(view.gt.size());
    for (std::size_t i = 0; i < view.gt.size(); ++i) {
        if (evaluable(view, i)) {
            idx.push_back(i);
        }
    }
    if (idx.empty()) {
        throw Error(ErrorCode::kEmptyEvaluation, "no evaluable frame (every frame absent or degenerate)");
    }
    return idx;
}

double mean(std::span<const double> values) {
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

// Fraction of `values` satisfying pred(value, threshold(k)) for each k.
template <class Compare, class Threshold>
std::vector<double> fraction_curve(std::span<const double> values, std::size_t points, Threshold threshold,
                                   Compare pass) {
    std::vector<double> curve(points, 0.0);
    for (std::size_t k = 0; k < points; ++k) {
        const double t = threshold(k);
        const auto hits = std::count_if(values.begin(), values.end(), [&](double v) { return pass(v, t); });
        curve[k] = static_cast<double>(hits) / static_cast<double>(values.size());
    }
    return curve;
}

bool predicted_absent(const TrackView& view, std::size_t i) {
    if (!view.pred_absent.empty() && view.pred_absent[i] != 0) {
        return true;
    }
    return view.pred[i].is_degenerate();
}

Scores add(const Scores& a, const Scores& b) {
    return {a.pre + b.pre, a.npre + b.npre, a.auc + b.auc, a.cauc + b.cauc, a.macc + b.macc};
}

Scores divide(const Scores& s, double n) {
    return {s.pre / n, s.npre / n, s.auc / n, s.cauc / n, s.macc / n};
}

void accumulate_into(std::vector<double>& sum, const std::vector<double>& v) {
    if (sum.empty()) {
        sum.assign(v.size(), 0.0);
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        sum[i] += v[i];
    }
}

void divide_into(std::vector<double>& v, double n) {
    for (double& x : v) {
        x /= n;
    }
}

TrackView view_of(const SequenceAnnotation& seq, const TrackerResult& result) {
    return {seq.boxes, seq.absent, result.boxes, {}};
}

}  // namespace

double success_threshold(std::size_t k) { return static_cast<double>(k) / 20.0; }
double precision_threshold(std::size_t k) { return static_cast<double>(k); }
double norm_precision_threshold(std::size_t k) { return static_cast<double>(k) / 100.0; }

void check_lengths(const TrackView& view, const std::string& sequence) {
    const std::size_t n = view.gt.size();
    const bool bad = view.absent.size() != n || view.pred.size() != n ||
                     (!view.pred_absent.empty() && view.pred_absent.size() != n);
    if (bad) {
        throw Error(ErrorCode::kLengthMismatch,
                    (sequence.empty() ? std::string() : "sequence '" + sequence + "': ") + "ground truth has " +
                        std::to_string(n) + " frames, prediction has " + std::to_string(view.pred.size()));
    }
}

bool evaluable(const TrackView& view, std::size_t i) {
    return view.absent[i] == 0 && !view.gt[i].is_degenerate();
}

Curve success(const TrackView& view, Overlap overlap) {
    check_lengths(view);
    const auto idx = evaluable_frames(view);
    std::vector<double> values;
    values.reserve(idx.size());
    for (std::size_t i : idx) {
        values.push_back(overlap == Overlap::kIou ? iou(view.gt[i], view.pred[i])
                                                  : complete_iou(view.gt[i], view.pred[i]));
    }
    Curve c;
    c.values = fraction_curve(values, kSuccessPoints, success_threshold, [](double v, double t) { return v > t; });
    c.score = mean(c.values);
    return c;
}

Curve precision(const TrackView& view) {
    check_lengths(view);
    const auto idx = evaluable_frames(view);
    std::vector<double> errors;
    errors.reserve(idx.size());
    for (std::size_t i : idx) {
        errors.push_back(center_error(view.gt[i], view.pred[i]));
    }
    Curve c;
    c.values = fraction_curve(errors, kPrecisionPoints, precision_threshold, [](double v, double t) { return v <= t; });
    c.score = c.values[kPrecisionReportPixels];
    return c;
}

Curve normalized_precision(const TrackView& view) {
    check_lengths(view);
    const auto idx = evaluable_frames(view);
    std::vector<double> errors;
    errors.reserve(idx.size());
    for (std::size_t i : idx) {
        errors.push_back(normalized_center_error(view.gt[i], view.pred[i]));
    }
    Curve c;
    c.values = fraction_curve(errors, kNormPrecisionPoints, norm_precision_threshold,
                              [](double v, double t) { return v <= t; });
    c.score = mean(c.values);
    return c;
}

double macc(const TrackView& view) {
    check_lengths(view);
    if (view.gt.empty()) {
        throw Error(ErrorCode::kEmptyEvaluation, "mACC of an empty sequence");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < view.gt.size(); ++i) {
        if (view.absent[i] == 0) {
            sum += predicted_absent(view, i) ? 0.0 : iou(view.gt[i], view.pred[i]);
        } else {
            sum += predicted_absent(view, i) ? 1.0 : 0.0;
        }
    }
    return sum / static_cast<double>(view.gt.size());
}

SequenceEvaluation evaluate_sequence(const TrackView& view, std::string sequence) {
    check_lengths(view, sequence);
    SequenceEvaluation ev;
    ev.sequence = std::move(sequence);
    ev.frames = view.gt.size();
    for (std::size_t i = 0; i < view.gt.size(); ++i) {
        ev.evaluable_frames += evaluable(view, i) ? 1 : 0;
    }
    try {
        const Curve pre = precision(view);
        const Curve npre = normalized_precision(view);
        const Curve auc = success(view, Overlap::kIou);
        const Curve cauc = success(view, Overlap::kCompleteIou);
        ev.scores = {pre.score, npre.score, auc.score, cauc.score, macc(view)};
        ev.curves = {pre.values, npre.values, auc.values, cauc.values};
    } catch (const Error& e) {
        if (ev.sequence.empty()) {
            throw;
        }
        throw Error(e.code(), "sequence '" + ev.sequence + "': " + e.what());
    }
    return ev;
}

Protocol parse_protocol(std::string_view name) {
    const std::string s = text::to_lower(name);
    if (s == "cross_domain" || s == "cross-domain" || s == "i") return Protocol::kCrossDomain;
    if (s == "within_domain" || s == "within-domain" || s == "ii") return Protocol::kWithinDomain;
    throw Error(ErrorCode::kInvalidArgument, "unknown protocol '" + std::string(name) + "'");
}

std::string_view to_string(Protocol protocol) {
    return protocol == Protocol::kCrossDomain ? "cross_domain" : "within_domain";
}

TrackerReport evaluate_tracker(std::span<const SequenceAnnotation> dataset, std::span<const TrackerResult> results,
                               std::size_t threads) {
    std::map<std::string, const TrackerResult*> by_name;
    for (const auto& r : results) {
        by_name[r.sequence] = &r;
    }
    std::vector<const SequenceAnnotation*> order;
    order.reserve(dataset.size());
    for (const auto& seq : dataset) {
        order.push_back(&seq);
    }
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->name < b->name; });

    std::vector<std::string> missing;
    for (const auto* seq : order) {
        if (by_name.count(seq->name) == 0) {
            missing.push_back(seq->name);
        }
    }
    if (!missing.empty()) {
        std::string msg = "missing result for " + std::to_string(missing.size()) + " sequence(s):";
        for (const auto& m : missing) {
            msg += " " + m;
        }
        throw Error(ErrorCode::kMissingResult, msg);
    }

    TrackerReport report;
    report.tracker = results.empty() ? std::string() : results.front().tracker;
    report.sequences.resize(order.size());
    parallel_for(order.size(), threads, [&](std::size_t i) {
        const SequenceAnnotation& seq = *order[i];
        report.sequences[i] = evaluate_sequence(view_of(seq, *by_name.at(seq.name)), seq.name);
    });
    summarize(report);
    return report;
}

void summarize(TrackerReport& report) {
    Scores sum;
    Curves curves;
    for (const auto& s : report.sequences) {
        sum = add(sum, s.scores);
        accumulate_into(curves.precision, s.curves.precision);
        accumulate_into(curves.normalized_precision, s.curves.normalized_precision);
        accumulate_into(curves.success, s.curves.success);
        accumulate_into(curves.complete_success, s.curves.complete_success);
    }
    if (report.sequences.empty()) {
        report.mean = {};
        report.mean_curves = {};
        return;
    }
    const double n = static_cast<double>(report.sequences.size());
    report.mean = divide(sum, n);
    divide_into(curves.precision, n);
    divide_into(curves.normalized_precision, n);
    divide_into(curves.success, n);
    divide_into(curves.complete_success, n);
    report.mean_curves = std::move(curves);
}

std::map<std::string, AttributeGroup> attribute_breakdown(const TrackerReport& report,
                                                          std::span<const SequenceAnnotation> annotations) {
    std::map<std::string, const SequenceAnnotation*> by_name;
    for (const auto& a : annotations) {
        by_name[a.name] = &a;
    }
    std::map<std::string, AttributeGroup> sums;
    for (const auto& ev : report.sequences) {
        const auto it = by_name.find(ev.sequence);
        if (it == by_name.end()) {
            continue;
        }
        const SequenceAnnotation& seq = *it->second;
        AttributeSet attrs = seq.attributes;
        const bool any_present = std::any_of(seq.absent.begin(), seq.absent.end(), [](auto a) { return a == 0; });
        if (any_present) {
            attrs = merge_attributes(auto_attributes(seq), seq.attributes).attributes;
        }
        for (AttributeCode code : all_attribute_codes()) {
            const auto& value = attrs.get(code);
            if (!value) {
                continue;
            }
            AttributeGroup& g = sums[std::string(code_name(code)) + "=" + *value];
            ++g.sequences;
            g.scores = add(g.scores, ev.scores);
        }
    }
    for (auto& [key, g] : sums) {
        g.scores = divide(g.scores, static_cast<double>(g.sequences));
    }
    return sums;
}

std::vector<std::size_t> retained_frames(std::size_t n, const ResampleSpec& spec, std::string_view sequence) {
    if (spec.factor == 0 || spec.factor > n) {
        throw Error(ErrorCode::kDegenerateResample, "resample factor " + std::to_string(spec.factor) +
                                                        " does not fit a " + std::to_string(n) + "-frame sequence" +
                                                        (sequence.empty() ? std::string() : " ('" + std::string(sequence) + "')"));
    }
    std::vector<std::size_t> keep;
    if (spec.mode == ResampleMode::kStride) {
        for (std::size_t i = 0; i < n; i += spec.factor) {
            keep.push_back(i);
        }
        return keep;
    }
    const std::size_t count = (n + spec.factor - 1) / spec.factor;
    CounterRng rng = CounterRng(spec.seed).split(sequence);
    keep.push_back(0);
    for (std::size_t i : rng.sample_without_replacement(n - 1, count - 1)) {
        keep.push_back(i + 1);
    }
    return keep;
}

namespace {

struct Subsampled {
    std::vector<BoundingBox> gt;
    std::vector<std::uint8_t> absent;
    std::vector<BoundingBox> pred;
};

bool any_evaluable(const Subsampled& s) {
    for (std::size_t i = 0; i < s.gt.size(); ++i) {
        if (s.absent[i] == 0 && !s.gt[i].is_degenerate()) {
            return true;
        }
    }
    return false;
}

std::vector<const SequenceAnnotation*> sorted_by_name(std::span<const SequenceAnnotation> dataset) {
    std::vector<const SequenceAnnotation*> order;
    for (const auto& s : dataset) {
        order.push_back(&s);
    }
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->name < b->name; });
    return order;
}

std::map<std::string, const TrackerResult*> index_results(std::span<const TrackerResult> results) {
    std::map<std::string, const TrackerResult*> by_name;
    for (const auto& r : results) {
        by_name[r.sequence] = &r;
    }
    return by_name;
}

const TrackerResult& find_result(const std::map<std::string, const TrackerResult*>& by_name, const std::string& name) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
        throw Error(ErrorCode::kMissingResult, "missing result for sequence '" + name + "'");
    }
    return *it->second;
}

StabilityPoint stability_point(std::span<const SequenceAnnotation> dataset, std::span<const TrackerResult> results,
                               const ResampleSpec& spec, bool subsample_prediction) {
    const auto by_name = index_results(results);
    StabilityPoint point{spec.factor, spec.mode, 0.0, 0};
    double sum = 0.0;
    for (const auto* seq : sorted_by_name(dataset)) {
        const TrackerResult& result = find_result(by_name, seq->name);
        const auto keep = retained_frames(seq->frames(), spec, seq->name);
        Subsampled s;
        for (std::size_t j = 0; j < keep.size(); ++j) {
            s.gt.push_back(seq->boxes[keep[j]]);
            s.absent.push_back(seq->absent[keep[j]]);
        }
        if (subsample_prediction) {
            if (result.boxes.size() != seq->frames()) {
                throw Error(ErrorCode::kLengthMismatch, "sequence '" + seq->name + "': dense result has " +
                                                            std::to_string(result.boxes.size()) + " frames, expected " +
                                                            std::to_string(seq->frames()));
            }
            for (std::size_t k : keep) {
                s.pred.push_back(result.boxes[k]);
            }
        } else {
            if (result.boxes.size() != keep.size()) {
                throw Error(ErrorCode::kLengthMismatch, "sequence '" + seq->name + "': result has " +
                                                            std::to_string(result.boxes.size()) + " frames, factor " +
                                                            std::to_string(spec.factor) + " retains " +
                                                            std::to_string(keep.size()));
            }
            s.pred = result.boxes;
        }
        if (!any_evaluable(s)) {
            continue;
        }
        sum += success({s.gt, s.absent, s.pred, {}}, Overlap::kIou).score;
        ++point.sequences;
    }
    if (point.sequences == 0) {
        throw Error(ErrorCode::kEmptyEvaluation,
                    "factor " + std::to_string(spec.factor) + " leaves no evaluable frame in any sequence");
    }
    point.auc = sum / static_cast<double>(point.sequences);
    return point;
}

}  // namespace

std::vector<StabilityPoint> framerate_stability(std::span<const SequenceAnnotation> dataset,
                                                std::span<const TrackerResult> dense_results,
                                                std::span<const ResampleSpec> specs) {
    std::vector<StabilityPoint> curve;
    curve.reserve(specs.size());
    for (const auto& spec : specs) {
        curve.push_back(stability_point(dataset, dense_results, spec, true));
    }
    return curve;
}

StabilityPoint framerate_point(std::span<const SequenceAnnotation> dataset, std::span<const TrackerResult> results,
                               const ResampleSpec& spec) {
    return stability_point(dataset, results, spec, false);
}

}  // namespace uotkit

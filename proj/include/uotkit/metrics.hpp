#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "uotkit/attributes.hpp"
#include "uotkit/dataset.hpp"
#include "uotkit/geometry.hpp"

namespace uotkit {

// Threshold grids. Success uses a strict ">" comparison, both precision
// curves use "<=".
inline constexpr std::size_t kSuccessPoints = 21;            // 0, 0.05, ..., 1
inline constexpr std::size_t kPrecisionPoints = 51;          // 0, 1, ..., 50 px
inline constexpr std::size_t kNormPrecisionPoints = 51;      // 0, 0.01, ..., 0.5
inline constexpr std::size_t kPrecisionReportPixels = 20;

double success_threshold(std::size_t k);         // k / 20
double precision_threshold(std::size_t k);       // k pixels
double norm_precision_threshold(std::size_t k);  // k / 100

/// Ground truth and prediction for one sequence, as plain views. The CLI and
/// the Python bindings both evaluate through this type.
struct TrackView {
    std::span<const BoundingBox> gt;
    std::span<const std::uint8_t> absent;       // 1 = target absent
    std::span<const BoundingBox> pred;
    std::span<const std::uint8_t> pred_absent;  // optional explicit "absent" predictions
};

/// Throws Error(kLengthMismatch) when gt/absent/pred (and pred_absent, if
/// given) disagree in length.
void check_lengths(const TrackView& view, const std::string& sequence = {});

/// Present frames with a non-degenerate ground truth box.
bool evaluable(const TrackView& view, std::size_t i);

enum class Overlap { kIou, kCompleteIou };

struct Curve {
    std::vector<double> values;
    double score = 0.0;
};

/// curve[k] = fraction of evaluable frames with overlap > k/20; score is the
/// curve mean. Throws Error(kEmptyEvaluation) with no evaluable frame.
Curve success(const TrackView& view, Overlap overlap);

/// curve[k] = fraction of evaluable frames with center error <= k px;
/// score is curve[20].
Curve precision(const TrackView& view);

/// curve[k] = fraction of evaluable frames with normalized center error
/// <= k/100; score is the curve mean.
Curve normalized_precision(const TrackView& view);

/// Mean per-frame accuracy over all frames. Present frames score their IoU;
/// absent frames score 1 when the prediction is empty (zero-area box or an
/// explicit absent flag) and 0 otherwise.
double macc(const TrackView& view);

struct Scores {
    double pre = 0.0;
    double npre = 0.0;
    double auc = 0.0;
    double cauc = 0.0;
    double macc = 0.0;

    friend bool operator==(const Scores&, const Scores&) = default;
};

struct Curves {
    std::vector<double> precision;
    std::vector<double> normalized_precision;
    std::vector<double> success;
    std::vector<double> complete_success;

    friend bool operator==(const Curves&, const Curves&) = default;
};

struct SequenceEvaluation {
    std::string sequence;
    std::size_t frames = 0;
    std::size_t evaluable_frames = 0;
    Scores scores;
    Curves curves;
};

/// All five scores and four curves for one sequence.
SequenceEvaluation evaluate_sequence(const TrackView& view, std::string sequence = {});

enum class Protocol { kCrossDomain, kWithinDomain };
Protocol parse_protocol(std::string_view name);
std::string_view to_string(Protocol protocol);

struct AttributeGroup {
    std::size_t sequences = 0;
    Scores scores;
};

struct TrackerReport {
    std::string tracker;
    std::vector<SequenceEvaluation> sequences;  // sorted by sequence name
    Scores mean;        // unweighted mean over sequences
    Curves mean_curves;
    std::map<std::string, AttributeGroup> attributes;  // "CODE=value" -> group mean
};

struct EvaluationReport {
    static constexpr int kSchemaVersion = 1;
    Protocol protocol = Protocol::kCrossDomain;
    std::string subset = "test";
    std::vector<TrackerReport> trackers;
};

/// Evaluates one tracker. Results are matched to sequences by name; a missing
/// result throws Error(kMissingResult) naming the sequence.
TrackerReport evaluate_tracker(std::span<const SequenceAnnotation> dataset,
                               std::span<const TrackerResult> results, std::size_t threads = 1);

/// Sequence-averaged scores and curves.
void summarize(TrackerReport& report);

/// Per-attribute means over sequences carrying each value. Attribute values
/// are the merged computed + file attributes of each annotation. Sequences
/// without an attribute are left out of its groups; empty groups are omitted.
std::map<std::string, AttributeGroup> attribute_breakdown(const TrackerReport& report,
                                                          std::span<const SequenceAnnotation> annotations);

enum class ResampleMode { kStride, kRandom };

struct ResampleSpec {
    ResampleMode mode = ResampleMode::kStride;
    std::size_t factor = 1;
    std::uint64_t seed = 0;
};

/// Retained frame indices, ascending. Stride keeps {0, f, 2f, ...}; random
/// keeps frame 0 plus a seeded uniform sample of ceil(n/f) - 1 other frames,
/// the stream derived from (seed, sequence name). Throws
/// Error(kDegenerateResample) when factor > n or factor == 0.
std::vector<std::size_t> retained_frames(std::size_t n, const ResampleSpec& spec, std::string_view sequence = {});

struct StabilityPoint {
    std::size_t factor = 1;
    ResampleMode mode = ResampleMode::kStride;
    double auc = 0.0;
    std::size_t sequences = 0;  // sequences with at least one evaluable retained frame
};

/// Self-test mode: subsamples both the ground truth and a dense result and
/// averages AUC over sequences.
std::vector<StabilityPoint> framerate_stability(std::span<const SequenceAnnotation> dataset,
                                                std::span<const TrackerResult> dense_results,
                                                std::span<const ResampleSpec> specs);

/// Re-run mode: `results` were produced on subsampled videos, so each holds
/// exactly one box per retained frame; only the ground truth is subsampled.
StabilityPoint framerate_point(std::span<const SequenceAnnotation> dataset,
                               std::span<const TrackerResult> results, const ResampleSpec& spec);

}  // namespace uotkit

#include "uotkit/error.hpp"

namespace uotkit {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidArgument: return "invalid-argument";
        case ErrorCode::kInvalidGeometry: return "invalid-geometry";
        case ErrorCode::kDegenerateGroundTruth: return "degenerate-groundtruth";
        case ErrorCode::kDegenerateGeometry: return "degenerate-geometry";
        case ErrorCode::kParse: return "parse";
        case ErrorCode::kSchema: return "schema";
        case ErrorCode::kMissingResult: return "missing-result";
        case ErrorCode::kLengthMismatch: return "length-mismatch";
        case ErrorCode::kEmptyDataset: return "empty-dataset";
        case ErrorCode::kNoPresentFrames: return "no-present-frames";
        case ErrorCode::kEmptyEvaluation: return "empty-evaluation";
        case ErrorCode::kDegenerateResample: return "degenerate-resample";
        case ErrorCode::kInvalidInit: return "invalid-init";
        case ErrorCode::kInvalidObservation: return "invalid-observation";
        case ErrorCode::kEmptyCandidates: return "empty-candidates";
        case ErrorCode::kCorruptContainer: return "corrupt-container";
        case ErrorCode::kDegenerateBatch: return "degenerate-batch";
        case ErrorCode::kInvalidHyperparameter: return "invalid-hyperparameter";
        case ErrorCode::kShapeMismatch: return "shape-mismatch";
        case ErrorCode::kRejectedInput: return "rejected-input";
        case ErrorCode::kIo: return "io";
    }
    return "unknown";
}

}  // namespace uotkit

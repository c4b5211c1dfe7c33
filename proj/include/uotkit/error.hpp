#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uotkit {

enum class ErrorCode {
    kInvalidArgument,
    kInvalidGeometry,
    kDegenerateGroundTruth,
    kDegenerateGeometry,
    kParse,
    kSchema,
    kMissingResult,
    kLengthMismatch,
    kEmptyDataset,
    kNoPresentFrames,
    kEmptyEvaluation,
    kDegenerateResample,
    kInvalidInit,
    kInvalidObservation,
    kEmptyCandidates,
    kCorruptContainer,
    kDegenerateBatch,
    kInvalidHyperparameter,
    kShapeMismatch,
    kRejectedInput,
    kIo,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the toolkit is reported as an Error carrying
/// a code, so callers (CLI, bindings) can map it without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace uotkit

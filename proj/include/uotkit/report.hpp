#pragma once

#include <string>

#include "uotkit/metrics.hpp"

namespace uotkit {

/// report.json: schema_version, protocol, subset and one entry per tracker
/// with its mean scores, mean curves (with their threshold grids), attribute
/// groups and per-sequence scores. Keys keep a fixed order so equal reports
/// serialize to equal bytes.
std::string evaluation_report_json(const EvaluationReport& report);

/// per_sequence.csv: tracker,sequence,frames,evaluable_frames,pre,npre,auc,cauc,macc
/// with shortest round-trip numbers.
std::string per_sequence_csv(const EvaluationReport& report);

}  // namespace uotkit

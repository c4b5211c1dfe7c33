#include "uotkit/report.hpp"

#include <nlohmann/json.hpp>

#include "uotkit/text.hpp"

namespace uotkit {

namespace {

using Json = nlohmann::ordered_json;

Json scores_json(const Scores& s) {
    return Json{{"pre", s.pre}, {"npre", s.npre}, {"auc", s.auc}, {"cauc", s.cauc}, {"macc", s.macc}};
}

Json grid(std::size_t points, double (*threshold)(std::size_t)) {
    Json out = Json::array();
    for (std::size_t k = 0; k < points; ++k) {
        out.push_back(threshold(k));
    }
    return out;
}

Json curves_json(const Curves& c) {
    Json out;
    out["precision"] = {{"thresholds", grid(kPrecisionPoints, precision_threshold)}, {"values", c.precision}};
    out["normalized_precision"] = {{"thresholds", grid(kNormPrecisionPoints, norm_precision_threshold)},
                                   {"values", c.normalized_precision}};
    out["success"] = {{"thresholds", grid(kSuccessPoints, success_threshold)}, {"values", c.success}};
    out["complete_success"] = {{"thresholds", grid(kSuccessPoints, success_threshold)},
                               {"values", c.complete_success}};
    return out;
}

}  // namespace

std::string evaluation_report_json(const EvaluationReport& report) {
    Json root;
    root["schema_version"] = EvaluationReport::kSchemaVersion;
    root["protocol"] = std::string(to_string(report.protocol));
    root["subset"] = report.subset;
    root["trackers"] = Json::array();
    for (const auto& tr : report.trackers) {
        Json t;
        t["tracker"] = tr.tracker;
        t["sequence_count"] = tr.sequences.size();
        t["scores"] = scores_json(tr.mean);
        t["curves"] = curves_json(tr.mean_curves);
        Json attrs = Json::object();
        for (const auto& [key, group] : tr.attributes) {
            attrs[key] = {{"sequences", group.sequences}, {"scores", scores_json(group.scores)}};
        }
        t["attributes"] = std::move(attrs);
        Json seqs = Json::array();
        for (const auto& s : tr.sequences) {
            seqs.push_back({{"sequence", s.sequence},
                            {"frames", s.frames},
                            {"evaluable_frames", s.evaluable_frames},
                            {"scores", scores_json(s.scores)}});
        }
        t["sequences"] = std::move(seqs);
        root["trackers"].push_back(std::move(t));
    }
    return root.dump(2) + "\n";
}

std::string per_sequence_csv(const EvaluationReport& report) {
    std::string out = "tracker,sequence,frames,evaluable_frames,pre,npre,auc,cauc,macc\n";
    for (const auto& tr : report.trackers) {
        for (const auto& s : tr.sequences) {
            out += tr.tracker + "," + s.sequence + "," + std::to_string(s.frames) + "," +
                   std::to_string(s.evaluable_frames);
            for (double v : {s.scores.pre, s.scores.npre, s.scores.auc, s.scores.cauc, s.scores.macc}) {
                out += "," + text::format_double(v);
            }
            out += "\n";
        }
    }
    return out;
}

}  // namespace uotkit

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "uotkit/report.hpp"
#include "uotkit/text.hpp"

using namespace uotkit;
using Json = nlohmann::ordered_json;

namespace {

struct Scene {
    std::vector<SequenceAnnotation> data;
    std::vector<TrackerResult> results;
};

Scene scene(std::uint64_t seed, std::size_t count) {
    CounterRng rng(seed);
    Scene s;
    for (std::size_t i = 0; i < count; ++i) {
        auto seq = testkit::random_sequence(rng, "s" + std::to_string(i), 20 + rng.below(60));
        s.results.push_back({"T", seq.name, testkit::random_prediction(rng, seq), {}});
        s.data.push_back(std::move(seq));
    }
    return s;
}

EvaluationReport build(const Scene& s, std::size_t threads) {
    EvaluationReport r;
    r.subset = "test";
    TrackerReport t = evaluate_tracker(s.data, s.results, threads);
    t.tracker = "T";
    t.attributes = attribute_breakdown(t, s.data);
    r.trackers.push_back(std::move(t));
    return r;
}

}  // namespace

TEST(ReportJson, Structure) {
    const Scene s = scene(91, 6);
    const EvaluationReport r = build(s, 1);
    const Json j = Json::parse(evaluation_report_json(r));
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"schema_version", "protocol", "subset", "trackers"}));
    EXPECT_EQ(j["schema_version"], 1);
    EXPECT_EQ(j["protocol"], std::string(to_string(Protocol::kCrossDomain)));
    ASSERT_EQ(j["trackers"].size(), 1u);
    const Json& t = j["trackers"][0];
    EXPECT_EQ(t["tracker"], "T");
    EXPECT_EQ(t["sequence_count"], 6);
    EXPECT_EQ(t["scores"]["auc"].get<double>(), r.trackers[0].mean.auc);
    EXPECT_EQ(t["scores"]["macc"].get<double>(), r.trackers[0].mean.macc);
    EXPECT_EQ(t["curves"]["success"]["thresholds"].size(), 21u);
    EXPECT_EQ(t["curves"]["success"]["values"].size(), 21u);
    EXPECT_EQ(t["curves"]["precision"]["thresholds"].size(), 51u);
    EXPECT_EQ(t["curves"]["precision"]["thresholds"][20].get<double>(), 20.0);
    EXPECT_EQ(t["curves"]["normalized_precision"]["thresholds"].size(), 51u);
    EXPECT_EQ(t["curves"]["complete_success"]["values"].size(), 21u);
    ASSERT_EQ(t["sequences"].size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        const auto& e = r.trackers[0].sequences[i];
        EXPECT_EQ(t["sequences"][i]["sequence"], e.sequence);
        EXPECT_EQ(t["sequences"][i]["frames"], e.frames);
        EXPECT_EQ(t["sequences"][i]["scores"]["pre"].get<double>(), e.scores.pre);
    }
    EXPECT_FALSE(t["attributes"].empty());
    for (const auto& [key, group] : t["attributes"].items()) {
        EXPECT_NE(key.find('='), std::string::npos);
        EXPECT_GE(group["sequences"].get<int>(), 1);
    }
}

TEST(ReportJson, ByteDeterministicAcrossThreads) {
    const Scene s = scene(92, 12);
    EXPECT_EQ(evaluation_report_json(build(s, 1)), evaluation_report_json(build(s, 4)));
    EXPECT_EQ(per_sequence_csv(build(s, 1)), per_sequence_csv(build(s, 3)));
}

TEST(ReportCsv, HeaderAndRows) {
    const Scene s = scene(93, 5);
    const EvaluationReport r = build(s, 1);
    const std::string csv = per_sequence_csv(r);
    const auto lines = text::split_lines(csv);
    ASSERT_EQ(lines.size(), 6u);
    EXPECT_EQ(lines[0], "tracker,sequence,frames,evaluable_frames,pre,npre,auc,cauc,macc");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = text::split_fields(lines[i]);
        ASSERT_EQ(f.size(), 9u);
        const auto& e = r.trackers[0].sequences[i - 1];
        EXPECT_EQ(f[0], "T");
        EXPECT_EQ(f[1], e.sequence);
        EXPECT_EQ(f[2], std::to_string(e.frames));
        EXPECT_EQ(f[3], std::to_string(e.evaluable_frames));
        EXPECT_EQ(*text::parse_double(f[6]), e.scores.auc);
        EXPECT_EQ(*text::parse_double(f[8]), e.scores.macc);
    }
}

TEST(ReportCsv, EmptyReportHasHeaderOnly) {
    EXPECT_EQ(per_sequence_csv(EvaluationReport{}), "tracker,sequence,frames,evaluable_frames,pre,npre,auc,cauc,macc\n");
    const Json j = Json::parse(evaluation_report_json(EvaluationReport{}));
    EXPECT_TRUE(j["trackers"].empty());
}

#include "uotkit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "uotkit/parallel.hpp"
#include "uotkit/text.hpp"

namespace uotkit {

namespace {

using nlohmann::json;

std::string sequence_name(const fs::path& dir) {
    fs::path p = dir.lexically_normal();
    if (p.filename().empty()) {
        p = p.parent_path();
    }
    return p.filename().string();
}

class IssueSink {
public:
    explicit IssueSink(std::string sequence) : sequence_(std::move(sequence)) {}

    void error(ErrorCode code, std::string message) {
        issues_.push_back({sequence_, Severity::kError, std::move(message), code});
    }
    void warning(std::string message) {
        issues_.push_back({sequence_, Severity::kWarning, std::move(message), ErrorCode::kSchema});
    }
    bool has_errors() const {
        return std::any_of(issues_.begin(), issues_.end(),
                           [](const Issue& i) { return i.severity == Severity::kError; });
    }
    std::vector<Issue>& issues() { return issues_; }

private:
    std::string sequence_;
    std::vector<Issue> issues_;
};

std::vector<std::uint8_t> parse_absent(std::string_view content, std::string_view source) {
    std::vector<std::uint8_t> flags;
    const auto lines = text::split_lines(content);
    std::size_t last = lines.size();
    while (last > 0 && text::trim(lines[last - 1]).empty()) {
        --last;
    }
    flags.reserve(last);
    for (std::size_t i = 0; i < last; ++i) {
        const std::string_view v = text::trim(lines[i]);
        if (v == "0") {
            flags.push_back(0);
        } else if (v == "1") {
            flags.push_back(1);
        } else {
            throw Error(ErrorCode::kParse, std::string(source) + ":" + std::to_string(i + 1) +
                                               ": expected 0 or 1, got '" + std::string(v) + "'");
        }
    }
    return flags;
}

std::string first_line(std::string_view content) {
    const auto lines = text::split_lines(content);
    return lines.empty() ? std::string() : std::string(lines.front());
}

struct Meta {
    std::string class_name;
    std::string superclass;
    int width = 0;
    int height = 0;
    double fps = 30.0;
};

Meta parse_meta(std::string_view content, std::string_view source) {
    json j;
    try {
        j = json::parse(content);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, std::string(source) + ": " + e.what());
    }
    if (!j.is_object()) {
        throw Error(ErrorCode::kParse, std::string(source) + ": expected a JSON object");
    }
    Meta meta;
    try {
        meta.class_name = j.at("class").get<std::string>();
        meta.superclass = j.at("superclass").get<std::string>();
        meta.width = j.at("width").get<int>();
        meta.height = j.at("height").get<int>();
        if (j.contains("fps")) {
            meta.fps = j.at("fps").get<double>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kSchema, std::string(source) + ": " + e.what());
    }
    return meta;
}

// Shared by load_sequence (throws on the first error) and validate (collects).
std::optional<SequenceAnnotation> inspect_sequence(const fs::path& dir, IssueSink& sink) {
    SequenceAnnotation seq;
    seq.name = sequence_name(dir);
    const auto file = [&](std::string_view name) { return dir / fs::path(std::string(name)); };

    if (!fs::is_directory(dir)) {
        sink.error(ErrorCode::kIo, "sequence directory " + dir.string() + " does not exist");
        return std::nullopt;
    }

    try {
        const std::string source = seq.name + "/" + std::string(kGroundTruthFile);
        seq.boxes = parse_box_lines(text::read_file(file(kGroundTruthFile)), source, false).boxes;
    } catch (const Error& e) {
        sink.error(e.code(), e.what());
        return std::nullopt;
    }
    const std::size_t n = seq.boxes.size();

    seq.absent.assign(n, 0);
    if (fs::exists(file(kAbsentFile))) {
        try {
            auto flags = parse_absent(text::read_file(file(kAbsentFile)), seq.name + "/" + std::string(kAbsentFile));
            if (flags.size() != n) {
                sink.error(ErrorCode::kSchema, std::string(kGroundTruthFile) + " has " + std::to_string(n) +
                                                   " frames but " + std::string(kAbsentFile) + " has " +
                                                   std::to_string(flags.size()));
            } else {
                seq.absent = std::move(flags);
            }
        } catch (const Error& e) {
            sink.error(e.code(), e.what());
        }
    }

    if (fs::exists(file(kLanguageFile))) {
        try {
            seq.language_prompt = first_line(text::read_file(file(kLanguageFile)));
        } catch (const Error& e) {
            sink.error(e.code(), e.what());
        }
    }

    if (fs::exists(file(kAttributesFile))) {
        try {
            seq.attributes = parse_attributes(text::read_file(file(kAttributesFile)),
                                              seq.name + "/" + std::string(kAttributesFile));
        } catch (const Error& e) {
            sink.error(e.code(), e.what());
        }
    }

    try {
        const Meta meta = parse_meta(text::read_file(file(kMetaFile)), seq.name + "/" + std::string(kMetaFile));
        seq.class_name = meta.class_name;
        seq.superclass = canonical_superclass(meta.superclass);
        seq.frame_width = meta.width;
        seq.frame_height = meta.height;
        seq.fps = meta.fps;
        if (seq.superclass.empty()) {
            sink.error(ErrorCode::kSchema, "unknown superclass '" + meta.superclass + "'");
        }
        if (meta.width <= 0 || meta.height <= 0) {
            sink.error(ErrorCode::kSchema, "frame size must be positive");
        }
        if (!(meta.fps > 0.0) || !std::isfinite(meta.fps)) {
            sink.error(ErrorCode::kSchema, "fps must be positive");
        }
    } catch (const Error& e) {
        sink.error(e.code(), e.what());
    }

    if (sink.has_errors()) {
        return std::nullopt;
    }

    std::size_t non_finite = 0;
    std::size_t empty_present = 0;
    std::size_t outside = 0;
    std::size_t first_bad = n;
    std::size_t first_outside = n;
    std::size_t present_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        BoundingBox& b = seq.boxes[i];
        if (!seq.present(i)) {
            // Absent frames may carry anything; only the flag is trusted.
            if (!b.is_finite()) {
                b = BoundingBox{};
            }
            continue;
        }
        ++present_count;
        if (!b.is_finite()) {
            ++non_finite;
            first_bad = std::min(first_bad, i);
            continue;
        }
        if (!(b.w > 0.0) || !(b.h > 0.0)) {
            ++empty_present;
            first_bad = std::min(first_bad, i);
            continue;
        }
        if (b.x < 0.0 || b.y < 0.0 || b.right() > seq.frame_width || b.bottom() > seq.frame_height) {
            ++outside;
            first_outside = std::min(first_outside, i);
        }
    }
    if (non_finite > 0) {
        sink.error(ErrorCode::kSchema, std::to_string(non_finite) + " present frame(s) with non-finite box, first at frame " +
                                           std::to_string(first_bad));
    }
    if (empty_present > 0) {
        sink.error(ErrorCode::kSchema, std::to_string(empty_present) +
                                           " present frame(s) with non-positive width or height, first at frame " +
                                           std::to_string(first_bad));
    }
    if (outside > 0) {
        sink.warning(std::to_string(outside) + " box(es) extend past the frame edge, first at frame " +
                     std::to_string(first_outside));
    }
    if (present_count == 0) {
        sink.warning("no frame has the target present");
    }
    if (sink.has_errors()) {
        return std::nullopt;
    }

    if (present_count > 0) {
        const auto merged = merge_attributes(auto_attributes(seq), seq.attributes);
        for (const auto& c : merged.conflicts) {
            sink.warning(std::string(code_name(c.code)) + " in " + std::string(kAttributesFile) + " is '" +
                         c.file_value + "' but the annotation gives '" + c.computed_value + "'");
        }
    }
    return seq;
}

std::vector<std::string> read_manifest(const fs::path& path) {
    std::vector<std::string> names;
    const std::string content = text::read_file(path);
    for (std::string_view line : text::split_lines(content)) {
        line = text::trim(line);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        names.emplace_back(line);
    }
    return names;
}

}  // namespace

std::string canonical_superclass(std::string_view name) {
    std::string folded = text::to_lower(text::trim(name));
    std::replace(folded.begin(), folded.end(), '_', ' ');
    if (folded == "mammal (except humans)") {
        folded = "mammal";
    }
    for (std::string_view s : kSuperclasses) {
        if (s == folded) {
            return std::string(s);
        }
    }
    return {};
}

BoxLines parse_box_lines(std::string_view content, std::string_view source, bool allow_confidence) {
    BoxLines out;
    const auto lines = text::split_lines(content);
    std::size_t last = lines.size();
    while (last > 0 && text::trim(lines[last - 1]).empty()) {
        --last;
    }
    out.boxes.reserve(last);
    std::optional<std::size_t> columns;
    for (std::size_t i = 0; i < last; ++i) {
        const std::string where = std::string(source) + ":" + std::to_string(i + 1);
        const auto fields = text::split_fields(text::trim(lines[i]));
        const std::size_t max_fields = allow_confidence ? 5 : 4;
        if (fields.size() < 4 || fields.size() > max_fields) {
            throw Error(ErrorCode::kParse, where + ": expected " +
                                               (allow_confidence ? std::string("4 or 5") : std::string("4")) +
                                               " values, got " + std::to_string(fields.size()));
        }
        if (columns && *columns != fields.size()) {
            throw Error(ErrorCode::kParse, where + ": column count changes within the file");
        }
        columns = fields.size();
        double v[5] = {};
        for (std::size_t k = 0; k < fields.size(); ++k) {
            const auto parsed = text::parse_double(fields[k]);
            if (!parsed) {
                throw Error(ErrorCode::kParse, where + ": '" + std::string(text::trim(fields[k])) + "' is not a number");
            }
            v[k] = *parsed;
        }
        out.boxes.push_back({v[0], v[1], v[2], v[3]});
        if (fields.size() == 5) {
            if (!(v[4] >= 0.0 && v[4] <= 1.0)) {
                throw Error(ErrorCode::kParse, where + ": confidence must lie in [0, 1]");
            }
            out.confidence.push_back(v[4]);
        }
    }
    return out;
}

std::string format_box_lines(std::span<const BoundingBox> boxes, std::span<const double> confidence) {
    std::string out;
    out.reserve(boxes.size() * 32);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const BoundingBox& b = boxes[i];
        out += text::format_double(b.x);
        out += ',';
        out += text::format_double(b.y);
        out += ',';
        out += text::format_double(b.w);
        out += ',';
        out += text::format_double(b.h);
        if (!confidence.empty()) {
            out += ',';
            out += text::format_double(confidence[i]);
        }
        out += '\n';
    }
    return out;
}

SequenceAnnotation load_sequence(const fs::path& dir) {
    IssueSink sink(sequence_name(dir));
    auto seq = inspect_sequence(dir, sink);
    for (const Issue& issue : sink.issues()) {
        if (issue.severity == Severity::kError) {
            throw Error(issue.code, issue.sequence + ": " + issue.message);
        }
    }
    return std::move(*seq);
}

void write_sequence(const fs::path& dir, const SequenceAnnotation& seq) {
    fs::create_directories(dir);
    text::write_file(dir / std::string(kGroundTruthFile), format_box_lines(seq.boxes));
    std::string absent;
    absent.reserve(seq.absent.size() * 2);
    for (std::uint8_t a : seq.absent) {
        absent += a ? "1\n" : "0\n";
    }
    text::write_file(dir / std::string(kAbsentFile), absent);
    text::write_file(dir / std::string(kLanguageFile), seq.language_prompt + "\n");
    text::write_file(dir / std::string(kAttributesFile), format_attributes(seq.attributes));
    json meta = {
        {"class", seq.class_name},
        {"superclass", seq.superclass},
        {"width", seq.frame_width},
        {"height", seq.frame_height},
        {"fps", seq.fps},
    };
    text::write_file(dir / std::string(kMetaFile), meta.dump(2) + "\n");
}

fs::path result_path(const fs::path& root, std::string_view tracker, std::string_view sequence) {
    return root / std::string(tracker) / (std::string(sequence) + ".txt");
}

TrackerResult load_result(const fs::path& root, std::string_view tracker, std::string_view sequence) {
    const fs::path path = result_path(root, tracker, sequence);
    if (!fs::exists(path)) {
        throw Error(ErrorCode::kMissingResult,
                    "no result for sequence '" + std::string(sequence) + "' (" + path.string() + ")");
    }
    auto parsed = parse_box_lines(text::read_file(path), path.string(), true);
    TrackerResult result;
    result.tracker = std::string(tracker);
    result.sequence = std::string(sequence);
    result.boxes = std::move(parsed.boxes);
    result.confidence = std::move(parsed.confidence);
    for (std::size_t i = 0; i < result.boxes.size(); ++i) {
        const BoundingBox& b = result.boxes[i];
        if (!b.is_finite() || b.w < 0.0 || b.h < 0.0) {
            throw Error(ErrorCode::kSchema, path.string() + ":" + std::to_string(i + 1) +
                                                ": predicted box must be finite with non-negative size");
        }
    }
    return result;
}

std::vector<TrackerResult> load_results(const fs::path& root, std::string_view tracker,
                                        std::span<const std::string> sequences) {
    std::vector<std::string> missing;
    for (const auto& name : sequences) {
        if (!fs::exists(result_path(root, tracker, name))) {
            missing.push_back(name);
        }
    }
    if (!missing.empty()) {
        std::string msg = "tracker '" + std::string(tracker) + "' has no result for " +
                          std::to_string(missing.size()) + " sequence(s):";
        for (const auto& m : missing) {
            msg += " " + m;
        }
        throw Error(ErrorCode::kMissingResult, msg);
    }
    std::vector<TrackerResult> results;
    results.reserve(sequences.size());
    for (const auto& name : sequences) {
        results.push_back(load_result(root, tracker, name));
    }
    return results;
}

void write_result(const fs::path& root, const TrackerResult& result) {
    text::write_file(result_path(root, result.tracker, result.sequence),
                     format_box_lines(result.boxes, result.confidence));
}

Subset parse_subset(std::string_view name) {
    const std::string s = text::to_lower(name);
    if (s == "train") return Subset::kTrain;
    if (s == "test") return Subset::kTest;
    if (s == "all") return Subset::kAll;
    throw Error(ErrorCode::kInvalidArgument, "unknown subset '" + std::string(name) + "' (train, test, all)");
}

std::string_view to_string(Subset subset) {
    switch (subset) {
        case Subset::kTrain: return "train";
        case Subset::kTest: return "test";
        case Subset::kAll: return "all";
    }
    return "all";
}

std::vector<std::string> DatasetIndex::sequences(Subset subset) const {
    std::set<std::string> names;
    if (subset != Subset::kTest) {
        names.insert(train.begin(), train.end());
    }
    if (subset != Subset::kTrain) {
        names.insert(test.begin(), test.end());
    }
    return {names.begin(), names.end()};
}

DatasetIndex open_dataset(const fs::path& root) {
    DatasetIndex index;
    index.root = root;
    const fs::path train = root / std::string(kTrainManifest);
    const fs::path test = root / std::string(kTestManifest);
    if (!fs::exists(train) && !fs::exists(test)) {
        throw Error(ErrorCode::kSchema, root.string() + " has neither " + std::string(kTrainManifest) +
                                            " nor " + std::string(kTestManifest));
    }
    if (fs::exists(train)) {
        index.train = read_manifest(train);
    }
    if (fs::exists(test)) {
        index.test = read_manifest(test);
    }
    return index;
}

std::vector<SequenceAnnotation> load_dataset(const DatasetIndex& index, Subset subset, std::size_t threads) {
    const auto names = index.sequences(subset);
    std::vector<SequenceAnnotation> out(names.size());
    parallel_for(names.size(), threads, [&](std::size_t i) { out[i] = load_sequence(index.root / names[i]); });
    return out;
}

std::size_t center_bin(double normalized) {
    const double scaled = std::floor(normalized * static_cast<double>(DatasetStats::kCenterBins));
    if (!(scaled > 0.0)) {
        return 0;
    }
    return std::min(static_cast<std::size_t>(scaled), DatasetStats::kCenterBins - 1);
}

std::size_t length_bin(std::size_t frames) {
    std::size_t bin = 0;
    while (bin < DatasetStats::kLengthEdges.size() && frames > DatasetStats::kLengthEdges[bin]) {
        ++bin;
    }
    return bin;
}

double DatasetStats::mean_frames() const {
    return video_count == 0 ? 0.0 : static_cast<double>(total_frames) / static_cast<double>(video_count);
}

void DatasetStats::add(const SequenceAnnotation& seq) {
    const std::size_t n = seq.frames();
    min_frames = video_count == 0 ? n : std::min(min_frames, n);
    max_frames = std::max(max_frames, n);
    ++video_count;
    total_frames += n;
    ++superclass_videos[seq.superclass];
    ++class_videos[seq.class_name];
    ++length_histogram[length_bin(n)];

    if (seq.frame_width > 0 && seq.frame_height > 0) {
        const double area = static_cast<double>(seq.frame_width) * seq.frame_height;
        const std::size_t size_bin = area < 640.0 * 480.0 ? 0 : (area >= 1280.0 * 720.0 ? 2 : 1);
        ++size_histogram[size_bin];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!seq.present(i)) {
            continue;
        }
        ++present_frames;
        if (seq.frame_width > 0 && seq.frame_height > 0) {
            const BoundingBox& b = seq.boxes[i];
            const std::size_t bx = center_bin(b.center_x() / seq.frame_width);
            const std::size_t by = center_bin(b.center_y() / seq.frame_height);
            ++center_histogram[by * kCenterBins + bx];
        }
    }
}

void DatasetStats::merge(const DatasetStats& other) {
    if (other.video_count == 0) {
        train_count += other.train_count;
        test_count += other.test_count;
        return;
    }
    min_frames = video_count == 0 ? other.min_frames : std::min(min_frames, other.min_frames);
    max_frames = std::max(max_frames, other.max_frames);
    video_count += other.video_count;
    train_count += other.train_count;
    test_count += other.test_count;
    total_frames += other.total_frames;
    present_frames += other.present_frames;
    for (const auto& [k, v] : other.superclass_videos) {
        superclass_videos[k] += v;
    }
    for (const auto& [k, v] : other.class_videos) {
        class_videos[k] += v;
    }
    for (std::size_t i = 0; i < length_histogram.size(); ++i) {
        length_histogram[i] += other.length_histogram[i];
    }
    for (std::size_t i = 0; i < center_histogram.size(); ++i) {
        center_histogram[i] += other.center_histogram[i];
    }
    for (std::size_t i = 0; i < size_histogram.size(); ++i) {
        size_histogram[i] += other.size_histogram[i];
    }
}

DatasetStats dataset_stats(const fs::path& root, std::size_t threads) {
    const DatasetIndex index = open_dataset(root);
    const auto names = index.sequences(Subset::kAll);
    if (names.empty()) {
        throw Error(ErrorCode::kEmptyDataset, root.string() + " lists no sequences");
    }
    std::vector<DatasetStats> partial(names.size());
    parallel_for(names.size(), threads, [&](std::size_t i) { partial[i].add(load_sequence(root / names[i])); });
    DatasetStats stats;
    for (const auto& p : partial) {
        stats.merge(p);
    }
    stats.train_count = index.sequences(Subset::kTrain).size();
    stats.test_count = index.sequences(Subset::kTest).size();
    return stats;
}

std::string_view to_string(Severity severity) {
    return severity == Severity::kError ? "error" : "warning";
}

std::vector<Issue> validate_sequence(const fs::path& dir) {
    IssueSink sink(sequence_name(dir));
    try {
        inspect_sequence(dir, sink);
    } catch (const std::exception& e) {
        sink.error(ErrorCode::kIo, e.what());
    }
    return std::move(sink.issues());
}

std::vector<Issue> validate(const fs::path& root) {
    std::vector<Issue> issues;
    DatasetIndex index;
    try {
        index = open_dataset(root);
    } catch (const std::exception& e) {
        issues.push_back({"", Severity::kError, e.what(), ErrorCode::kSchema});
        return issues;
    }
    const std::set<std::string> train(index.train.begin(), index.train.end());
    for (const auto& name : index.test) {
        if (train.count(name) != 0) {
            issues.push_back({name, Severity::kWarning, "listed in both train and test manifests", ErrorCode::kSchema});
        }
    }
    for (const auto& name : index.sequences(Subset::kAll)) {
        auto seq_issues = validate_sequence(root / name);
        issues.insert(issues.end(), std::make_move_iterator(seq_issues.begin()),
                      std::make_move_iterator(seq_issues.end()));
    }
    return issues;
}

}  // namespace uotkit

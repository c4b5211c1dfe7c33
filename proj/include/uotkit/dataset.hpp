#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uotkit/attributes.hpp"
#include "uotkit/error.hpp"
#include "uotkit/geometry.hpp"

namespace uotkit {

namespace fs = std::filesystem;

/// Superclass names, canonical spelling.
inline constexpr std::array<std::string_view, 12> kSuperclasses = {
    "amphibian", "arthropod", "bird",   "chordate", "coelenterate", "crustacean",
    "fish",      "mollusc",   "person", "mammal",   "reptile",      "inanimate object",
};

/// Canonical superclass name, or empty if unknown. Case-insensitive,
/// underscores read as spaces, "mammal (except humans)" accepted.
std::string canonical_superclass(std::string_view name);

// Per-sequence file names.
inline constexpr std::string_view kGroundTruthFile = "groundtruth_rect.txt";
inline constexpr std::string_view kAbsentFile = "absent.txt";
inline constexpr std::string_view kLanguageFile = "language.txt";
inline constexpr std::string_view kAttributesFile = "attributes.txt";
inline constexpr std::string_view kMetaFile = "meta.json";

struct SequenceAnnotation {
    std::string name;
    std::vector<BoundingBox> boxes;
    std::vector<std::uint8_t> absent;  // 1 = target absent in that frame
    std::string language_prompt;
    std::string class_name;
    std::string superclass;
    AttributeSet attributes;  // values read from attributes.txt
    int frame_width = 0;
    int frame_height = 0;
    double fps = 30.0;

    std::size_t frames() const { return boxes.size(); }
    bool present(std::size_t i) const { return absent[i] == 0; }

    friend bool operator==(const SequenceAnnotation&, const SequenceAnnotation&) = default;
};

struct TrackerResult {
    std::string tracker;
    std::string sequence;
    std::vector<BoundingBox> boxes;
    std::vector<double> confidence;  // empty when the file has no 5th column

    std::size_t frames() const { return boxes.size(); }
};

/// Parses `x,y,w,h[,confidence]` lines. Comma or tab separated. Blank lines
/// are only allowed at the end of the file. Throws Error(kParse) naming
/// `source` and the 1-based line number.
struct BoxLines {
    std::vector<BoundingBox> boxes;
    std::vector<double> confidence;
};
BoxLines parse_box_lines(std::string_view content, std::string_view source, bool allow_confidence);
std::string format_box_lines(std::span<const BoundingBox> boxes, std::span<const double> confidence = {});

/// Loads and validates one sequence directory; the sequence name is the
/// directory name. absent.txt, language.txt and attributes.txt are optional.
SequenceAnnotation load_sequence(const fs::path& dir);

/// Writes the files load_sequence reads. Numbers use shortest round-trip
/// formatting, so loading the result is bit-identical.
void write_sequence(const fs::path& dir, const SequenceAnnotation& seq);

/// Result files live at `<root>/<tracker>/<sequence>.txt`.
fs::path result_path(const fs::path& root, std::string_view tracker, std::string_view sequence);
TrackerResult load_result(const fs::path& root, std::string_view tracker, std::string_view sequence);
/// Throws Error(kMissingResult) listing every sequence without a file.
std::vector<TrackerResult> load_results(const fs::path& root, std::string_view tracker,
                                        std::span<const std::string> sequences);
void write_result(const fs::path& root, const TrackerResult& result);

enum class Subset { kTrain, kTest, kAll };
Subset parse_subset(std::string_view name);
std::string_view to_string(Subset subset);

inline constexpr std::string_view kTrainManifest = "train.txt";
inline constexpr std::string_view kTestManifest = "test.txt";

/// Split manifests of a dataset root.
struct DatasetIndex {
    fs::path root;
    std::vector<std::string> train;
    std::vector<std::string> test;

    /// Sorted, de-duplicated names of the requested split.
    std::vector<std::string> sequences(Subset subset) const;
};

/// Reads train.txt / test.txt. Either may be missing, not both.
DatasetIndex open_dataset(const fs::path& root);

/// Loads every sequence of the subset, in sorted name order.
std::vector<SequenceAnnotation> load_dataset(const DatasetIndex& index, Subset subset,
                                             std::size_t threads = 1);

/// Counters and histograms over a set of sequences. Accumulation is a
/// commutative, associative merge, so partial stats can be combined.
struct DatasetStats {
    static constexpr std::size_t kCenterBins = 51;
    // Video length bins: [1,600], (600,1200], (1200,1800], (1800,inf)
    static constexpr std::array<std::size_t, 3> kLengthEdges = {600, 1200, 1800};

    std::size_t video_count = 0;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    std::size_t total_frames = 0;
    std::size_t present_frames = 0;
    std::size_t min_frames = 0;
    std::size_t max_frames = 0;
    std::map<std::string, std::size_t> superclass_videos;
    std::map<std::string, std::size_t> class_videos;
    std::array<std::size_t, 4> length_histogram{};
    std::vector<std::size_t> center_histogram = std::vector<std::size_t>(kCenterBins * kCenterBins, 0);
    std::array<std::size_t, 3> size_histogram{};  // small, medium, large (SIZ rule)

    std::size_t class_count() const { return class_videos.size(); }
    double mean_frames() const;

    void add(const SequenceAnnotation& seq);
    void merge(const DatasetStats& other);

    friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

/// Bin index in [0, 51) for a normalized center coordinate; values outside
/// [0, 1] fall in the edge bins.
std::size_t center_bin(double normalized);
std::size_t length_bin(std::size_t frames);

/// Stats over the union of both manifests. Throws Error(kEmptyDataset) if no
/// sequence is listed.
DatasetStats dataset_stats(const fs::path& root, std::size_t threads = 1);

enum class Severity { kWarning, kError };
std::string_view to_string(Severity severity);

struct Issue {
    std::string sequence;
    Severity severity;
    std::string message;
    ErrorCode code = ErrorCode::kSchema;
};

/// Checks every sequence listed in the manifests. Never throws; problems
/// (including unreadable files) come back as issues.
std::vector<Issue> validate(const fs::path& root);

/// Issues for one sequence directory, the same checks load_sequence applies
/// plus warnings (boxes outside the frame, attribute conflicts).
std::vector<Issue> validate_sequence(const fs::path& dir);

}  // namespace uotkit

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "uotkit/dataset.hpp"
#include "uotkit/geometry.hpp"
#include "uotkit/matp.hpp"
#include "uotkit/rng.hpp"

namespace uotkit::testkit {

namespace fs = std::filesystem;

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string read_bytes(const fs::path& path);

BoundingBox random_box(CounterRng& rng, double max_xy = 500.0, double min_wh = 1.0, double max_wh = 120.0);

/// Random annotation: a drifting box, about 15% absent frames, a few
/// degenerate ground-truth boxes on present frames when `allow_degenerate`.
SequenceAnnotation random_sequence(CounterRng& rng, const std::string& name, std::size_t frames,
                                   bool allow_degenerate = false);

/// Noisy prediction of `gt`: jitter, occasional misses far away, occasional
/// zero-area boxes.
std::vector<BoundingBox> random_prediction(CounterRng& rng, const SequenceAnnotation& gt);

/// Two-blob distractor scene. A 40x40 target moves +2 px/frame in x; the
/// search grid (n = 16, stride 10) is centred on the previous true center,
/// so it matches the anchored mapping exactly. During the lock window a
/// second blob 65 px below the target peaks higher (1.0 vs 0.9) and the raw
/// argmax box jumps onto it; outside the window it peaks at 0.7.
struct DriftFixture {
    std::vector<BoundingBox> truth;  // frames boxes, truth[0] is the init box
    std::vector<BoundingBox> raw;    // raw argmax boxes, raw[0] = truth[0]
    std::size_t n = 16;
    std::vector<float> maps;         // (frames - 1) x n x n, for frames 1..frames-1
    std::vector<MatpFrame> frames;   // the same maps with their true mapping
    std::size_t lock_start = 0;
    std::size_t lock_length = 0;
};

DriftFixture make_drift_fixture(std::size_t frames = 100, std::size_t lock_start = 30, std::size_t lock_length = 40);

/// Fraction of frames 1..T-1 whose box has iou >= 0.5 with the truth.
double tracked_fraction(const std::vector<BoundingBox>& boxes, const std::vector<BoundingBox>& truth);

/// Writes a small dataset: `count` sequences split between train.txt and
/// test.txt, results for `trackers` under root/results, and response
/// containers for the first tracker under root/responses. Returns the
/// dataset root (root/data).
struct SyntheticDataset {
    fs::path data;
    fs::path results;
    fs::path responses;
    std::vector<std::string> train;
    std::vector<std::string> test;
};

SyntheticDataset write_synthetic_dataset(const fs::path& root, std::uint64_t seed, std::size_t count,
                                         const std::vector<std::string>& trackers, std::size_t max_frames = 80);

}  // namespace uotkit::testkit

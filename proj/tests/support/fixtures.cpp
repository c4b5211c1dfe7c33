#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <cstdio>

#include <unistd.h>

#include "uotkit/response_io.hpp"
#include "uotkit/text.hpp"

namespace uotkit::testkit {

namespace {

std::atomic<std::uint64_t> g_temp_counter{0};

constexpr double kFrameW = 640.0;
constexpr double kFrameH = 480.0;

double clampd(double v, double lo, double hi) { return std::max(lo, std::min(hi, v)); }

void add_blob(std::vector<float>& map, std::size_t n, std::size_t row, std::size_t col, double peak) {
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double dr = static_cast<double>(r) - static_cast<double>(row);
            const double dc = static_cast<double>(c) - static_cast<double>(col);
            const double v = peak * std::exp(-(dr * dr + dc * dc) / 2.0);
            map[r * n + c] = std::max(map[r * n + c], static_cast<float>(v));
        }
    }
}

}  // namespace

TempDir::TempDir(const std::string& tag) {
    const auto id = g_temp_counter.fetch_add(1);
    std::ostringstream name;
    name << "uotkit_" << tag << "_" << ::getpid() << "_" << id;
    path_ = fs::temp_directory_path() / name.str();
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

BoundingBox random_box(CounterRng& rng, double max_xy, double min_wh, double max_wh) {
    return {rng.uniform(0.0, max_xy), rng.uniform(0.0, max_xy), rng.uniform(min_wh, max_wh),
            rng.uniform(min_wh, max_wh)};
}

SequenceAnnotation random_sequence(CounterRng& rng, const std::string& name, std::size_t frames,
                                   bool allow_degenerate) {
    SequenceAnnotation seq;
    seq.name = name;
    seq.frame_width = static_cast<int>(kFrameW);
    seq.frame_height = static_cast<int>(kFrameH);
    seq.class_name = "fish";
    seq.superclass = "fish";
    seq.language_prompt = "a fish swimming";

    double w = rng.uniform(8.0, 120.0);
    double h = rng.uniform(8.0, 120.0);
    double x = rng.uniform(0.0, kFrameW - w);
    double y = rng.uniform(0.0, kFrameH - h);
    const double absent_rate = rng.uniform() < 0.3 ? 0.0 : 0.15;
    for (std::size_t i = 0; i < frames; ++i) {
        // Random walk; an occasional large jump exercises fast motion.
        const double jump = rng.uniform() < 0.05 ? 25.0 : 3.0;
        x = clampd(x + rng.uniform(-jump, jump), 0.0, kFrameW - w);
        y = clampd(y + rng.uniform(-jump, jump), 0.0, kFrameH - h);
        w = clampd(w * rng.uniform(0.95, 1.05), 2.0, 200.0);
        h = clampd(h * rng.uniform(0.95, 1.05), 2.0, 200.0);
        x = std::min(x, kFrameW - w);
        y = std::min(y, kFrameH - h);
        const bool absent = i > 0 && rng.uniform() < absent_rate;
        seq.absent.push_back(absent ? 1 : 0);
        if (absent) {
            seq.boxes.push_back({});
        } else if (allow_degenerate && rng.uniform() < 0.03) {
            seq.boxes.push_back({x, y, 0.0, h});
        } else {
            seq.boxes.push_back({x, y, w, h});
        }
    }
    return seq;
}

std::vector<BoundingBox> random_prediction(CounterRng& rng, const SequenceAnnotation& gt) {
    std::vector<BoundingBox> out;
    out.reserve(gt.frames());
    for (std::size_t i = 0; i < gt.frames(); ++i) {
        const BoundingBox& g = gt.boxes[i];
        const double u = rng.uniform();
        if (u < 0.05) {
            out.push_back({});
        } else if (u < 0.15 || g.is_degenerate()) {
            out.push_back(random_box(rng, 500.0, 4.0, 100.0));
        } else {
            const double s = std::max(g.w, g.h);
            out.push_back({g.x + rng.normal() * 0.1 * s, g.y + rng.normal() * 0.1 * s,
                           g.w * rng.uniform(0.8, 1.25), g.h * rng.uniform(0.8, 1.25)});
        }
    }
    return out;
}

DriftFixture make_drift_fixture(std::size_t frames, std::size_t lock_start, std::size_t lock_length) {
    DriftFixture f;
    f.lock_start = lock_start;
    f.lock_length = lock_length;
    const std::size_t n = f.n;
    const double size = 40.0;
    const double stride = 10.0;  // 4 * sqrt(40 * 40) / 16, the anchored stride
    const double speed = 2.0;
    const std::size_t mid = n / 2;

    for (std::size_t t = 0; t < frames; ++t) {
        f.truth.push_back(BoundingBox::from_center(200.0 + speed * static_cast<double>(t), 240.0, size, size));
    }
    f.raw.push_back(f.truth[0]);

    for (std::size_t t = 1; t < frames; ++t) {
        const BoundingBox& prev = f.truth[t - 1];
        // The grid is centred near the previous target and shifted so the
        // target sits exactly on the middle cell.
        GridMapping m;
        m.stride_x = stride;
        m.stride_y = stride;
        m.box_w = size;
        m.box_h = size;
        m.origin_x = prev.center_x() + speed - (static_cast<double>(mid) + 0.5) * stride;
        m.origin_y = prev.center_y() - (static_cast<double>(mid) + 0.5) * stride;

        const bool locked = t >= lock_start && t < lock_start + lock_length;
        double progress = 0.0;
        if (lock_length > 1 && locked) {
            progress = static_cast<double>(t - lock_start) / static_cast<double>(lock_length - 1);
        }
        const double offset_x = 55.0 - 110.0 * progress;
        const long dcol = std::lround(offset_x / stride);
        const std::size_t drow = mid + 6;
        const std::size_t dc = static_cast<std::size_t>(static_cast<long>(mid) + dcol);

        std::vector<float> map(n * n, 0.0f);
        add_blob(map, n, mid, mid, 0.9);
        add_blob(map, n, drow, dc, locked ? 1.0 : 0.7);

        const BoundingBox raw = locked ? m.cell_box(drow, dc) : m.cell_box(mid, mid);
        f.raw.push_back(raw);
        f.maps.insert(f.maps.end(), map.begin(), map.end());
        f.frames.push_back(MatpFrame{ResponseMap{n, map, m}, raw});
    }
    return f;
}

double tracked_fraction(const std::vector<BoundingBox>& boxes, const std::vector<BoundingBox>& truth) {
    std::size_t hits = 0;
    const std::size_t count = std::min(boxes.size(), truth.size());
    if (count < 2) {
        return 0.0;
    }
    for (std::size_t t = 1; t < count; ++t) {
        if (iou(boxes[t], truth[t]) >= 0.5) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(count - 1);
}

SyntheticDataset write_synthetic_dataset(const fs::path& root, std::uint64_t seed, std::size_t count,
                                         const std::vector<std::string>& trackers, std::size_t max_frames) {
    SyntheticDataset ds;
    ds.data = root / "data";
    ds.results = root / "results";
    ds.responses = root / "responses";
    fs::create_directories(ds.data);
    fs::create_directories(ds.responses);

    CounterRng base(seed);
    static const char* kClasses[] = {"clownfish", "octopus", "diver", "turtle", "jellyfish", "shark"};
    static const char* kSupers[] = {"fish", "mollusc", "person", "reptile", "coelenterate", "fish"};

    std::string train_manifest;
    std::string test_manifest;
    for (std::size_t i = 0; i < count; ++i) {
        CounterRng rng = base.split(i);
        char name[32];
        std::snprintf(name, sizeof(name), "seq_%03zu", i);
        const std::size_t frames = 10 + rng.below(max_frames > 10 ? max_frames - 9 : 1);
        SequenceAnnotation seq = random_sequence(rng, name, frames);
        seq.class_name = kClasses[i % 6];
        seq.superclass = kSupers[i % 6];
        write_sequence(ds.data / name, seq);
        if (i % 3 == 0) {
            ds.train.emplace_back(name);
            train_manifest += std::string(name) + "\n";
        } else {
            ds.test.emplace_back(name);
            test_manifest += std::string(name) + "\n";
        }

        for (std::size_t k = 0; k < trackers.size(); ++k) {
            CounterRng trng = rng.split(trackers[k]);
            TrackerResult r;
            r.tracker = trackers[k];
            r.sequence = name;
            r.boxes = random_prediction(trng, seq);
            r.boxes[0] = seq.boxes[0];
            for (auto& b : r.boxes) {
                if (b.is_degenerate()) {
                    b = seq.boxes[0];
                }
            }
            if (k == 0) {
                for (std::size_t t = 0; t < r.boxes.size(); ++t) {
                    r.confidence.push_back(std::round(trng.uniform() * 1000.0) / 1000.0);
                }
            }
            write_result(ds.results, r);

            if (k == 0) {
                ResponseContainer c;
                c.n = 16;
                c.frames = static_cast<std::uint32_t>(frames - 1);
                c.scores.assign(c.frames * c.n * c.n, 0.0f);
                for (std::size_t t = 0; t < c.frames; ++t) {
                    std::vector<float> map(c.n * c.n, 0.0f);
                    add_blob(map, c.n, 8, 8, 0.9);
                    add_blob(map, c.n, 2 + trng.below(4), 2 + trng.below(12), trng.uniform(0.3, 1.0));
                    std::copy(map.begin(), map.end(), c.scores.begin() + static_cast<long>(t * c.n * c.n));
                }
                write_response_container(ds.responses / (std::string(name) + ".bin"), c);
            }
        }
    }
    text::write_file(ds.data / std::string(kTrainManifest), train_manifest);
    text::write_file(ds.data / std::string(kTestManifest), test_manifest);
    return ds;
}

}  // namespace uotkit::testkit

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "uotkit/attributes.hpp"
#include "uotkit/dataset.hpp"
#include "uotkit/distill.hpp"
#include "uotkit/error.hpp"
#include "uotkit/gradcheck.hpp"
#include "uotkit/matp.hpp"
#include "uotkit/metrics.hpp"
#include "uotkit/parallel.hpp"
#include "uotkit/report.hpp"
#include "uotkit/response_io.hpp"
#include "uotkit/text.hpp"

namespace uotkit::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Thrown for failed self-checks; maps to kExitInternal.
struct InvariantFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
    return buf;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    for (auto field : text::split_fields(text)) {
        const auto t = text::trim(field);
        if (!t.empty()) {
            out.emplace_back(t);
        }
    }
    return out;
}

template <std::size_t N>
std::array<double, N> parse_diagonal(const std::string& text, const std::string& flag) {
    const auto fields = split_list(text);
    if (fields.size() != N) {
        throw Error(ErrorCode::kInvalidArgument,
                    flag + " needs " + std::to_string(N) + " comma-separated values, got " + std::to_string(fields.size()));
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        const auto v = text::parse_double(fields[i]);
        if (!v || !std::isfinite(*v) || !(*v > 0.0)) {
            throw Error(ErrorCode::kInvalidArgument, flag + " values must be positive numbers, got '" + fields[i] + "'");
        }
        out[i] = *v;
    }
    return out;
}

template <std::size_t N>
std::string join_diagonal(const std::array<double, N>& values) {
    std::string out;
    for (std::size_t i = 0; i < N; ++i) {
        out += (i ? "," : "") + text::format_double(values[i]);
    }
    return out;
}

Json attribute_json(const AttributeSet& set) {
    Json out = Json::object();
    for (AttributeCode code : all_attribute_codes()) {
        if (const auto& v = set.get(code)) {
            out[std::string(code_name(code))] = *v;
        }
    }
    return out;
}

// --- config files ----------------------------------------------------------

// `key = value` lines; '#' and ';' start comments, [section] headers are
// ignored, values may be quoted. Keys accept '_' for '-'.
std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
    const std::string content = text::read_file(path);
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t line_no = 0;
    for (auto raw : text::split_lines(content)) {
        ++line_no;
        auto line = text::trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';' || line.front() == '[') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        }
        std::string key(text::trim(line.substr(0, eq)));
        std::string value(text::trim(line.substr(eq + 1)));
        std::replace(key.begin(), key.end(), '_', '-');
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
            value = value.substr(1, value.size() - 2);
        }
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Appends flags from --config for every option the command line did not set.
std::vector<std::string> apply_config(const CLI::App& app, std::vector<std::string> args) {
    if (args.empty() || args.front().rfind("-", 0) == 0) {
        return args;
    }
    const CLI::App* sub = nullptr;
    try {
        sub = app.get_subcommand(args.front());
    } catch (const CLI::OptionNotFound&) {
        return args;
    }
    std::optional<std::string> config;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
        }
    }
    if (!config) {
        return args;
    }
    for (const auto& [key, value] : read_config(*config)) {
        const std::string flag = "--" + key;
        if (key == "config") {
            continue;
        }
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        if (opt == nullptr) {
            throw Error(ErrorCode::kInvalidArgument, *config + ": unknown key '" + key + "' for " + sub->get_name());
        }
        if (given_on_command_line(args, flag)) {
            continue;
        }
        if (opt->get_type_size() == 0) {
            const std::string v = text::to_lower(value);
            if (v == "true" || v == "1" || v == "yes") {
                args.push_back(flag);
            }
        } else {
            args.push_back(flag);
            args.push_back(value);
        }
    }
    return args;
}

// --- commands ----------------------------------------------------------------

struct Common {
    std::string config;
    std::size_t threads = 1;
};

void add_common(CLI::App* sub, Common& common) {
    sub->add_option("--config", common.config, "key = value file supplying any flag (command line wins)");
    sub->add_option("--threads", common.threads, "worker threads over sequences")->check(CLI::Range(1, 256));
}

struct EvaluateArgs {
    Common common;
    std::string dataset;
    std::string results;
    std::string trackers;
    std::string subset = "test";
    std::string protocol = "cross_domain";
    std::string output = ".";
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const DatasetIndex index = open_dataset(a.dataset);
    const Subset subset = parse_subset(a.subset);
    EvaluationReport report;
    report.protocol = parse_protocol(a.protocol);
    report.subset = std::string(to_string(subset));
    const auto dataset = load_dataset(index, subset, a.common.threads);
    const auto names = index.sequences(subset);
    const auto trackers = split_list(a.trackers);
    if (trackers.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "--tracker names no tracker");
    }
    for (const auto& tracker : trackers) {
        const auto results = load_results(a.results, tracker, names);
        TrackerReport tr = evaluate_tracker(dataset, results, a.common.threads);
        tr.tracker = tracker;
        tr.attributes = attribute_breakdown(tr, dataset);
        report.trackers.push_back(std::move(tr));
    }
    const fs::path dir = a.output;
    text::write_file(dir / "report.json", evaluation_report_json(report));
    text::write_file(dir / "per_sequence.csv", per_sequence_csv(report));
    for (const auto& tr : report.trackers) {
        out << tr.tracker << ": Pre " << percent(tr.mean.pre) << "  nPre " << percent(tr.mean.npre) << "  AUC "
            << percent(tr.mean.auc) << "  cAUC " << percent(tr.mean.cauc) << "  mACC " << percent(tr.mean.macc)
            << "  (" << tr.sequences.size() << " sequences)\n";
    }
    return kExitOk;
}

struct AttrsArgs {
    Common common;
    std::string dataset;
    std::string subset = "all";
    std::string reference = "first_frame";
    std::string output = "attributes.json";
};

int cmd_attrs(const AttrsArgs& a, std::ostream& out) {
    const DatasetIndex index = open_dataset(a.dataset);
    const auto dataset = load_dataset(index, parse_subset(a.subset), a.common.threads);
    AutoAttributeOptions options;
    if (a.reference == "first_frame") {
        options.reference = ScaleReference::kFirstFrame;
    } else if (a.reference == "consecutive") {
        options.reference = ScaleReference::kConsecutive;
    } else {
        throw Error(ErrorCode::kInvalidArgument, "--reference must be first_frame or consecutive");
    }

    std::vector<Json> rows(dataset.size());
    parallel_for(dataset.size(), a.common.threads, [&](std::size_t i) {
        const SequenceAnnotation& seq = dataset[i];
        Json row;
        row["sequence"] = seq.name;
        row["file"] = attribute_json(seq.attributes);
        AttributeSet computed;
        Json warnings = Json::array();
        try {
            computed = auto_attributes(seq, options);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kNoPresentFrames) {
                throw;
            }
            warnings.push_back(e.what());
        }
        const MergedAttributes merged = merge_attributes(computed, seq.attributes);
        row["computed"] = attribute_json(computed);
        row["merged"] = attribute_json(merged.attributes);
        Json conflicts = Json::array();
        for (const auto& c : merged.conflicts) {
            conflicts.push_back(
                {{"code", std::string(code_name(c.code))}, {"file", c.file_value}, {"computed", c.computed_value}});
        }
        row["conflicts"] = std::move(conflicts);
        row["warnings"] = std::move(warnings);
        rows[i] = std::move(row);
    });

    std::map<std::string, std::size_t> counts;
    std::size_t conflicts = 0;
    for (const auto& row : rows) {
        for (const auto& [code, value] : row["merged"].items()) {
            ++counts[code + "=" + value.get<std::string>()];
        }
        conflicts += row["conflicts"].size();
    }
    Json root;
    root["subset"] = a.subset;
    root["reference"] = a.reference;
    root["counts"] = counts;
    root["sequences"] = rows;
    text::write_file(a.output, root.dump(2) + "\n");
    out << "attributes for " << rows.size() << " sequences written to " << a.output << " (" << conflicts
        << " conflicts)\n";
    return kExitOk;
}

struct StatsArgs {
    Common common;
    std::string dataset;
    std::string output = "stats.json";
};

int cmd_stats(const StatsArgs& a, std::ostream& out) {
    const DatasetStats s = dataset_stats(a.dataset, a.common.threads);
    Json root;
    root["videos"] = s.video_count;
    root["train"] = s.train_count;
    root["test"] = s.test_count;
    root["classes"] = s.class_count();
    root["superclasses"] = s.superclass_videos.size();
    root["total_frames"] = s.total_frames;
    root["present_frames"] = s.present_frames;
    root["min_frames"] = s.min_frames;
    root["max_frames"] = s.max_frames;
    root["mean_frames"] = s.mean_frames();
    root["superclass_videos"] = s.superclass_videos;
    root["class_videos"] = s.class_videos;
    root["length_histogram"] = {{"edges", DatasetStats::kLengthEdges}, {"counts", s.length_histogram}};
    root["size_histogram"] = {{"small", s.size_histogram[0]}, {"medium", s.size_histogram[1]},
                              {"large", s.size_histogram[2]}};
    Json grid = Json::array();
    for (std::size_t r = 0; r < DatasetStats::kCenterBins; ++r) {
        const auto begin = s.center_histogram.begin() + static_cast<std::ptrdiff_t>(r * DatasetStats::kCenterBins);
        grid.push_back(std::vector<std::size_t>(begin, begin + DatasetStats::kCenterBins));
    }
    root["center_histogram"] = {{"bins", DatasetStats::kCenterBins}, {"rows_y_cols_x", std::move(grid)}};
    text::write_file(a.output, root.dump(2) + "\n");
    out << "videos " << s.video_count << " (train " << s.train_count << ", test " << s.test_count << "), frames "
        << s.total_frames << ", classes " << s.class_count() << "\n";
    return kExitOk;
}

struct MatpArgs {
    Common common;
    std::string results;
    std::string tracker;
    std::string responses;
    std::string output;
    std::string output_tracker;
    std::string dataset;
    std::string subset = "test";
    MatpConfig config;
    std::string init_covariance = join_diagonal(KalmanConfig{}.init_covariance);
    std::string process_noise = join_diagonal(KalmanConfig{}.process_noise);
    std::string measurement_noise = join_diagonal(KalmanConfig{}.measurement_noise);
};

std::vector<std::string> result_sequences(const fs::path& root, const std::string& tracker) {
    const fs::path dir = root / tracker;
    if (!fs::is_directory(dir)) {
        throw Error(ErrorCode::kMissingResult, "no result directory " + dir.string());
    }
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            names.push_back(entry.path().stem().string());
        }
    }
    std::sort(names.begin(), names.end());
    return names;
}

int cmd_matp(MatpArgs a, std::ostream& out) {
    a.config.kalman.init_covariance = parse_diagonal<7>(a.init_covariance, "--init-covariance");
    a.config.kalman.process_noise = parse_diagonal<7>(a.process_noise, "--process-noise");
    a.config.kalman.measurement_noise = parse_diagonal<4>(a.measurement_noise, "--measurement-noise");
    const std::string out_tracker = a.output_tracker.empty() ? a.tracker + "_MATP" : a.output_tracker;

    std::vector<std::string> names;
    if (!a.dataset.empty()) {
        names = open_dataset(a.dataset).sequences(parse_subset(a.subset));
    } else {
        names = result_sequences(a.results, a.tracker);
    }
    const auto raw = load_results(a.results, a.tracker, names);

    std::vector<TrackerResult> processed(raw.size());
    std::vector<std::size_t> matched(raw.size());
    parallel_for(raw.size(), a.common.threads, [&](std::size_t i) {
        const TrackerResult& r = raw[i];
        const fs::path container_path = fs::path(a.responses) / (r.sequence + ".bin");
        const ResponseContainer c = read_response_container(container_path);
        const std::size_t frames = r.frames();
        if (frames == 0) {
            throw Error(ErrorCode::kInvalidArgument, "result for " + r.sequence + " has no frames");
        }
        // One map per result frame (the first is unused) or one per tracked frame.
        std::size_t skip;
        if (c.frames == frames) {
            skip = 1;
        } else if (c.frames + 1 == frames) {
            skip = 0;
        } else {
            throw Error(ErrorCode::kCorruptContainer, container_path.string() + ": holds " + std::to_string(c.frames) +
                                                          " frames, result has " + std::to_string(frames));
        }
        const std::span<const float> maps(c.scores.data() + skip * c.n * c.n, (frames - 1) * c.n * c.n);
        const std::span<const BoundingBox> raw_boxes(r.boxes.data() + 1, frames - 1);
        MatpTrajectory traj;
        try {
            traj = matp_run_anchored(r.boxes.front(), maps, c.n, raw_boxes, a.config);
        } catch (const Error& e) {
            throw Error(e.code(), r.sequence + ": " + e.what());
        }
        processed[i] = TrackerResult{out_tracker, r.sequence, std::move(traj.boxes), r.confidence};
        matched[i] = traj.match_count;
    });

    std::string summary = "sequence,frames,matched_frames\n";
    std::size_t total = 0;
    for (std::size_t i = 0; i < processed.size(); ++i) {
        write_result(a.output, processed[i]);
        summary += processed[i].sequence + "," + std::to_string(processed[i].frames()) + "," +
                   std::to_string(matched[i]) + "\n";
        total += matched[i];
    }
    text::write_file(fs::path(a.output) / (out_tracker + "_summary.csv"), summary);
    out << "processed " << processed.size() << " sequences into " << (fs::path(a.output) / out_tracker).string()
        << "; match mode fired on " << total << " frames\n";
    return kExitOk;
}

struct FramerateArgs {
    Common common;
    std::string dataset;
    std::string results;
    std::string tracker;
    std::string subset = "test";
    std::vector<std::size_t> factors = {1, 2, 5, 10, 30};
    std::string mode = "stride";
    std::uint64_t seed = 0;
    std::string output = "framerate.json";
};

int cmd_framerate(const FramerateArgs& a, std::ostream& out) {
    ResampleMode mode;
    if (a.mode == "stride") {
        mode = ResampleMode::kStride;
    } else if (a.mode == "random") {
        mode = ResampleMode::kRandom;
    } else {
        throw Error(ErrorCode::kInvalidArgument, "--mode must be stride or random");
    }
    const DatasetIndex index = open_dataset(a.dataset);
    const Subset subset = parse_subset(a.subset);
    const auto dataset = load_dataset(index, subset, a.common.threads);
    const auto results = load_results(a.results, a.tracker, index.sequences(subset));
    std::vector<ResampleSpec> specs;
    for (std::size_t f : a.factors) {
        specs.push_back({mode, f, a.seed});
    }
    const auto curve = framerate_stability(dataset, results, specs);
    Json points = Json::array();
    for (const auto& p : curve) {
        points.push_back({{"factor", p.factor}, {"auc", p.auc}, {"sequences", p.sequences}});
        out << "factor " << p.factor << ": AUC " << percent(p.auc) << " over " << p.sequences << " sequences\n";
    }
    Json root;
    root["tracker"] = a.tracker;
    root["subset"] = std::string(to_string(subset));
    root["mode"] = a.mode;
    root["seed"] = a.seed;
    root["points"] = std::move(points);
    text::write_file(a.output, root.dump(2) + "\n");
    return kExitOk;
}

struct ValidateArgs {
    Common common;
    std::string dataset;
    std::string output;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
    const auto issues = validate(a.dataset);
    std::size_t errors = 0;
    Json list = Json::array();
    for (const auto& issue : issues) {
        errors += issue.severity == Severity::kError ? 1 : 0;
        out << to_string(issue.severity) << " " << issue.sequence << ": " << issue.message << "\n";
        list.push_back({{"sequence", issue.sequence},
                        {"severity", std::string(to_string(issue.severity))},
                        {"code", std::string(to_string(issue.code))},
                        {"message", issue.message}});
    }
    out << errors << " error(s), " << issues.size() - errors << " warning(s)\n";
    if (!a.output.empty()) {
        Json root;
        root["errors"] = errors;
        root["warnings"] = issues.size() - errors;
        root["issues"] = std::move(list);
        text::write_file(a.output, root.dump(2) + "\n");
    }
    return errors == 0 ? kExitOk : kExitInput;
}

struct DistillArgs {
    Common common;
    std::string manifest;
    std::optional<std::uint64_t> seed;
    std::size_t samples = 10;
    double step = 1e-3;
    std::string output = "gradcheck.json";
};

struct CheckSpec {
    Kernel kernel;
    std::size_t samples;
    double tolerance;
    TargetShape shape;
};

double default_tolerance(Kernel k) { return k == Kernel::kFkd ? 1e-6 : 1e-4; }

template <class T>
T manifest_value(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::kSchema, std::string("manifest key '") + key + "' has the wrong type");
    }
}

int cmd_distill_check(const DistillArgs& a, std::ostream& out) {
    std::uint64_t seed = a.seed.value_or(0);
    double step = a.step;
    std::vector<CheckSpec> checks;
    if (!a.manifest.empty()) {
        Json m;
        try {
            m = Json::parse(text::read_file(a.manifest));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::kParse, a.manifest + ": " + e.what());
        }
        if (!a.seed) {
            seed = manifest_value<std::uint64_t>(m, "seed", seed);
        }
        step = manifest_value<double>(m, "step", step);
        if (!m.contains("checks") || !m["checks"].is_array()) {
            throw Error(ErrorCode::kSchema, a.manifest + ": expected a 'checks' array");
        }
        for (const auto& c : m["checks"]) {
            CheckSpec spec{parse_kernel(manifest_value<std::string>(c, "kernel", "")), 0, 0.0, {}};
            spec.samples = manifest_value<std::size_t>(c, "samples", a.samples);
            spec.tolerance = manifest_value<double>(c, "tolerance", default_tolerance(spec.kernel));
            spec.shape.rows = manifest_value<std::size_t>(c, "rows", spec.shape.rows);
            spec.shape.cols = manifest_value<std::size_t>(c, "cols", spec.shape.cols);
            spec.shape.token_dim = manifest_value<std::size_t>(c, "token_dim", spec.shape.token_dim);
            spec.shape.layers = manifest_value<std::size_t>(c, "layers", spec.shape.layers);
            spec.shape.unit_norm_tokens = manifest_value<bool>(c, "unit_norm_tokens", spec.shape.unit_norm_tokens);
            spec.shape.tau = manifest_value<double>(c, "tau", spec.shape.tau);
            spec.shape.mu = manifest_value<double>(c, "mu", spec.shape.mu);
            checks.push_back(spec);
        }
    } else {
        for (Kernel k : all_kernels()) {
            checks.push_back({k, a.samples, default_tolerance(k), {}});
        }
    }
    if (!(step > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "step must be positive");
    }

    const CounterRng root(seed);
    std::vector<Json> rows(checks.size());
    std::vector<std::uint8_t> passed(checks.size(), 0);
    parallel_for(checks.size(), a.common.threads, [&](std::size_t i) {
        const CheckSpec& spec = checks[i];
        CounterRng rng = root.split(i);
        GradCheckOptions options;
        options.step = step;
        options.tolerance = spec.tolerance;
        double worst = 0.0;
        std::size_t worst_sample = 0;
        std::size_t failures = 0;
        for (std::size_t s = 0; s < spec.samples; ++s) {
            const GradCheckTarget target = random_target(spec.kernel, spec.shape, step, rng);
            const GradCheckReport r = grad_check(target, options, rng);
            failures += r.passed ? 0 : 1;
            if (s == 0 || r.max_rel_error > worst) {
                worst = r.max_rel_error;
                worst_sample = s;
            }
        }
        passed[i] = failures == 0 ? 1 : 0;
        rows[i] = Json{{"kernel", std::string(to_string(spec.kernel))},
                       {"samples", spec.samples},
                       {"tolerance", spec.tolerance},
                       {"max_rel_error", worst},
                       {"worst_sample", worst_sample},
                       {"failures", failures},
                       {"passed", failures == 0},
                       {"shape",
                        {{"rows", spec.shape.rows},
                         {"cols", spec.shape.cols},
                         {"token_dim", spec.shape.token_dim},
                         {"layers", spec.shape.layers},
                         {"unit_norm_tokens", spec.shape.unit_norm_tokens},
                         {"tau", spec.shape.tau},
                         {"mu", spec.shape.mu}}}};
    });
    const bool all_passed = std::all_of(passed.begin(), passed.end(), [](auto p) { return p != 0; });
    Json root_json;
    root_json["seed"] = seed;
    root_json["step"] = step;
    root_json["passed"] = all_passed;
    root_json["checks"] = rows;
    text::write_file(a.output, root_json.dump(2) + "\n");
    for (const auto& row : rows) {
        out << (row["passed"].get<bool>() ? "PASS " : "FAIL ") << row["kernel"].get<std::string>()
            << "  max rel error " << text::format_double(row["max_rel_error"].get<double>()) << " over "
            << row["samples"].get<std::size_t>() << " samples (tolerance "
            << text::format_double(row["tolerance"].get<double>()) << ")\n";
    }
    if (!all_passed) {
        throw InvariantFailure("analytic gradients disagree with finite differences");
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Underwater tracking evaluation, MATP post-processing and distillation-loss checks", "uotkit"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "show help for every command");

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "score tracker results: report.json and per_sequence.csv");
    add_common(evaluate, ev.common);
    evaluate->add_option("--dataset", ev.dataset, "dataset root with train.txt/test.txt")->required();
    evaluate->add_option("--results", ev.results, "results root, <root>/<tracker>/<sequence>.txt")->required();
    evaluate->add_option("--tracker", ev.trackers, "tracker name(s), comma-separated")->required();
    evaluate->add_option("--subset", ev.subset, "train, test or all")->capture_default_str();
    evaluate->add_option("--protocol", ev.protocol, "cross_domain or within_domain")->capture_default_str();
    evaluate->add_option("--output", ev.output, "output directory")->capture_default_str();

    AttrsArgs at;
    auto* attrs = app.add_subcommand("attrs", "compute rule-based attributes and merge with annotated ones");
    add_common(attrs, at.common);
    attrs->add_option("--dataset", at.dataset, "dataset root")->required();
    attrs->add_option("--subset", at.subset, "train, test or all")->capture_default_str();
    attrs->add_option("--reference", at.reference, "SV/ARV reference: first_frame or consecutive")
        ->capture_default_str();
    attrs->add_option("--output", at.output, "output JSON file")->capture_default_str();

    StatsArgs st;
    auto* stats = app.add_subcommand("stats", "dataset statistics and histograms");
    add_common(stats, st.common);
    stats->add_option("--dataset", st.dataset, "dataset root")->required();
    stats->add_option("--output", st.output, "output JSON file")->capture_default_str();

    MatpArgs mp;
    auto* matp = app.add_subcommand("matp", "motion-aware post-processing of raw tracker results");
    add_common(matp, mp.common);
    matp->add_option("--results", mp.results, "raw results root")->required();
    matp->add_option("--tracker", mp.tracker, "raw tracker name")->required();
    matp->add_option("--responses", mp.responses, "directory of <sequence>.bin response containers")->required();
    matp->add_option("--output", mp.output, "output results root")->required();
    matp->add_option("--output-tracker", mp.output_tracker, "name of the processed tracker (default <tracker>_MATP)");
    matp->add_option("--dataset", mp.dataset, "take the sequence list from this dataset instead of the results");
    matp->add_option("--subset", mp.subset, "subset used with --dataset")->capture_default_str();
    matp->add_option("--top-n", mp.config.top_n, "candidates kept per frame")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
    matp->add_option("--alpha", mp.config.alpha, "similarity weight in location scores")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    matp->add_option("--conf", mp.config.conf, "IoU gate between raw box and prediction")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    matp->add_option("--threshold", mp.config.threshold, "normalized response threshold for candidates")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    matp->add_option("--iou-threshold", mp.config.iou_threshold, "NMS IoU threshold")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    matp->add_option("--search-factor", mp.config.search_factor, "search region side over sqrt(box area)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    matp->add_option("--init-covariance", mp.init_covariance, "7 initial covariance diagonal entries")
        ->capture_default_str();
    matp->add_option("--process-noise", mp.process_noise, "7 process noise diagonal entries")->capture_default_str();
    matp->add_option("--measurement-noise", mp.measurement_noise, "4 measurement noise diagonal entries")
        ->capture_default_str();

    DistillArgs dc;
    auto* distill = app.add_subcommand("distill-check", "finite-difference check of the distillation gradients");
    add_common(distill, dc.common);
    distill->add_option("--manifest", dc.manifest, "JSON manifest of seed, step and per-kernel checks");
    distill->add_option("--seed", dc.seed, "random seed (overrides the manifest)");
    distill->add_option("--samples", dc.samples, "random inputs per kernel without a manifest")->capture_default_str();
    distill->add_option("--step", dc.step, "central-difference step")->capture_default_str();
    distill->add_option("--output", dc.output, "output JSON file")->capture_default_str();

    FramerateArgs fr;
    auto* framerate = app.add_subcommand("framerate", "AUC under frame-rate reduction");
    add_common(framerate, fr.common);
    framerate->add_option("--dataset", fr.dataset, "dataset root")->required();
    framerate->add_option("--results", fr.results, "dense results root")->required();
    framerate->add_option("--tracker", fr.tracker, "tracker name")->required();
    framerate->add_option("--subset", fr.subset, "train, test or all")->capture_default_str();
    framerate->add_option("--factors", fr.factors, "reduction factors, comma-separated")
        ->delimiter(',')
        ->capture_default_str();
    framerate->add_option("--mode", fr.mode, "stride or random")->capture_default_str();
    framerate->add_option("--seed", fr.seed, "seed of the random mode")->capture_default_str();
    framerate->add_option("--output", fr.output, "output JSON file")->capture_default_str();

    ValidateArgs va;
    auto* validate_cmd = app.add_subcommand("validate", "check a dataset for schema and consistency problems");
    add_common(validate_cmd, va.common);
    validate_cmd->add_option("--dataset", va.dataset, "dataset root")->required();
    validate_cmd->add_option("--output", va.output, "optional JSON file of the issues");

    try {
        std::vector<std::string> argv = apply_config(app, args);
        std::reverse(argv.begin(), argv.end());
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        if (evaluate->parsed()) {
            return cmd_evaluate(ev, out);
        }
        if (attrs->parsed()) {
            return cmd_attrs(at, out);
        }
        if (stats->parsed()) {
            return cmd_stats(st, out);
        }
        if (matp->parsed()) {
            return cmd_matp(mp, out);
        }
        if (distill->parsed()) {
            return cmd_distill_check(dc, out);
        }
        if (framerate->parsed()) {
            return cmd_framerate(fr, out);
        }
        if (validate_cmd->parsed()) {
            return cmd_validate(va, out);
        }
    } catch (const Error& e) {
        err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return kExitInput;
    } catch (const InvariantFailure& e) {
        err << "internal check failed: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    err << "error: no command given\n";
    return kExitInput;
}

}  // namespace uotkit::cli

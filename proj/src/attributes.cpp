#include "uotkit/attributes.hpp"

#include <algorithm>
#include <cmath>

#include "uotkit/dataset.hpp"
#include "uotkit/error.hpp"
#include "uotkit/text.hpp"

namespace uotkit {

namespace {

constexpr std::array<AttributeCode, kAttributeCount> kAllCodes = {
    AttributeCode::LR,  AttributeCode::FM,  AttributeCode::SV,  AttributeCode::ARV,
    AttributeCode::CM,  AttributeCode::VC,  AttributeCode::PO,  AttributeCode::FO,
    AttributeCode::OV,  AttributeCode::ROT, AttributeCode::DEF, AttributeCode::SD,
    AttributeCode::IV,  AttributeCode::MB,  AttributeCode::PTI, AttributeCode::NAO,
    AttributeCode::CAM, AttributeCode::UV,  AttributeCode::WCV, AttributeCode::US,
    AttributeCode::SP,  AttributeCode::SIZ, AttributeCode::LEN,
};

constexpr std::array<std::string_view, kAttributeCount> kNames = {
    "LR", "FM", "SV",  "ARV", "CM",  "VC",  "PO", "FO", "OV", "ROT", "DEF", "SD",
    "IV", "MB", "PTI", "NAO", "CAM", "UV", "WCV", "US", "SP", "SIZ", "LEN",
};

constexpr std::array<std::string_view, 2> kNao = {"natural", "artificial"};
constexpr std::array<std::string_view, 3> kUv = {"low", "medium", "high"};
constexpr std::array<std::string_view, 16> kWcv = {
    "colorless", "ash",        "green",       "light blue",  "gray",  "light green",
    "deep blue", "dark",       "gray-blue",   "partly blue", "light yellow",
    "light brown", "blue",     "cyan",        "light purple", "blue-black",
};
constexpr std::array<std::string_view, 12> kUs = {
    "sea",   "river", "lake", "pool",     "water tank", "fish tank",
    "basin", "bowl",  "cup",  "aquarium", "pond",       "puddle",
};
constexpr std::array<std::string_view, 3> kSp = {"underwater", "outside-water", "fish-eye"};
constexpr std::array<std::string_view, 3> kSiz = {"small", "medium", "large"};
constexpr std::array<std::string_view, 3> kLen = {"short", "medium", "long"};

// Lowercase with '_' and '-' folded to spaces, for lenient matching.
std::string fold(std::string_view s) {
    std::string out = text::to_lower(text::trim(s));
    std::replace(out.begin(), out.end(), '_', ' ');
    std::replace(out.begin(), out.end(), '-', ' ');
    return out;
}

std::optional<bool> parse_flag(std::string_view value) {
    const std::string v = fold(value);
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    return std::nullopt;
}

constexpr double kMinLowResolutionArea = 400.0;
constexpr double kFastMotionPixels = 20.0;
constexpr double kRatioLow = 0.5;
constexpr double kRatioHigh = 2.0;
// SIZ thresholds compared on s^2 = W * H, exact for integer frame sizes.
constexpr double kSmallFrameArea = 640.0 * 480.0;
constexpr double kLargeFrameArea = 1280.0 * 720.0;
constexpr std::size_t kShortVideo = 600;
constexpr std::size_t kLongVideo = 1800;

bool outside_ratio_range(double r) { return r < kRatioLow || r > kRatioHigh; }

}  // namespace

std::span<const AttributeCode> all_attribute_codes() { return kAllCodes; }

std::string_view code_name(AttributeCode code) { return kNames[static_cast<std::size_t>(code)]; }

std::optional<AttributeCode> parse_attribute_code(std::string_view name) {
    const std::string upper = [&] {
        std::string s(text::trim(name));
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
        return s;
    }();
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == upper) {
            return kAllCodes[i];
        }
    }
    return std::nullopt;
}

std::span<const std::string_view> vocabulary(AttributeCode code) {
    switch (code) {
        case AttributeCode::NAO: return kNao;
        case AttributeCode::UV: return kUv;
        case AttributeCode::WCV: return kWcv;
        case AttributeCode::US: return kUs;
        case AttributeCode::SP: return kSp;
        case AttributeCode::SIZ: return kSiz;
        case AttributeCode::LEN: return kLen;
        default: return {};
    }
}

bool is_binary(AttributeCode code) { return vocabulary(code).empty(); }

bool is_auto_computable(AttributeCode code) {
    switch (code) {
        case AttributeCode::LR:
        case AttributeCode::FM:
        case AttributeCode::SV:
        case AttributeCode::ARV:
        case AttributeCode::SIZ:
        case AttributeCode::LEN: return true;
        default: return false;
    }
}

void AttributeSet::set(AttributeCode code, std::string_view value) {
    if (is_binary(code)) {
        const auto flag_value = parse_flag(value);
        if (!flag_value) {
            throw Error(ErrorCode::kSchema, std::string(code_name(code)) +
                                                " expects true/false, got '" + std::string(value) + "'");
        }
        set_flag(code, *flag_value);
        return;
    }
    const std::string folded = fold(value);
    for (std::string_view word : vocabulary(code)) {
        if (fold(word) == folded) {
            slots_[index(code)] = std::string(word);
            return;
        }
    }
    throw Error(ErrorCode::kSchema, std::string(code_name(code)) + " has no value '" +
                                        std::string(value) + "'");
}

void AttributeSet::set_flag(AttributeCode code, bool value) {
    if (!is_binary(code)) {
        throw Error(ErrorCode::kSchema, std::string(code_name(code)) + " is not a binary attribute");
    }
    slots_[index(code)] = value ? "true" : "false";
}

std::optional<bool> AttributeSet::flag(AttributeCode code) const {
    const auto& v = slots_[index(code)];
    if (!v || !is_binary(code)) {
        return std::nullopt;
    }
    return *v == "true";
}

std::size_t AttributeSet::count() const {
    return static_cast<std::size_t>(
        std::count_if(slots_.begin(), slots_.end(), [](const auto& s) { return s.has_value(); }));
}

AttributeSet parse_attributes(std::string_view content, std::string_view source) {
    AttributeSet set;
    const auto lines = text::split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string_view line = text::trim(lines[i]);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const std::string where = std::string(source) + ":" + std::to_string(i + 1);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::kParse, where + ": expected CODE=value");
        }
        const auto code = parse_attribute_code(line.substr(0, eq));
        if (!code) {
            throw Error(ErrorCode::kParse,
                        where + ": unknown attribute '" + std::string(text::trim(line.substr(0, eq))) + "'");
        }
        try {
            set.set(*code, line.substr(eq + 1));
        } catch (const Error& e) {
            throw Error(ErrorCode::kSchema, where + ": " + e.what());
        }
    }
    return set;
}

std::string format_attributes(const AttributeSet& set) {
    std::string out;
    for (AttributeCode code : kAllCodes) {
        if (const auto& v = set.get(code)) {
            out += code_name(code);
            out += '=';
            out += *v;
            out += '\n';
        }
    }
    return out;
}

AttributeSet auto_attributes(const SequenceAnnotation& seq, const AutoAttributeOptions& options) {
    const std::size_t n = seq.frames();
    std::vector<std::size_t> present;
    present.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (seq.present(i)) {
            present.push_back(i);
        }
    }
    if (present.empty()) {
        throw Error(ErrorCode::kNoPresentFrames, "sequence '" + seq.name + "' has no present frame");
    }

    bool low_res = false;
    bool fast_motion = false;
    bool scale_var = false;
    bool aspect_var = false;

    const BoundingBox* ref = &seq.boxes[present.front()];
    for (std::size_t k = 0; k < present.size(); ++k) {
        const std::size_t i = present[k];
        const BoundingBox& b = seq.boxes[i];
        low_res = low_res || b.w * b.h < kMinLowResolutionArea;

        if (i + 1 < n && seq.present(i + 1)) {
            const BoundingBox& next = seq.boxes[i + 1];
            const double jump = std::hypot(next.center_x() - b.center_x(), next.center_y() - b.center_y());
            fast_motion = fast_motion || jump > kFastMotionPixels;
        }

        if (options.reference == ScaleReference::kConsecutive && k > 0) {
            ref = &seq.boxes[present[k - 1]];
        }
        const double size_ratio = std::sqrt((b.w * b.h) / (ref->w * ref->h));
        const double aspect_ratio = (b.w / b.h) / (ref->w / ref->h);
        scale_var = scale_var || outside_ratio_range(size_ratio);
        aspect_var = aspect_var || outside_ratio_range(aspect_ratio);
    }

    AttributeSet out;
    out.set_flag(AttributeCode::LR, low_res);
    out.set_flag(AttributeCode::FM, fast_motion);
    out.set_flag(AttributeCode::SV, scale_var);
    out.set_flag(AttributeCode::ARV, aspect_var);

    if (seq.frame_width > 0 && seq.frame_height > 0) {
        const double frame_area = static_cast<double>(seq.frame_width) * seq.frame_height;
        std::string_view siz = "medium";
        if (frame_area < kSmallFrameArea) {
            siz = "small";
        } else if (frame_area >= kLargeFrameArea) {
            siz = "large";
        }
        out.set(AttributeCode::SIZ, siz);
    }

    std::string_view len = "medium";
    if (n <= kShortVideo) {
        len = "short";
    } else if (n > kLongVideo) {
        len = "long";
    }
    out.set(AttributeCode::LEN, len);
    return out;
}

MergedAttributes merge_attributes(const AttributeSet& computed, const AttributeSet& from_file) {
    MergedAttributes merged{computed, {}};
    for (AttributeCode code : kAllCodes) {
        const auto& file_value = from_file.get(code);
        if (!file_value) {
            continue;
        }
        const auto& auto_value = computed.get(code);
        if (auto_value && *auto_value != *file_value) {
            merged.conflicts.push_back({code, *file_value, *auto_value});
        }
        merged.attributes.set(code, *file_value);
    }
    return merged;
}

}  // namespace uotkit

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uotkit {

struct SequenceAnnotation;

/// The 23 tracking attributes, in table order.
enum class AttributeCode : std::size_t {
    LR, FM, SV, ARV, CM, VC, PO, FO, OV, ROT, DEF, SD,
    IV, MB, PTI, NAO, CAM, UV, WCV, US, SP, SIZ, LEN,
};

inline constexpr std::size_t kAttributeCount = 23;

std::span<const AttributeCode> all_attribute_codes();
std::string_view code_name(AttributeCode code);
std::optional<AttributeCode> parse_attribute_code(std::string_view name);

/// Binary attributes take "true"/"false"; the rest have a closed vocabulary.
bool is_binary(AttributeCode code);

/// LR, FM, SV, ARV, SIZ, LEN: derivable from the box annotations and frame size.
bool is_auto_computable(AttributeCode code);

/// Empty for binary attributes.
std::span<const std::string_view> vocabulary(AttributeCode code);

/// One optional slot per attribute. Values are stored in canonical form:
/// "true"/"false" for binary codes, the vocabulary spelling otherwise.
class AttributeSet {
public:
    /// Canonicalises and checks `value` against the attribute's vocabulary.
    /// Throws Error(kSchema) for values outside it.
    void set(AttributeCode code, std::string_view value);
    void set_flag(AttributeCode code, bool value);
    void clear(AttributeCode code) { slots_[index(code)].reset(); }

    bool has(AttributeCode code) const { return slots_[index(code)].has_value(); }
    const std::optional<std::string>& get(AttributeCode code) const { return slots_[index(code)]; }
    /// Only meaningful for binary codes; nullopt if unset.
    std::optional<bool> flag(AttributeCode code) const;

    std::size_t count() const;

    friend bool operator==(const AttributeSet&, const AttributeSet&) = default;

private:
    static std::size_t index(AttributeCode code) { return static_cast<std::size_t>(code); }
    std::array<std::optional<std::string>, kAttributeCount> slots_{};
};

/// `attributes.txt`: one `CODE=value` per line; blank lines and `#` comments
/// are ignored. `source` names the file in error messages.
AttributeSet parse_attributes(std::string_view content, std::string_view source);
std::string format_attributes(const AttributeSet& set);

enum class ScaleReference {
    kFirstFrame,   // SV / ARV ratios against the first present frame
    kConsecutive,  // ratios between adjacent present frames
};

struct AutoAttributeOptions {
    ScaleReference reference = ScaleReference::kFirstFrame;
};

/// Fills exactly LR, FM, SV, ARV, SIZ and LEN from the annotation, looking
/// only at present frames. Throws Error(kNoPresentFrames) if every frame is
/// absent.
AttributeSet auto_attributes(const SequenceAnnotation& seq, const AutoAttributeOptions& options = {});

struct AttributeConflict {
    AttributeCode code;
    std::string file_value;
    std::string computed_value;
};

struct MergedAttributes {
    AttributeSet attributes;
    std::vector<AttributeConflict> conflicts;
};

/// Overlays `from_file` on `computed`; on a disagreement the file value wins
/// and the pair is recorded as a conflict.
MergedAttributes merge_attributes(const AttributeSet& computed, const AttributeSet& from_file);

}  // namespace uotkit

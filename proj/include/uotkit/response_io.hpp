#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace uotkit {

/// Response maps of one sequence as stored on disk: a little-endian header
/// of two uint32 (frame count, n) followed by frame-major, row-major float32
/// scores.
struct ResponseContainer {
    std::size_t frames = 0;
    std::size_t n = 0;
    std::vector<float> scores;  // frames * n * n

    const float* frame(std::size_t t) const { return scores.data() + t * n * n; }
};

/// Throws Error(kCorruptContainer) for a short header, n = 0, truncated or
/// trailing data, and NaN, infinite or negative scores; the message names
/// the first bad frame.
ResponseContainer parse_response_container(const std::string& bytes, const std::string& source);
ResponseContainer read_response_container(const std::filesystem::path& path);

std::string serialize_response_container(const ResponseContainer& container);
void write_response_container(const std::filesystem::path& path, const ResponseContainer& container);

}  // namespace uotkit

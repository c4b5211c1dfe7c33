#include "uotkit/response_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>

#include "uotkit/error.hpp"
#include "uotkit/text.hpp"

namespace uotkit {

namespace {

constexpr std::size_t kHeaderBytes = 8;

std::uint32_t read_u32(const std::string& bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)]);
    }
    return v;
}

void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
}

float read_f32(const std::string& bytes, std::size_t offset) {
    const std::uint32_t bits = read_u32(bytes, offset);
    float v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

Error corrupt(const std::string& source, const std::string& what) {
    return Error(ErrorCode::kCorruptContainer, source + ": " + what);
}

}  // namespace

ResponseContainer parse_response_container(const std::string& bytes, const std::string& source) {
    if (bytes.size() < kHeaderBytes) {
        throw corrupt(source, "header is shorter than 8 bytes");
    }
    ResponseContainer c;
    c.frames = read_u32(bytes, 0);
    c.n = read_u32(bytes, 4);
    if (c.n == 0) {
        throw corrupt(source, "grid size n is 0");
    }
    const std::size_t body = bytes.size() - kHeaderBytes;
    if (c.frames == 0) {
        if (body != 0) {
            throw corrupt(source, "unexpected trailing bytes after 0 frames");
        }
        return c;
    }
    if (c.n > body / 4 || c.n * c.n > body / 4) {
        throw corrupt(source, "frame 0 is truncated");
    }
    const std::size_t cells = c.n * c.n;
    const std::size_t frame_bytes = cells * 4;
    const std::size_t complete = body / frame_bytes;
    if (complete < c.frames) {
        throw corrupt(source, "frame " + std::to_string(complete) + " is truncated (header declares " +
                                  std::to_string(c.frames) + " frames)");
    }
    if (body != c.frames * frame_bytes) {
        throw corrupt(source, "unexpected trailing bytes after " + std::to_string(c.frames) + " frames");
    }
    c.scores.resize(c.frames * cells);
    for (std::size_t i = 0; i < c.scores.size(); ++i) {
        const float v = read_f32(bytes, kHeaderBytes + 4 * i);
        if (!std::isfinite(v) || v < 0.0f) {
            throw corrupt(source, "frame " + std::to_string(i / cells) + " has a non-finite or negative score");
        }
        c.scores[i] = v;
    }
    return c;
}

ResponseContainer read_response_container(const std::filesystem::path& path) {
    return parse_response_container(text::read_file(path), path.string());
}

std::string serialize_response_container(const ResponseContainer& container) {
    if (container.scores.size() != container.frames * container.n * container.n) {
        throw Error(ErrorCode::kShapeMismatch, "response container holds " + std::to_string(container.scores.size()) +
                                                   " scores, expected frames * n * n");
    }
    std::string out;
    out.reserve(kHeaderBytes + 4 * container.scores.size());
    append_u32(out, static_cast<std::uint32_t>(container.frames));
    append_u32(out, static_cast<std::uint32_t>(container.n));
    for (float v : container.scores) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        append_u32(out, bits);
    }
    return out;
}

void write_response_container(const std::filesystem::path& path, const ResponseContainer& container) {
    text::write_file(path, serialize_response_container(container));
}

}  // namespace uotkit

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "cascadeopt/common.hpp"

namespace cascadeopt::pnm {

/// Raster decoded from a binary PGM (P5) or PPM (P6) file. Pixels are planar by channel.
struct Raster {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels;
};

namespace detail {

inline bool read_token(const std::vector<char>& buf, std::size_t& pos, std::string& tok) {
    tok.clear();
    while (pos < buf.size()) {
        char c = buf[pos];
        if (c == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++pos;
        } else {
            break;
        }
    }
    while (pos < buf.size()) {
        char c = buf[pos];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '#') break;
        tok.push_back(c);
        ++pos;
    }
    return !tok.empty();
}

}  // namespace detail

/// Parses an in-memory P5/P6 image with maxval 255. `what` names the source in errors.
inline Raster decode(const std::vector<char>& buf, const std::string& what) {
    std::size_t pos = 0;
    std::string tok;
    if (!detail::read_token(buf, pos, tok) || (tok != "P5" && tok != "P6"))
        fail(what + ": malformed header (expected P5 or P6 magic)");
    Raster r;
    r.channels = tok == "P5" ? 1 : 3;
    int maxval = 0;
    if (!detail::read_token(buf, pos, tok) || !parse_int(tok, r.width) || r.width < 1)
        fail(what + ": malformed header (width)");
    if (!detail::read_token(buf, pos, tok) || !parse_int(tok, r.height) || r.height < 1)
        fail(what + ": malformed header (height)");
    if (!detail::read_token(buf, pos, tok) || !parse_int(tok, maxval))
        fail(what + ": malformed header (maxval)");
    if (maxval != 255) fail(what + ": unsupported maxval " + std::to_string(maxval) + " (need 255)");
    // exactly one whitespace byte separates the header from the raster
    if (pos >= buf.size()) fail(what + ": truncated after header");
    ++pos;
    const std::size_t plane = static_cast<std::size_t>(r.width) * static_cast<std::size_t>(r.height);
    const std::size_t need = plane * static_cast<std::size_t>(r.channels);
    if (buf.size() - pos != need)
        fail(what + ": raster has " + std::to_string(buf.size() - pos) + " bytes, expected " + std::to_string(need));
    r.pixels.resize(need);
    for (std::size_t i = 0; i < plane; ++i)
        for (int c = 0; c < r.channels; ++c)
            r.pixels[static_cast<std::size_t>(c) * plane + i] =
                static_cast<std::uint8_t>(buf[pos + i * static_cast<std::size_t>(r.channels) + static_cast<std::size_t>(c)]);
    return r;
}

inline Raster read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open image file " + path.string());
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode(buf, path.string());
}

inline void write(const std::filesystem::path& path, int width, int height, int channels,
                  const std::vector<std::uint8_t>& planar) {
    require(channels == 1 || channels == 3, "pnm: channels must be 1 or 3");
    const std::size_t plane = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    require(planar.size() == plane * static_cast<std::size_t>(channels), "pnm: pixel buffer size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_io("cannot write image file " + path.string());
    out << (channels == 1 ? "P5" : "P6") << '\n' << width << ' ' << height << "\n255\n";
    std::vector<char> interleaved(planar.size());
    for (std::size_t i = 0; i < plane; ++i)
        for (std::size_t c = 0; c < static_cast<std::size_t>(channels); ++c)
            interleaved[i * static_cast<std::size_t>(channels) + c] = static_cast<char>(planar[c * plane + i]);
    out.write(interleaved.data(), static_cast<std::streamsize>(interleaved.size()));
    if (!out) fail_io("short write to " + path.string());
}

}  // namespace cascadeopt::pnm

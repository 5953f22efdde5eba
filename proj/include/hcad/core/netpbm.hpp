#pragma once

// Binary PGM (P5, 1 channel) and PPM (P6, 3 channels) frame files, 8-bit only.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <string>
#include <vector>

#include "hcad/core/binary_io.hpp"
#include "hcad/core/image.hpp"

namespace hcad::netpbm {

namespace detail {

inline void skip_space_and_comments(const std::string& s, std::size_t& pos) {
    while (pos < s.size()) {
        if (std::isspace(static_cast<unsigned char>(s[pos]))) {
            ++pos;
        } else if (s[pos] == '#') {
            while (pos < s.size() && s[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
}

inline int read_header_int(const std::string& s, std::size_t& pos, const std::string& ctx) {
    skip_space_and_comments(s, pos);
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (start == pos) throw Error(ErrorKind::Format, ctx + ": malformed header");
    return std::stoi(s.substr(start, pos - start));
}

}  // namespace detail

inline Image8 decode(const std::string& bytes, const std::string& ctx = "image") {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw Error(ErrorKind::Format, ctx + ": not a binary PGM/PPM file");
    }
    const int channels = bytes[1] == '5' ? 1 : 3;
    std::size_t pos = 2;
    const int width = detail::read_header_int(bytes, pos, ctx);
    const int height = detail::read_header_int(bytes, pos, ctx);
    const int maxval = detail::read_header_int(bytes, pos, ctx);
    if (maxval != 255) throw Error(ErrorKind::Format, ctx + ": only 8-bit maxval 255 is supported");
    ++pos;  // single whitespace byte before the raster
    const std::size_t n = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() < pos + n) throw Error(ErrorKind::Format, ctx + ": truncated raster");
    Image8 img(height, width, channels);
    std::copy_n(reinterpret_cast<const std::uint8_t*>(bytes.data() + pos), n, img.pixels().begin());
    return img;
}

inline std::string encode(const Image8& img) {
    if (img.channels() != 1 && img.channels() != 3) {
        throw Error(ErrorKind::Validation, "netpbm supports 1 or 3 channels");
    }
    std::string out = (img.channels() == 1 ? "P5\n" : "P6\n") + std::to_string(img.width()) + " " +
                      std::to_string(img.height()) + "\n255\n";
    auto px = img.pixels();
    out.append(reinterpret_cast<const char*>(px.data()), px.size());
    return out;
}

inline Image8 read(const std::filesystem::path& path) { return decode(io::read_file(path), path.string()); }

inline void write(const std::filesystem::path& path, const Image8& img) { io::write_file_atomic(path, encode(img)); }

inline bool is_frame_file(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    return ext == ".ppm" || ext == ".pgm";
}

/// Frame files of a directory in lexicographic order; numbered files must be zero-padded.
inline std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw Error(ErrorKind::MissingDependency, "frame directory not found: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_frame_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

inline std::string frame_name(std::size_t index, int channels) {
    std::string digits = std::to_string(index);
    if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
    return "frame_" + digits + (channels == 1 ? ".pgm" : ".ppm");
}

}  // namespace hcad::netpbm

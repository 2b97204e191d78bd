#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "recon/error.hpp"
#include "recon/grid.hpp"

namespace recon::io {

// File formats
//
// Canonical raster: <name>.f32 holds width*height IEEE-754 binary32 values,
// little-endian, row-major, no header. The sidecar <name>.f32.txt has four
// lines "width W", "height H", "min m", "max M" (m, M printed with %.9g).
//
// Viewable raster: binary PGM (P5). Values are windowed linearly from
// [lo, hi] to [0, maxval] and clamped; maxval is 255 (8-bit) or 65535
// (16-bit, big-endian samples as the PGM format requires). The default
// window is the raster's own [min, max].
//
// Tables: comma-separated, one header row, numbers printed with %.10g,
// infinities as "inf".

inline std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct RasterInfo {
    std::size_t width = 0;
    std::size_t height = 0;
    double min = 0.0;
    double max = 0.0;
};

inline std::pair<double, double> min_max(std::span<const double> values) {
    if (values.empty()) return {0.0, 0.0};
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return {*lo, *hi};
}

inline void write_f32(const std::filesystem::path& path, const GridImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    std::vector<unsigned char> bytes(img.size() * 4);
    for (std::size_t i = 0; i < img.size(); ++i) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(img.data()[i]));
        for (int b = 0; b < 4; ++b) bytes[i * 4 + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits >> (8 * b));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    const auto [lo, hi] = min_max(img.data());
    char buf[256];
    std::snprintf(buf, sizeof buf, "width %zu\nheight %zu\nmin %.9g\nmax %.9g\n", img.width(), img.height(), lo, hi);
    std::ofstream side(path.string() + ".txt");
    side << buf;
}

inline RasterInfo read_sidecar(const std::filesystem::path& sidecar) {
    std::ifstream in(sidecar);
    if (!in) throw ValidationError("cannot open raster descriptor " + sidecar.string());
    RasterInfo info;
    std::string key;
    bool seen[4] = {false, false, false, false};
    while (in >> key) {
        if (key == "width") { in >> info.width; seen[0] = true; }
        else if (key == "height") { in >> info.height; seen[1] = true; }
        else if (key == "min") { in >> info.min; seen[2] = true; }
        else if (key == "max") { in >> info.max; seen[3] = true; }
        else throw ValidationError("raster descriptor: unknown key '" + key + "'");
    }
    require(seen[0] && seen[1], "raster descriptor: width and height are required");
    return info;
}

inline GridImage read_f32(const std::filesystem::path& path) {
    const RasterInfo info = read_sidecar(path.string() + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open raster " + path.string());
    std::vector<unsigned char> bytes(info.width * info.height * 4);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<std::size_t>(in.gcount()) == bytes.size(), "raster " + path.string() + " is truncated");
    std::vector<double> values(info.width * info.height);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[i * 4 + static_cast<std::size_t>(b)]) << (8 * b);
        values[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
    return GridImage(info.width, info.height, std::move(values));
}

inline void write_pgm(const std::filesystem::path& path, const GridImage& img, int bits = 8,
                      std::optional<std::pair<double, double>> window = std::nullopt) {
    require(bits == 8 || bits == 16, "write_pgm: bits must be 8 or 16");
    const auto [lo, hi] = window ? *window : min_max(img.data());
    const unsigned maxval = bits == 8 ? 255u : 65535u;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "P5\n" << img.width() << " " << img.height() << "\n" << maxval << "\n";
    const double span = hi - lo;
    std::vector<unsigned char> bytes;
    bytes.reserve(img.size() * (bits / 8));
    for (double v : img.data()) {
        const double t = span > 0.0 ? std::clamp((v - lo) / span, 0.0, 1.0) : 0.0;
        const auto q = static_cast<unsigned>(std::lround(t * maxval));
        if (bits == 16) bytes.push_back(static_cast<unsigned char>(q >> 8));
        bytes.push_back(static_cast<unsigned char>(q & 0xFF));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

/// Column-oriented CSV table.
class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells) {
        require(cells.size() == header_.size(), "Table: row width does not match the header");
        rows_.push_back(std::move(cells));
    }

    const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

    std::string str() const {
        std::ostringstream out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
            out << "\n";
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        return out.str();
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
        out << str();
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace recon::io

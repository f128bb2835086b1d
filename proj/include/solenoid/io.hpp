#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace solenoid {

/// Round-trip-exact decimal form of a double, stable across runs.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Shorter form for table output.
inline std::string fmt_double(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

/// Write via temp file + rename so readers never observe partial output.
inline void atomic_write(const std::filesystem::path& path, const std::string& data) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

/// 16-bit binary PGM (P5, maxval 65535, big-endian), rows from y-max down.
/// Values are scaled linearly so the field maximum maps to 65535.
inline std::string pgm16_encode(int nx, int ny, const std::vector<double>& values) {
    if (static_cast<std::size_t>(nx) * ny != values.size())
        throw std::invalid_argument("pgm16_encode: size mismatch");
    double vmax = 0.0;
    for (double v : values)
        if (v > vmax) vmax = v;
    std::string out = "P5\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n65535\n";
    out.reserve(out.size() + static_cast<std::size_t>(nx) * ny * 2);
    double scale = vmax > 0.0 ? 65535.0 / vmax : 0.0;
    for (int row = ny - 1; row >= 0; --row) {
        for (int ix = 0; ix < nx; ++ix) {
            double v = values[static_cast<std::size_t>(ix) * ny + row];
            if (v < 0.0) v = 0.0;
            auto q = static_cast<std::uint32_t>(v * scale + 0.5);
            if (q > 65535) q = 65535;
            out.push_back(static_cast<char>((q >> 8) & 0xff));
            out.push_back(static_cast<char>(q & 0xff));
        }
    }
    return out;
}

}  // namespace solenoid

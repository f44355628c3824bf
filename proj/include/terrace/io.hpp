#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "terrace/error.hpp"

namespace terrace::io {

/// 17-significant-digit decimal; every double round-trips.
inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string num_list(std::span<const double> xs) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ", ";
        s += num(xs[i]);
    }
    return s + "]";
}

/// Two-column CSV with the given header, one row per pair.
inline std::string csv(const std::string& header, const std::vector<std::pair<double, double>>& rows) {
    std::string out = header + "\n";
    for (const auto& [a, b] : rows) {
        out += num(a);
        out += ',';
        out += num(b);
        out += '\n';
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) detail::fail("IoError", "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) detail::fail("IoError", "cannot write " + path.string());
    out << text;
}

/// Parses a two-column CSV with a header line; throws ParseError on malformed rows.
inline std::vector<std::pair<double, double>> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::pair<double, double>> rows;
    if (!std::getline(in, line)) detail::fail("ParseError", "empty CSV");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) detail::fail("ParseError", "CSV row without comma: " + line);
        try {
            rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            detail::fail("ParseError", "bad CSV number in: " + line);
        }
    }
    return rows;
}

}  // namespace terrace::io

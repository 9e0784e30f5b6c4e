#pragma once

// Minimal CSV output with a config-hash comment line. Numbers are written
// in shortest round-trip form so reruns produce byte-identical files.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "meascost/errors.hpp"

namespace meascost::csv {

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

inline std::string format(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

using Cell = std::variant<double, std::string, long long>;

inline std::string format(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format(*d);
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        if (row.size() != columns.size()) throw LengthMismatch("row width differs from header");
        rows.push_back(std::move(row));
    }
};

inline std::string render(const Table& t, std::string_view config_hash = {}) {
    std::string out;
    if (!config_hash.empty()) out += "# config_hash: " + std::string(config_hash) + "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format(row[i]);
        }
        out += '\n';
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw Error("write failed for " + path.string());
}

inline void write(const std::filesystem::path& path, const Table& t, std::string_view config_hash = {}) {
    write_file(path, render(t, config_hash));
}

// Reads a numeric CSV; lines starting with '#' are skipped and a first line
// that does not parse as numbers is taken as the header.
struct NumericTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw FormatError("missing column '" + std::string(name) + "'");
    }
};

inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
            field.remove_suffix(1);
        out.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline bool parse_double(std::string_view s, double& v) {
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

inline NumericTable read_numeric(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open " + path.string());
    NumericTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split(line);
        std::vector<double> row(fields.size());
        bool numeric = true;
        for (std::size_t i = 0; i < fields.size(); ++i) numeric = numeric && parse_double(fields[i], row[i]);
        if (!numeric) {
            if (t.columns.empty() && t.rows.empty()) {
                t.columns = fields;
                continue;
            }
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": non-numeric value");
        }
        if (!t.columns.empty() && row.size() != t.columns.size())
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": wrong number of fields");
        if (!t.rows.empty() && row.size() != t.rows.front().size())
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": wrong number of fields");
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace meascost::csv

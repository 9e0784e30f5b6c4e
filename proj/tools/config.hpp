#pragma once

// key = value configuration with per-command sections, typed lookup that
// collects violations instead of throwing, and a hash over the resolved
// values.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "meascost/csv.hpp"
#include "meascost/errors.hpp"

namespace meascost::app {

inline std::string normalize_key(std::string key) {
    for (auto& c : key)
        if (c == '-') c = '_';
    return key;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Reads `key = value` lines. Lines before any [section] apply to every
// command; lines inside [name] apply only to command `name`.
inline std::map<std::string, std::string> read_config_file(const std::string& path, const std::string& command) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::map<std::string, std::string> out;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section header");
            section = trim(text.substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        if (!section.empty() && section != command) continue;
        const auto key = normalize_key(trim(text.substr(0, eq)));
        if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        out[key] = trim(text.substr(eq + 1));
    }
    return out;
}

inline bool parse_number(const std::string& s, double& v) {
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    return r.ec == std::errc{} && r.ptr == s.data() + s.size() && std::isfinite(v);
}

// "start:stop:step" (inclusive of stop up to rounding), a comma list, or a
// single number.
inline std::optional<std::vector<double>> parse_grid(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':')) {
            double v;
            if (!parse_number(trim(item), v)) return std::nullopt;
            parts.push_back(v);
        }
        if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) return std::nullopt;
        const auto count = static_cast<long long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
        if (count > 10'000'000) return std::nullopt;
        for (long long i = 0; i <= count; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v;
        if (!parse_number(trim(item), v)) return std::nullopt;
        out.push_back(v);
    }
    if (out.empty()) return std::nullopt;
    return out;
}

class Params {
public:
    Params(std::string command, std::map<std::string, std::string> values)
        : command_(std::move(command)), values_(std::move(values)) {}

    const std::vector<std::string>& violations() const { return violations_; }
    void violation(std::string msg) { violations_.push_back(std::move(msg)); }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    double real(const std::string& key, double fallback) {
        used_.insert(key);
        double v = fallback;
        if (auto it = values_.find(key); it != values_.end() && !parse_number(it->second, v)) {
            violation(key + ": expected a number, got '" + it->second + "'");
            v = fallback;
        }
        resolved_[key] = csv::format(v);
        return v;
    }

    std::optional<double> optional_real(const std::string& key) {
        if (!has(key)) {
            used_.insert(key);
            return std::nullopt;
        }
        return real(key, 0.0);
    }

    long long integer(const std::string& key, long long fallback, long long min_value) {
        used_.insert(key);
        long long v = fallback;
        if (auto it = values_.find(key); it != values_.end()) {
            const auto& s = it->second;
            const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
            if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
                violation(key + ": expected an integer, got '" + s + "'");
                v = fallback;
            }
        }
        if (v < min_value) violation(key + ": must be >= " + std::to_string(min_value));
        resolved_[key] = std::to_string(v);
        return v;
    }

    bool flag(const std::string& key, bool fallback) {
        used_.insert(key);
        bool v = fallback;
        if (auto it = values_.find(key); it != values_.end()) {
            const auto& s = it->second;
            if (s == "1" || s == "true" || s == "yes" || s == "on") v = true;
            else if (s == "0" || s == "false" || s == "no" || s == "off") v = false;
            else violation(key + ": expected true/false, got '" + s + "'");
        }
        resolved_[key] = v ? "true" : "false";
        return v;
    }

    std::string text(const std::string& key, const std::string& fallback) {
        used_.insert(key);
        auto it = values_.find(key);
        const std::string v = it == values_.end() ? fallback : it->second;
        resolved_[key] = v;
        return v;
    }

    std::vector<double> grid(const std::string& key, const std::string& fallback) {
        const auto raw = text(key, fallback);
        auto g = parse_grid(raw);
        if (!g) {
            violation(key + ": expected start:stop:step or a comma list, got '" + raw + "'");
            return {};
        }
        return *g;
    }

    std::vector<std::string> list(const std::string& key, const std::string& fallback) {
        std::vector<std::string> out;
        std::stringstream ss(text(key, fallback));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        if (out.empty()) violation(key + ": empty list");
        return out;
    }

    std::optional<std::uint64_t> seed(bool required) {
        used_.insert("seed");
        auto it = values_.find("seed");
        if (it == values_.end()) {
            if (required) violation("seed: missing (this command is stochastic and needs an explicit seed)");
            return std::nullopt;
        }
        std::uint64_t v = 0;
        const auto& s = it->second;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
            violation("seed: expected a non-negative integer, got '" + s + "'");
            return std::nullopt;
        }
        resolved_["seed"] = std::to_string(v);
        return v;
    }

    // Keys that were supplied but never read by the command.
    void check_unknown() {
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) violation(k + ": unknown key for command '" + command_ + "'");
    }

    // Hash over the command and every resolved value. Keys that cannot
    // change results (thread count, output location) are excluded.
    std::string hash() const {
        std::string canon = "command=" + command_ + "\n";
        for (const auto& [k, v] : resolved_)
            if (k != "threads" && k != "output_dir") canon += k + "=" + v + "\n";
        return csv::hex64(csv::fnv1a64(canon));
    }

private:
    std::string command_;
    std::map<std::string, std::string> values_;
    std::map<std::string, std::string> resolved_;
    std::set<std::string> used_;
    std::vector<std::string> violations_;
};

}  // namespace meascost::app

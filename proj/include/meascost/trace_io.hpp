#pragma once

// Trace and spectrum serialization. The binary record is
//   "HTRC" | u32 version (1) | f64 dt | u64 length | length x (f64 re, f64 im)
// with every field little-endian.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "meascost/csv.hpp"
#include "meascost/errors.hpp"
#include "meascost/heterodyne.hpp"

namespace meascost {

inline constexpr char kTraceMagic[4] = {'H', 'T', 'R', 'C'};
inline constexpr std::uint32_t kTraceVersion = 1;

namespace detail {

inline void put_le(std::string& out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_le(const std::string& in, std::size_t& pos, int bytes) {
    if (pos + static_cast<std::size_t>(bytes) > in.size()) throw FormatError("truncated trace record");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += static_cast<std::size_t>(bytes);
    return v;
}

}  // namespace detail

inline std::string encode_trace(const HeterodyneTrace& t) {
    t.validate();
    std::string out(kTraceMagic, 4);
    detail::put_le(out, kTraceVersion, 4);
    detail::put_le(out, std::bit_cast<std::uint64_t>(t.dt), 8);
    detail::put_le(out, t.samples.size(), 8);
    out.reserve(out.size() + 16 * t.samples.size());
    for (const auto& s : t.samples) {
        detail::put_le(out, std::bit_cast<std::uint64_t>(s.real()), 8);
        detail::put_le(out, std::bit_cast<std::uint64_t>(s.imag()), 8);
    }
    return out;
}

// The record carries no qubit label or demodulation offset; those fields of
// the result are left at their defaults.
inline HeterodyneTrace decode_trace(const std::string& bytes) {
    if (bytes.size() < 24 || std::memcmp(bytes.data(), kTraceMagic, 4) != 0) throw FormatError("not a trace record");
    std::size_t pos = 4;
    const auto version = detail::get_le(bytes, pos, 4);
    if (version != kTraceVersion) throw FormatError("unsupported trace record version " + std::to_string(version));
    HeterodyneTrace t;
    t.dt = std::bit_cast<double>(detail::get_le(bytes, pos, 8));
    const auto n = detail::get_le(bytes, pos, 8);
    if (bytes.size() - pos != 16 * n) throw FormatError("trace record length does not match header");
    t.samples.resize(n);
    for (auto& s : t.samples) {
        const double re = std::bit_cast<double>(detail::get_le(bytes, pos, 8));
        const double im = std::bit_cast<double>(detail::get_le(bytes, pos, 8));
        s = {re, im};
    }
    t.validate();
    return t;
}

inline void write_trace_binary(const std::filesystem::path& path, const HeterodyneTrace& t) {
    csv::write_file(path, encode_trace(t));
}

inline HeterodyneTrace read_trace_binary(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_trace(bytes);
}

inline csv::Table trace_table(const HeterodyneTrace& t) {
    csv::Table tab{{"time_s", "i", "q"}, {}};
    for (std::size_t k = 0; k < t.samples.size(); ++k)
        tab.add({static_cast<double>(k) * t.dt, t.samples[k].real(), t.samples[k].imag()});
    return tab;
}

inline csv::Table spectrum_table(const AmplitudeSpectrum& s) {
    csv::Table tab{{"freq_hz", "amplitude"}, {}};
    for (std::size_t k = 0; k < s.size(); ++k) tab.add({s.freqs_hz[k], s.amplitudes[k]});
    return tab;
}

inline AmplitudeSpectrum read_spectrum_csv(const std::filesystem::path& path) {
    const auto t = csv::read_numeric(path);
    const std::size_t fi = t.columns.empty() ? 0 : t.column("freq_hz");
    const std::size_t ai = t.columns.empty() ? 1 : t.column("amplitude");
    AmplitudeSpectrum s;
    for (const auto& row : t.rows) {
        s.freqs_hz.push_back(row.at(fi));
        const double a = row.at(ai);
        if (!(a >= 0.0)) throw FormatError(path.string() + ": negative amplitude");
        s.amplitudes.push_back(a);
    }
    return s;
}

}  // namespace meascost

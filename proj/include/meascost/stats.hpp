#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "meascost/errors.hpp"

namespace meascost::stats {

inline double mean(std::span<const double> x) {
    if (x.empty()) throw DomainError("mean of an empty sample");
    double s = 0.0;
    for (const double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// Unbiased (n - 1) sample variance.
inline double variance(std::span<const double> x) {
    if (x.size() < 2) throw DomainError("variance needs at least two samples");
    const double m = mean(x);
    double s = 0.0;
    for (const double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

inline double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

inline double central_moment(std::span<const double> x, int order) {
    const double m = mean(x);
    double s = 0.0;
    for (const double v : x) s += std::pow(v - m, order);
    return s / static_cast<double>(x.size());
}

inline double standard_error_of_mean(std::span<const double> x) {
    return stddev(x) / std::sqrt(static_cast<double>(x.size()));
}

// Large-sample standard error of the sample variance, sqrt((m4 - m2^2) / n).
inline double standard_error_of_variance(std::span<const double> x) {
    const double m2 = central_moment(x, 2);
    const double m4 = central_moment(x, 4);
    return std::sqrt(std::max(m4 - m2 * m2, 0.0) / static_cast<double>(x.size()));
}

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> counts;

    double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
    double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * bin_width(); }
};

// Fixed-range histogram; values outside [lo, hi] land in the edge bins.
inline Histogram histogram(std::span<const double> x, double lo, double hi, std::size_t bins) {
    if (bins == 0 || !(hi > lo)) throw DomainError("histogram needs bins > 0 and hi > lo");
    Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
    for (const double v : x) {
        auto idx = static_cast<long long>(std::floor((v - lo) / h.bin_width()));
        idx = std::max<long long>(0, std::min<long long>(idx, static_cast<long long>(bins) - 1));
        ++h.counts[static_cast<std::size_t>(idx)];
    }
    return h;
}

}  // namespace meascost::stats

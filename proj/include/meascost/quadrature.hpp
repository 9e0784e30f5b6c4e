#pragma once

// Heterodyne (Husimi) sampling of single-mode field states: an outcome beta
// is drawn with density <beta|rho|beta>/pi. Quadratures are in units where
// the vacuum has variance 1/2 per quadrature.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "meascost/errors.hpp"
#include "meascost/fock.hpp"
#include "meascost/parallel.hpp"
#include "meascost/rng.hpp"

namespace meascost {

struct QuadratureSample {
    Complex beta;
    double i() const { return beta.real(); }
    double q() const { return beta.imag(); }
};

// Pure-loss (beam-splitter) channel with power transmissivity t.
inline DensityMatrix attenuate(const DensityMatrix& field, double transmissivity) {
    if (field.dims().size() != 1) throw DomainError("attenuate expects a single-mode state");
    if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) throw DomainError("transmissivity must lie in [0, 1]");
    if (transmissivity == 1.0) return field;
    const auto dim = static_cast<Eigen::Index>(field.size());
    CMatrix out = CMatrix::Zero(dim, dim);
    if (transmissivity == 0.0) {
        out(0, 0) = field.matrix().trace();
        return DensityMatrix(unchecked, std::move(out), field.dims(), field.labels());
    }
    const double log_t = std::log(transmissivity);
    const double log_r = transmissivity < 1.0 ? std::log1p(-transmissivity) : -INFINITY;
    auto log_binom = [](double n, double k) {
        return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    };
    for (Eigen::Index m = 0; m < dim; ++m)
        for (Eigen::Index n = 0; n < dim; ++n) {
            Complex acc{};
            for (Eigen::Index k = 0; m + k < dim && n + k < dim; ++k) {
                const Complex src = field.matrix()(m + k, n + k);
                if (src == Complex{}) continue;
                const double mk = static_cast<double>(m + k), nk = static_cast<double>(n + k), kk = static_cast<double>(k);
                const double log_w = 0.5 * (log_binom(mk, kk) + log_binom(nk, kk)) +
                                     0.5 * static_cast<double>(m + n) * log_t + (k > 0 ? kk * log_r : 0.0);
                acc += std::exp(log_w) * src;
            }
            out(m, n) = acc;
        }
    return DensityMatrix(unchecked, std::move(out), field.dims(), field.labels());
}

// Draws heterodyne outcomes from a fixed state. Detection efficiency eta
// scales the field amplitude by eta before the vacuum noise is added.
//
// Sampling is exact: in polar coordinates beta = r e^{i phi}, u = r^2 follows
// the mixture sum_n rho_nn Gamma(n + 1, 1), and phi given r follows a
// trigonometric polynomial that is sampled by rejection against a uniform
// proposal bounded by the sum of coefficient magnitudes.
class QuadratureSampler {
public:
    explicit QuadratureSampler(const DensityMatrix& field, double eta = 1.0) {
        if (field.dims().size() != 1) throw DomainError("quadrature sampling expects a single-mode state");
        if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("detection efficiency must lie in (0, 1]");
        const DensityMatrix scaled = attenuate(field, eta * eta);
        const auto dim = static_cast<Eigen::Index>(scaled.size());
        std::vector<double> weights(static_cast<std::size_t>(dim));
        for (Eigen::Index n = 0; n < dim; ++n) {
            weights[static_cast<std::size_t>(n)] = std::max(scaled.matrix()(n, n).real(), 0.0);
            log_fact_.push_back(std::lgamma(static_cast<double>(n) + 1.0));
        }
        double total = 0.0;
        for (const double w : weights) cumulative_.push_back(total += w);
        if (!(total > 0.0)) throw InvalidState("field has no population");
        diag_ = weights;
        for (Eigen::Index m = 0; m < dim; ++m)
            for (Eigen::Index n = m + 1; n < dim; ++n) {
                const Complex v = scaled.matrix()(m, n);
                if (std::abs(v) > 1e-15)
                    offdiag_.push_back({static_cast<std::size_t>(m), static_cast<std::size_t>(n), v});
            }
        max_order_ = static_cast<std::size_t>(dim);
    }

    bool has_phase_structure() const noexcept { return !offdiag_.empty(); }

    QuadratureSample operator()(Engine& rng) const {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double pick = unit(rng) * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), pick);
        const auto n = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                                        static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
        std::gamma_distribution<double> radial(static_cast<double>(n) + 1.0, 1.0);
        const double u = radial(rng);
        const double r = std::sqrt(u);
        double phi = kTwo_pi * unit(rng);
        if (has_phase_structure() && u > 0.0) phi = sample_phase(u, rng);
        return {std::polar(r, phi)};
    }

private:
    static constexpr double kTwo_pi = 2.0 * std::numbers::pi;

    struct Entry {
        std::size_t m, n;
        Complex value;
    };

    double sample_phase(double u, Engine& rng) const {
        const double log_r = 0.5 * std::log(u);
        double scale = -INFINITY;
        for (std::size_t k = 0; k < max_order_; ++k)
            scale = std::max(scale, 2.0 * static_cast<double>(k) * log_r - log_fact_[k]);
        double c0 = 0.0;
        for (std::size_t k = 0; k < max_order_; ++k)
            if (diag_[k] > 0.0) c0 += diag_[k] * std::exp(2.0 * static_cast<double>(k) * log_r - log_fact_[k] - scale);
        std::vector<Complex> harmonics(max_order_, Complex{});
        for (const auto& e : offdiag_) {
            const double w = std::exp(static_cast<double>(e.m + e.n) * log_r -
                                      0.5 * (log_fact_[e.m] + log_fact_[e.n]) - scale);
            harmonics[e.n - e.m] += e.value * w;
        }
        double bound = c0;
        for (std::size_t d = 1; d < max_order_; ++d) bound += 2.0 * std::abs(harmonics[d]);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (;;) {
            const double phi = kTwo_pi * unit(rng);
            double density = c0;
            for (std::size_t d = 1; d < max_order_; ++d)
                if (harmonics[d] != Complex{})
                    density += 2.0 * (harmonics[d] * std::polar(1.0, static_cast<double>(d) * phi)).real();
            if (unit(rng) * bound <= density) return phi;
        }
    }

    std::vector<double> cumulative_;
    std::vector<double> diag_;
    std::vector<double> log_fact_;
    std::vector<Entry> offdiag_;
    std::size_t max_order_ = 0;
};

inline QuadratureSample sample_quadrature(const DensityMatrix& field, double eta, std::uint64_t seed) {
    auto rng = stream_engine(seed, Stream::quadrature, 0);
    return QuadratureSampler(field, eta)(rng);
}

// `count` outcomes; outcome i uses its own stream (seed, tag, i).
inline std::vector<QuadratureSample> sample_quadratures(const DensityMatrix& field, double eta, std::size_t count,
                                                         std::uint64_t seed, Stream tag = Stream::quadrature,
                                                         std::size_t threads = 1) {
    const QuadratureSampler sampler(field, eta);
    std::vector<QuadratureSample> out(count);
    parallel_for(count, threads, [&](std::size_t i) {
        auto rng = stream_engine(seed, tag, i);
        out[i] = sampler(rng);
    });
    return out;
}

}  // namespace meascost

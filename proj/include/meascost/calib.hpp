#pragma once

// Photon-number calibration from qubit spectroscopy: combs of Gaussian peaks
// split by 2 chi per photon, whose areas follow the photon distribution and
// whose widths grow with the photon number; fitting such combs, integrating
// photon series into an emitted-photon count, and the saturation fit
// n_emit = A / (1 + B / P_in).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "meascost/csv.hpp"
#include "meascost/errors.hpp"
#include "meascost/lsq.hpp"
#include "meascost/rng.hpp"
#include "meascost/sources.hpp"

namespace meascost {

enum class LinewidthMode { thermal_on, thermal_off, coherent };
enum class PhotonDistribution { poisson, geometric };

inline LinewidthMode parse_linewidth_mode(std::string_view s) {
    if (s == "thermal_on") return LinewidthMode::thermal_on;
    if (s == "thermal_off") return LinewidthMode::thermal_off;
    if (s == "coherent") return LinewidthMode::coherent;
    throw ConfigError("unknown linewidth mode '" + std::string(s) + "'");
}

inline PhotonDistribution parse_distribution(std::string_view s) {
    if (s == "poisson") return PhotonDistribution::poisson;
    if (s == "geometric") return PhotonDistribution::geometric;
    throw ConfigError("unknown photon distribution '" + std::string(s) + "'");
}

struct SpectrumModel {
    double peak_spacing = -12.6e6;  // Hz per photon, 2 chi / 2 pi
    double gamma_intrinsic = 0.2e6;  // Hz, FWHM
    LinewidthMode linewidth_mode = LinewidthMode::thermal_off;
    PhotonDistribution distribution = PhotonDistribution::poisson;
    double nbar = 0.0;
    double amplitude = 1.0;

    void validate() const {
        if (peak_spacing == 0.0 || !std::isfinite(peak_spacing)) throw ConfigError("peak spacing must be nonzero");
        if (!(nbar >= 0.0)) throw ConfigError("nbar must be >= 0");
        if (!(gamma_intrinsic >= 0.0)) throw ConfigError("intrinsic linewidth must be >= 0");
    }
};

// FWHM in Hz of the peak of Fock index n; kappa in rad/s.
inline double linewidth(std::size_t n, const SpectrumModel& m, double kappa) {
    const double nn = static_cast<double>(n);
    double gamma = 0.0;
    switch (m.linewidth_mode) {
        case LinewidthMode::thermal_on: gamma = kappa * (2.0 * m.nbar * nn + nn + m.nbar); break;
        case LinewidthMode::thermal_off:
        case LinewidthMode::coherent: gamma = kappa * nn; break;
    }
    return m.gamma_intrinsic + angular_to_hz(gamma);
}

inline double photon_probability(PhotonDistribution d, double nbar, std::size_t n) {
    const double nn = static_cast<double>(n);
    if (nbar == 0.0) return n == 0 ? 1.0 : 0.0;
    if (d == PhotonDistribution::poisson) return std::exp(-nbar + nn * std::log(nbar) - std::lgamma(nn + 1.0));
    return std::exp(nn * std::log(nbar) - (nn + 1.0) * std::log1p(nbar));
}

// Largest photon number whose peak center lies on the grid.
inline std::size_t peaks_in_grid(const std::vector<double>& freq_grid, double peak_spacing) {
    if (freq_grid.empty()) throw DomainError("empty frequency grid");
    const auto [lo, hi] = std::minmax_element(freq_grid.begin(), freq_grid.end());
    const double reach = peak_spacing > 0.0 ? *hi : -*lo;
    if (reach < 0.0) return 0;
    return static_cast<std::size_t>(std::floor(reach / std::abs(peak_spacing) + 1e-9));
}

struct SynthSpectrum {
    std::vector<double> values;
    std::vector<double> peak_areas;  // amplitude * renormalized weight, n = 0..n_max
    double truncated_tail = 0.0;     // distribution mass above n_max
};

inline SynthSpectrum synth_spectrum(const SpectrumModel& m, const std::vector<double>& freq_grid, double kappa,
                                    std::size_t n_max) {
    m.validate();
    if (n_max > 2000) throw DomainError("n_max beyond 2000 peaks");
    SynthSpectrum out;
    double head = 0.0;
    for (std::size_t n = 0; n <= n_max; ++n) {
        out.peak_areas.push_back(photon_probability(m.distribution, m.nbar, n));
        head += out.peak_areas.back();
    }
    out.truncated_tail = std::max(0.0, 1.0 - head);
    for (auto& a : out.peak_areas) a *= m.amplitude / head;

    const double fwhm_to_sigma = 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    out.values.assign(freq_grid.size(), 0.0);
    for (std::size_t n = 0; n <= n_max; ++n) {
        if (out.peak_areas[n] == 0.0) continue;
        const double sigma = linewidth(n, m, kappa) * fwhm_to_sigma;
        if (!(sigma > 0.0)) throw DomainError("zero linewidth peak");
        const double center = static_cast<double>(n) * m.peak_spacing;
        const double norm = out.peak_areas[n] / (sigma * std::sqrt(2.0 * std::numbers::pi));
        for (std::size_t k = 0; k < freq_grid.size(); ++k) {
            const double z = (freq_grid[k] - center) / sigma;
            out.values[k] += norm * std::exp(-0.5 * z * z);
        }
    }
    return out;
}

inline SynthSpectrum synth_spectrum(const SpectrumModel& m, const std::vector<double>& freq_grid, double kappa) {
    return synth_spectrum(m, freq_grid, kappa, peaks_in_grid(freq_grid, m.peak_spacing));
}

// Additive Gaussian noise with standard deviation `relative` times the
// largest absolute value of the data.
inline std::vector<double> add_noise(std::vector<double> data, double relative, std::uint64_t seed) {
    double scale = 0.0;
    for (const double v : data) scale = std::max(scale, std::abs(v));
    auto rng = stream_engine(seed, Stream::fit_noise, 0);
    std::normal_distribution<double> normal(0.0, relative * scale);
    for (auto& v : data) v += normal(rng);
    return data;
}

struct SpectrumFit {
    SpectrumModel model;
    double n_c = 0.0;
    lsq::Result lsq;
    nlohmann::json report;
};

inline nlohmann::json fit_report_json(const std::vector<std::string>& names, const lsq::Result& r,
                                      const std::vector<std::string>& flags) {
    nlohmann::json j;
    for (std::size_t i = 0; i < names.size(); ++i) {
        j["parameters"][names[i]] = r.params(static_cast<Eigen::Index>(i));
        j["uncertainties"][names[i]] = r.standard_errors(static_cast<Eigen::Index>(i));
    }
    j["residual_norm"] = r.residual_norm;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["condition_number"] = std::isfinite(r.condition_number) ? nlohmann::json(r.condition_number) : nlohmann::json(nullptr);
    j["flags"] = flags;
    return j;
}

// Fits (nbar, gamma_intrinsic, amplitude) with the peak spacing and kappa
// held fixed. Peaks up to the last one centered on the grid are modelled.
inline SpectrumFit fit_spectrum(const std::vector<double>& data, const std::vector<double>& freq_grid, double kappa,
                                const SpectrumModel& init, const lsq::Options& opt = {}) {
    init.validate();
    if (data.size() != freq_grid.size()) throw LengthMismatch("spectrum and frequency grid lengths differ");
    if (data.size() < 4) throw DegenerateData("too few spectrum points");
    const auto [lo, hi] = std::minmax_element(freq_grid.begin(), freq_grid.end());
    if (*hi - *lo < 3.0 * std::abs(init.peak_spacing))
        throw DomainError("frequency grid must span at least three peak spacings");
    const auto [dmin, dmax] = std::minmax_element(data.begin(), data.end());
    const double scale = std::max(std::abs(*dmin), std::abs(*dmax));
    if (!(scale > 0.0) || *dmax - *dmin <= 1e-12 * scale) throw DegenerateData("flat spectrum");

    const std::size_t n_max = peaks_in_grid(freq_grid, init.peak_spacing);
    auto model_for = [&](const lsq::Vec& p) {
        SpectrumModel m = init;
        m.nbar = p(0);
        m.gamma_intrinsic = p(1);
        m.amplitude = p(2) * scale;
        return m;
    };
    auto residual = [&](const lsq::Vec& p) {
        const auto synth = synth_spectrum(model_for(p), freq_grid, kappa, n_max);
        lsq::Vec r(static_cast<Eigen::Index>(data.size()));
        for (std::size_t k = 0; k < data.size(); ++k) r(static_cast<Eigen::Index>(k)) = (synth.values[k] - data[k]) / scale;
        return r;
    };

    lsq::Vec p0(3);
    p0 << init.nbar, std::max(init.gamma_intrinsic, 1e-6 * std::abs(init.peak_spacing)), init.amplitude / scale;
    const double inf = std::numeric_limits<double>::infinity();
    lsq::Bounds bounds{lsq::Vec(3), lsq::Vec(3)};
    bounds.lower << 0.0, 1e-9 * std::abs(init.peak_spacing), -inf;
    bounds.upper << static_cast<double>(n_max) + 50.0, inf, inf;

    SpectrumFit fit;
    fit.lsq = lsq::levenberg_marquardt(residual, p0, opt, bounds);
    if (!fit.lsq.converged) throw NoConvergence("spectrum fit hit the iteration cap");
    fit.model = model_for(fit.lsq.params);
    fit.n_c = fit.model.nbar;

    lsq::Result scaled = fit.lsq;
    scaled.params(2) *= scale;
    scaled.standard_errors(2) *= scale;
    scaled.residual_norm *= scale;
    std::vector<std::string> flags;
    if (fit.model.nbar <= 0.0) flags.push_back("nbar_at_lower_bound");
    const double tail = synth_spectrum(fit.model, freq_grid, kappa, n_max).truncated_tail;
    if (tail > 1e-3) flags.push_back("distribution_tail_beyond_grid");
    fit.report = fit_report_json({"nbar", "gamma_intrinsic_hz", "amplitude"}, scaled, flags);
    fit.report["n_max"] = n_max;
    fit.report["truncated_tail"] = tail;
    return fit;
}

struct PhotonSeries {
    std::vector<double> times;
    std::vector<double> n_c;
    double dt = 200e-9;

    void validate() const {
        if (times.size() != n_c.size()) throw LengthMismatch("times and n_c lengths differ");
        if (n_c.empty()) throw DomainError("empty photon series");
        if (!(dt > 0.0)) throw DomainError("dt must be > 0");
        for (const double v : n_c)
            if (!(v >= 0.0)) throw DomainError("photon numbers must be >= 0");
    }
};

// Sum of n_c kappa dt; doubled when the light fills both qubit-state
// resonances.
inline double emitted_photons(const PhotonSeries& s, double kappa, bool two_resonance) {
    s.validate();
    double sum = 0.0;
    for (const double v : s.n_c) sum += v;
    return (two_resonance ? 2.0 : 1.0) * sum * kappa * s.dt;
}

struct SaturationFit {
    double a = 0.0;
    double b = 0.0;
    double slope = 0.0;  // A / B, the low-power slope
    double slope_error = 0.0;
    bool near_linear = false;
    std::vector<double> residuals;
    nlohmann::json report;
};

inline double saturation_model(double a, double b, double p_in) { return a / (1.0 + b / p_in); }

// Fitted as n = s P / (1 + c P) with s = A/B and c = 1/B, which stays well
// conditioned when the data never bend over (c -> 0).
inline SaturationFit fit_saturation(const std::vector<double>& p_in, const std::vector<double>& n_emit,
                                    const lsq::Options& opt = {}) {
    if (p_in.size() != n_emit.size()) throw LengthMismatch("p_in and n_emit lengths differ");
    if (p_in.size() < 3) throw DegenerateData("saturation fit needs at least three points");
    for (const double p : p_in)
        if (!(p > 0.0)) throw DomainError("input powers must be > 0");
    if (std::set<double>(p_in.begin(), p_in.end()).size() < 2) throw DegenerateData("all input powers are equal");

    const double p_scale = *std::max_element(p_in.begin(), p_in.end());
    double n_scale = 0.0;
    for (const double v : n_emit) n_scale = std::max(n_scale, std::abs(v));
    if (!(n_scale > 0.0)) throw DegenerateData("all photon numbers are zero");

    // Work in units where P and n are O(1).
    const auto m = static_cast<Eigen::Index>(p_in.size());
    auto residual = [&](const lsq::Vec& q) {
        lsq::Vec r(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double x = p_in[static_cast<std::size_t>(i)] / p_scale;
            r(i) = q(0) * x / (1.0 + q(1) * x) - n_emit[static_cast<std::size_t>(i)] / n_scale;
        }
        return r;
    };

    // Start from the straight line 1/n = (1/s)(1/P) + c/s when possible.
    lsq::Vec q0(2);
    q0 << 1.0, 0.0;
    if (std::all_of(n_emit.begin(), n_emit.end(), [](double v) { return v > 0.0; })) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < p_in.size(); ++i) {
            const double x = p_scale / p_in[i], y = n_scale / n_emit[i];
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = static_cast<double>(p_in.size());
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double icpt = (sy - slope * sx) / n;
        if (slope > 0.0) q0 << 1.0 / slope, std::max(icpt / slope, 0.0);
    }
    const double inf = std::numeric_limits<double>::infinity();
    lsq::Bounds bounds{lsq::Vec(2), lsq::Vec(2)};
    bounds.lower << -inf, 0.0;
    bounds.upper << inf, inf;
    const auto r = lsq::levenberg_marquardt(residual, q0, opt, bounds);
    if (!r.converged) throw NoConvergence("saturation fit hit the iteration cap");

    SaturationFit fit;
    const double s = r.params(0) * n_scale / p_scale;
    const double c = r.params(1) / p_scale;
    fit.slope = s;
    fit.slope_error = r.standard_errors(0) * n_scale / p_scale;
    fit.b = c > 0.0 ? 1.0 / c : inf;
    fit.a = c > 0.0 ? s / c : inf;
    // Curvature below 5% over the measured range, or not resolved from zero.
    fit.near_linear = r.params(1) < 0.05 || r.standard_errors(1) > 0.5 * r.params(1);
    for (Eigen::Index i = 0; i < m; ++i) fit.residuals.push_back(r.residuals(i) * n_scale);

    std::vector<std::string> flags;
    if (fit.near_linear) flags.push_back("near_linear: A and B individually ill-conditioned, slope A/B is reliable");
    nlohmann::json j;
    j["parameters"]["A"] = std::isfinite(fit.a) ? nlohmann::json(fit.a) : nlohmann::json(nullptr);
    j["parameters"]["B"] = std::isfinite(fit.b) ? nlohmann::json(fit.b) : nlohmann::json(nullptr);
    j["parameters"]["slope_A_over_B"] = fit.slope;
    j["uncertainties"]["slope_A_over_B"] = fit.slope_error;
    j["uncertainties"]["inverse_B"] = r.standard_errors(1) / p_scale;
    j["residual_norm"] = r.residual_norm * n_scale;
    j["residuals"] = fit.residuals;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["flags"] = flags;
    fit.report = j;
    return fit;
}

// CSV inputs: (frequency_Hz, amplitude), (time_s, n_c), (p_in, n_emit).
struct XY {
    std::vector<double> x, y;
};

inline XY read_xy(const std::filesystem::path& path, std::string_view x_name, std::string_view y_name) {
    const auto t = csv::read_numeric(path);
    std::size_t ix = 0, iy = 1;
    if (!t.columns.empty()) {
        ix = t.column(x_name);
        iy = t.column(y_name);
    } else if (!t.rows.empty() && t.rows.front().size() < 2) {
        throw FormatError(path.string() + ": expected two columns");
    }
    XY out;
    for (const auto& row : t.rows) {
        out.x.push_back(row.at(ix));
        out.y.push_back(row.at(iy));
    }
    if (out.x.empty()) throw FormatError(path.string() + ": no data rows");
    return out;
}

inline PhotonSeries read_photon_series(const std::filesystem::path& path, std::optional<double> dt = {}) {
    auto xy = read_xy(path, "time_s", "n_c");
    PhotonSeries s;
    s.times = std::move(xy.x);
    s.n_c = std::move(xy.y);
    if (dt) s.dt = *dt;
    else if (s.times.size() >= 2) s.dt = s.times[1] - s.times[0];
    s.validate();
    return s;
}

}  // namespace meascost

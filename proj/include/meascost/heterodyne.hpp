#pragma once

// Monte-Carlo model of the classical readout channel: integrated I/Q points
// for coherent light, demodulated noise traces and their amplitude spectra
// for thermal light, and the histogram SNR 2|c_g - c_e| / (sigma_g + sigma_e).

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "meascost/errors.hpp"
#include "meascost/fock.hpp"
#include "meascost/parallel.hpp"
#include "meascost/quadrature.hpp"
#include "meascost/rng.hpp"
#include "meascost/sources.hpp"
#include "meascost/stats.hpp"

namespace meascost {

enum class QubitLabel { g, e };

inline std::string_view label_name(QubitLabel q) { return q == QubitLabel::g ? "g" : "e"; }

struct SnrResult {
    double center_g = 0.0;
    double center_e = 0.0;
    double sigma_g = 0.0;
    double sigma_e = 0.0;
    double snr = 0.0;
};

inline SnrResult snr_from_signals(std::span<const double> signal_g, std::span<const double> signal_e) {
    SnrResult r;
    r.center_g = stats::mean(signal_g);
    r.center_e = stats::mean(signal_e);
    r.sigma_g = stats::stddev(signal_g);
    r.sigma_e = stats::stddev(signal_e);
    if (!(r.sigma_g + r.sigma_e > 0.0)) throw DegenerateData("both signal classes have zero spread");
    r.snr = 2.0 * std::abs(r.center_g - r.center_e) / (r.sigma_g + r.sigma_e);
    return r;
}

inline double snr_model_coherent(double n_emit, double eta) {
    if (!(n_emit >= 0.0)) throw DomainError("n_emit must be >= 0");
    return eta * std::sqrt(2.0 * n_emit);
}

struct IqProjection {
    SnrResult snr;
    Complex axis;  // unit vector from the e cloud toward the g cloud
    std::vector<double> signal_g;
    std::vector<double> signal_e;
};

// Projects both I/Q clouds onto the empirical mean-difference axis; falls
// back to the Q axis when the means coincide exactly.
inline IqProjection project_iq(std::span<const QuadratureSample> g, std::span<const QuadratureSample> e) {
    if (g.size() < 2 || e.size() < 2) throw DomainError("need at least two samples per class");
    Complex mean_g{}, mean_e{};
    for (const auto& s : g) mean_g += s.beta;
    for (const auto& s : e) mean_e += s.beta;
    mean_g /= static_cast<double>(g.size());
    mean_e /= static_cast<double>(e.size());
    const Complex diff = mean_g - mean_e;
    IqProjection out;
    out.axis = std::abs(diff) > 0.0 ? diff / std::abs(diff) : Complex{0.0, 1.0};
    auto project = [&](const QuadratureSample& s) { return (std::conj(out.axis) * s.beta).real(); };
    out.signal_g.reserve(g.size());
    out.signal_e.reserve(e.size());
    for (const auto& s : g) out.signal_g.push_back(project(s));
    for (const auto& s : e) out.signal_e.push_back(project(s));
    out.snr = snr_from_signals(out.signal_g, out.signal_e);
    return out;
}

// Qubit g leaves the cavity in |i sqrt(n_emit)> (a displacement along Q),
// qubit e leaves it empty.
inline IqProjection coherent_readout_mc(double n_emit, double eta, std::size_t shots, std::uint64_t seed,
                                        std::size_t threads = 1) {
    if (shots < 100) throw DomainError("coherent_snr_mc needs shots >= 100");
    if (!(n_emit >= 0.0)) throw DomainError("n_emit must be >= 0");
    const double tol = 1e-12;
    TruncationPolicy policy{std::max<std::size_t>(poisson_min_dim(n_emit, tol), 2), tol};
    const auto field_g = DensityMatrix::pure(coherent_state(Complex{0.0, std::sqrt(n_emit)}, policy), "cavity");
    const auto field_e = DensityMatrix::pure(fock_state(0, policy.dim), "cavity");
    const auto g = sample_quadratures(field_g, eta, shots, seed, Stream::coherent_g, threads);
    const auto e = sample_quadratures(field_e, eta, shots, seed, Stream::coherent_e, threads);
    return project_iq(g, e);
}

inline SnrResult coherent_snr_mc(double n_emit, double eta, std::size_t shots, std::uint64_t seed,
                                 std::size_t threads = 1) {
    return coherent_readout_mc(n_emit, eta, shots, seed, threads).snr;
}

// Physical constants of the readout chain. Rates are angular frequencies;
// demodulation offsets and the sample rate are in Hz.
struct SystemParams {
    double kappa = hz_to_angular(0.5e6);
    double chi = hz_to_angular(-6.3e6);
    double cavity_freq_g_hz = 5.6185e9;
    double demod_offset_g_hz = 20e6;
    double demod_offset_e_hz = 32.5e6;
    double sample_rate_hz = 100e6;
    double eta = 1.0;
    // Thermal spectra show the resonance at both +offset and -offset; the
    // Lorentzian power is split evenly between the two images.
    bool mirror_peaks = true;

    void validate() const {
        if (!(kappa > 0.0)) throw ConfigError("kappa must be > 0");
        if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be > 0");
        if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in (0, 1]");
        const double nyquist = sample_rate_hz / 2.0;
        if (std::abs(demod_offset_g_hz) >= nyquist || std::abs(demod_offset_e_hz) >= nyquist)
            throw ConfigError("demodulation offsets must lie below the Nyquist frequency");
    }

    double offset_for(QubitLabel q) const { return q == QubitLabel::g ? demod_offset_g_hz : demod_offset_e_hz; }
};

struct HeterodyneTrace {
    std::vector<Complex> samples;  // I + iQ
    double dt = 0.0;
    QubitLabel qubit_label = QubitLabel::g;
    double demod_offset_hz = 0.0;
    std::uint64_t shot_index = 0;

    void validate() const {
        if (samples.size() < 2) throw DomainError("trace needs at least two samples");
        if (!(dt > 0.0)) throw DomainError("trace sample interval must be > 0");
    }
    double duration() const { return dt * static_cast<double>(samples.size()); }
};

inline std::size_t trace_length(const SystemParams& params, double duration) {
    return static_cast<std::size_t>(std::llround(duration * params.sample_rate_hz));
}

// Photons the cavity emits during one simulated trace.
inline double thermal_trace_emitted_photons(double nbar, double duration, const SystemParams& params) {
    return nbar * params.kappa * duration;
}

// Demodulated output for thermal illumination. The intracavity field is a
// stationary complex Ornstein-Uhlenbeck process of mean occupancy nbar and
// amplitude decay rate kappa/2 (a Lorentzian of half-width kappa/2),
// rotating at the qubit-dependent demodulation offset. It leaves the cavity
// at rate kappa and is recorded per sample as eta * sqrt(kappa dt) * a(t),
// on top of amplifier vacuum noise with variance 1/2 per quadrature.
inline HeterodyneTrace simulate_thermal_trace(QubitLabel qubit, const SystemParams& params, double nbar,
                                              double duration, std::uint64_t seed, std::uint64_t shot = 0,
                                              Stream tag_override = Stream::quadrature) {
    if (!(duration > 0.0)) throw ConfigError("trace duration must be > 0");
    if (!(nbar >= 0.0)) throw ConfigError("thermal occupancy must be >= 0");
    params.validate();
    const std::size_t n = trace_length(params, duration);
    if (n < 64) throw ConfigError("trace shorter than 64 samples; increase duration or sample rate");

    const Stream tag = tag_override != Stream::quadrature ? tag_override
                       : qubit == QubitLabel::g          ? Stream::thermal_g
                                                         : Stream::thermal_e;
    auto rng = stream_engine(seed, tag, shot);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto complex_normal = [&](double variance_total) {
        const double s = std::sqrt(variance_total / 2.0);
        const double re = normal(rng);
        const double im = normal(rng);
        return Complex{s * re, s * im};
    };

    HeterodyneTrace trace;
    trace.dt = 1.0 / params.sample_rate_hz;
    trace.qubit_label = qubit;
    trace.demod_offset_hz = params.offset_for(qubit);
    trace.shot_index = shot;
    trace.samples.assign(n, Complex{});

    std::vector<double> offsets = {trace.demod_offset_hz};
    if (params.mirror_peaks) offsets.push_back(-trace.demod_offset_hz);
    const double occupancy = nbar / static_cast<double>(offsets.size());
    const double out_coupling = params.eta * std::sqrt(params.kappa * trace.dt);
    for (const double f0 : offsets) {
        const Complex lambda = std::exp(Complex{-params.kappa / 2.0, kTwoPi * f0} * trace.dt);
        const double innovation = occupancy * (1.0 - std::norm(lambda));
        Complex a = complex_normal(occupancy);
        for (auto& s : trace.samples) {
            s += out_coupling * a;
            a = lambda * a + complex_normal(innovation);
        }
    }
    for (auto& s : trace.samples) s += complex_normal(1.0);
    return trace;
}

struct AmplitudeSpectrum {
    std::vector<double> freqs_hz;  // ascending
    std::vector<double> amplitudes;
    bool background_subtracted = false;

    std::size_t size() const { return amplitudes.size(); }
};

enum class Window { none, hann };

// FFT frequencies in ascending order for n samples at interval dt.
inline std::vector<double> fft_frequencies(std::size_t n, double dt) {
    std::vector<double> f(n);
    const auto half = static_cast<long long>(n / 2);
    const auto first = -half;
    for (std::size_t k = 0; k < n; ++k)
        f[k] = static_cast<double>(first + static_cast<long long>(k)) / (static_cast<double>(n) * dt);
    return f;
}

// Pointwise difference clamped at zero.
inline AmplitudeSpectrum subtract_background(AmplitudeSpectrum spec, const AmplitudeSpectrum& background) {
    if (background.size() != spec.size() || background.freqs_hz != spec.freqs_hz)
        throw LengthMismatch("background spectrum grid does not match");
    for (std::size_t k = 0; k < spec.size(); ++k)
        spec.amplitudes[k] = std::max(spec.amplitudes[k] - background.amplitudes[k], 0.0);
    spec.background_subtracted = true;
    return spec;
}

// |FFT| of I + iQ, without normalization, reordered to ascending frequency.
// With a background, the background amplitudes are subtracted and the result
// clamped at zero.
inline AmplitudeSpectrum amplitude_spectrum(const HeterodyneTrace& trace,
                                            const AmplitudeSpectrum* background = nullptr,
                                            Window window = Window::none) {
    trace.validate();
    const std::size_t n = trace.samples.size();
    std::vector<Complex> in = trace.samples;
    if (window == Window::hann)
        for (std::size_t k = 0; k < n; ++k)
            in[k] *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    std::vector<Complex> out;
    Eigen::FFT<double> fft;
    fft.fwd(out, in);

    AmplitudeSpectrum spec;
    spec.freqs_hz = fft_frequencies(n, trace.dt);
    spec.amplitudes.resize(n);
    const std::size_t half = n / 2;
    // Ascending order starts at bin n - half (the most negative frequency).
    for (std::size_t k = 0; k < n; ++k) spec.amplitudes[k] = std::abs(out[(k + n - half) % n]);
    return background ? subtract_background(spec, *background) : spec;
}

inline AmplitudeSpectrum average_spectra(std::span<const AmplitudeSpectrum> spectra) {
    if (spectra.empty()) throw DomainError("no spectra to average");
    AmplitudeSpectrum avg = spectra.front();
    for (std::size_t i = 1; i < spectra.size(); ++i) {
        if (spectra[i].size() != avg.size()) throw LengthMismatch("spectra lengths differ");
        for (std::size_t k = 0; k < avg.size(); ++k) avg.amplitudes[k] += spectra[i].amplitudes[k];
    }
    for (auto& a : avg.amplitudes) a /= static_cast<double>(spectra.size());
    return avg;
}

// Weighted integral of the amplitude spectrum.
inline double thermal_measurement_signal(const AmplitudeSpectrum& spectrum, std::span<const double> weights) {
    if (weights.size() != spectrum.size()) throw LengthMismatch("weight length differs from spectrum length");
    double s = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) s += spectrum.amplitudes[k] * weights[k];
    return s;
}

// Weight function: mean g spectrum minus mean e spectrum.
inline std::vector<double> difference_weights(const AmplitudeSpectrum& mean_g, const AmplitudeSpectrum& mean_e) {
    if (mean_g.size() != mean_e.size()) throw LengthMismatch("class spectra lengths differ");
    std::vector<double> w(mean_g.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = mean_g.amplitudes[k] - mean_e.amplitudes[k];
    return w;
}

struct ThermalSnrOptions {
    double train_fraction = 0.5;
    Window window = Window::none;
    // Light-off traces averaged into a background; 0 disables subtraction.
    std::size_t background_shots = 0;
    std::size_t threads = 1;
};

struct ThermalReadout {
    SnrResult snr;
    double n_emit = 0.0;
    std::vector<double> weights;
    AmplitudeSpectrum mean_g;
    AmplitudeSpectrum mean_e;
    std::vector<double> signal_g;
    std::vector<double> signal_e;
};

// Full thermal pipeline: traces per class, weight from the class-averaged
// spectra of a training split, signals and SNR from the disjoint rest.
inline ThermalReadout thermal_readout_mc(double nbar, double duration, const SystemParams& params,
                                         std::size_t shots, std::uint64_t seed,
                                         const ThermalSnrOptions& opt = {}) {
    if (shots < 100) throw DomainError("thermal_snr_mc needs shots >= 100");
    if (!(opt.train_fraction > 0.0 && opt.train_fraction < 1.0))
        throw ConfigError("train_fraction must lie in (0, 1)");
    const auto n_train = static_cast<std::size_t>(std::llround(opt.train_fraction * static_cast<double>(shots)));
    if (n_train < 2 || shots - n_train < 2) throw ConfigError("train/evaluate split leaves a class empty");

    std::optional<AmplitudeSpectrum> background;
    if (opt.background_shots > 0) {
        std::vector<AmplitudeSpectrum> bg(opt.background_shots);
        parallel_for(bg.size(), opt.threads, [&](std::size_t i) {
            bg[i] = amplitude_spectrum(
                simulate_thermal_trace(QubitLabel::g, params, 0.0, duration, seed, i, Stream::thermal_background),
                nullptr, opt.window);
        });
        background = average_spectra(bg);
    }
    const AmplitudeSpectrum* bg_ptr = background ? &*background : nullptr;

    auto spectra_for = [&](QubitLabel q) {
        std::vector<AmplitudeSpectrum> out(shots);
        parallel_for(shots, opt.threads, [&](std::size_t i) {
            out[i] = amplitude_spectrum(simulate_thermal_trace(q, params, nbar, duration, seed, i), bg_ptr, opt.window);
        });
        return out;
    };
    const auto spectra_g = spectra_for(QubitLabel::g);
    const auto spectra_e = spectra_for(QubitLabel::e);

    ThermalReadout out;
    out.n_emit = thermal_trace_emitted_photons(nbar, duration, params);
    out.mean_g = average_spectra(std::span(spectra_g).first(n_train));
    out.mean_e = average_spectra(std::span(spectra_e).first(n_train));
    out.weights = difference_weights(out.mean_g, out.mean_e);
    for (std::size_t i = n_train; i < shots; ++i) {
        out.signal_g.push_back(thermal_measurement_signal(spectra_g[i], out.weights));
        out.signal_e.push_back(thermal_measurement_signal(spectra_e[i], out.weights));
    }
    out.snr = snr_from_signals(out.signal_g, out.signal_e);
    return out;
}

inline SnrResult thermal_snr_mc(double nbar, double duration, const SystemParams& params, std::size_t shots,
                                std::uint64_t seed, const ThermalSnrOptions& opt = {}) {
    return thermal_readout_mc(nbar, duration, params, shots, seed, opt).snr;
}

}  // namespace meascost

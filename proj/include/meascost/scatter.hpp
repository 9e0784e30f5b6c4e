#pragma once

// Symmetric two-port cavity between a hot and a cold thermal bath: the
// qubit-dependent transmission/reflection, output power spectra, and the
// single-frequency and frequency-integrated power SNR.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "meascost/constants.hpp"
#include "meascost/csv.hpp"
#include "meascost/errors.hpp"
#include "meascost/sources.hpp"

namespace meascost {

enum class Branch { plus, minus };

inline double branch_sign(Branch b) { return b == Branch::plus ? 1.0 : -1.0; }

inline double bose_einstein(double freq_hz, double temperature) {
    if (!(temperature > 0.0)) throw DomainError("temperature must be > 0");
    if (!(freq_hz > 0.0)) throw DomainError("frequency must be > 0");
    return 1.0 / std::expm1(kHbar * kTwoPi * freq_hz / (kBoltzmann * temperature));
}

struct BathTemperatures {
    double carrier_hz = 5.6185e9;  // cavity frequency; delta = omega_c - omega
    double t_hot = 0.0;
    double t_cold = 0.0;
};

struct ScatterScene {
    double kappa = hz_to_angular(0.5e6);
    double chi = hz_to_angular(12.6e6);
    std::vector<double> detuning_grid;  // rad/s
    double nbar_hot = 0.0;
    double nbar_cold = 0.0;
    double duration = 1e-6;
    // When set, occupancies follow the Bose-Einstein law at each frequency
    // instead of the constant nbar_hot / nbar_cold.
    std::optional<BathTemperatures> baths;

    void validate() const {
        if (!(kappa > 0.0)) throw ConfigError("kappa must be > 0");
        if (!(duration > 0.0)) throw ConfigError("duration must be > 0");
        if (!(nbar_hot >= 0.0) || !(nbar_cold >= 0.0)) throw ConfigError("occupancies must be >= 0");
        if (baths && (!(baths->t_hot > 0.0) || !(baths->t_cold > 0.0) || !(baths->carrier_hz > 0.0)))
            throw ConfigError("bath temperatures and carrier must be > 0");
    }

    static ScatterScene from_temperatures(double kappa, double chi, double carrier_hz, double t_hot, double t_cold,
                                          double duration) {
        ScatterScene s;
        s.kappa = kappa;
        s.chi = chi;
        s.duration = duration;
        s.nbar_hot = bose_einstein(carrier_hz, t_hot);
        s.nbar_cold = bose_einstein(carrier_hz, t_cold);
        return s;
    }

    std::pair<double, double> occupancies_at(double delta) const {
        if (!baths) return {nbar_hot, nbar_cold};
        const double f = baths->carrier_hz - angular_to_hz(delta);
        return {bose_einstein(f, baths->t_hot), bose_einstein(f, baths->t_cold)};
    }
};

inline Complex transmission(double delta, Branch b, const ScatterScene& s) {
    return -s.kappa / Complex{s.kappa, delta + branch_sign(b) * s.chi / 2.0};
}

inline Complex reflection(double delta, Branch b, const ScatterScene& s) {
    const double x = delta + branch_sign(b) * s.chi / 2.0;
    return Complex{0.0, x} / Complex{s.kappa, x};
}

inline double transmission_difference_closed_form(double delta, const ScatterScene& s) {
    const double kp = (delta + s.chi / 2.0) / s.kappa;
    const double km = (delta - s.chi / 2.0) / s.kappa;
    return -2.0 * s.chi * delta / (s.kappa * s.kappa) / ((1.0 + kp * kp) * (1.0 + km * km));
}

struct SpectralResult {
    std::vector<double> detuning_grid;
    std::vector<double> s_plus;
    std::vector<double> s_minus;
    std::vector<double> signal;          // s_plus - s_minus
    std::vector<double> photon_signal;   // nH (|T+|^2-|T-|^2) + nC (|R+|^2-|R-|^2)
    std::vector<double> transmission_difference;
    std::vector<double> transmission_difference_closed_form;
    std::vector<double> snr_p;
};

inline double power_spectrum_at(double delta, Branch b, const ScatterScene& s) {
    const auto [nh, nc] = s.occupancies_at(delta);
    return std::norm(transmission(delta, b, s)) * (nh + 1.0) / 2.0 + std::norm(reflection(delta, b, s)) * (nc + 1.0) / 2.0;
}

inline double photon_signal_at(double delta, const ScatterScene& s) {
    const auto [nh, nc] = s.occupancies_at(delta);
    const double dt = std::norm(transmission(delta, Branch::plus, s)) - std::norm(transmission(delta, Branch::minus, s));
    // |R|^2 differences are the negated |T|^2 differences by unitarity.
    return (nh - nc) * dt;
}

// Noise terms use the mean of the two branches' |T|^2 and |R|^2.
inline double snr_single_frequency(const ScatterScene& s, double delta) {
    s.validate();
    const auto [nh, nc] = s.occupancies_at(delta);
    const double t2 = (std::norm(transmission(delta, Branch::plus, s)) + std::norm(transmission(delta, Branch::minus, s))) / 2.0;
    const double r2 = (std::norm(reflection(delta, Branch::plus, s)) + std::norm(reflection(delta, Branch::minus, s))) / 2.0;
    const double denom = std::sqrt((nh + 1.0) * (nh + 1.0) * t2 + (nc + 1.0) * (nc + 1.0) * r2);
    if (!(denom > 0.0)) throw DomainError("SNR noise term vanishes");
    return photon_signal_at(delta, s) * std::sqrt(s.duration) / denom;
}

inline SpectralResult power_spectrum(const ScatterScene& s) {
    s.validate();
    SpectralResult r;
    r.detuning_grid = s.detuning_grid;
    for (const double d : s.detuning_grid) {
        r.s_plus.push_back(power_spectrum_at(d, Branch::plus, s));
        r.s_minus.push_back(power_spectrum_at(d, Branch::minus, s));
        r.signal.push_back(r.s_plus.back() - r.s_minus.back());
        r.photon_signal.push_back(photon_signal_at(d, s));
        r.transmission_difference.push_back(std::norm(transmission(d, Branch::plus, s)) -
                                            std::norm(transmission(d, Branch::minus, s)));
        r.transmission_difference_closed_form.push_back(transmission_difference_closed_form(d, s));
        r.snr_p.push_back(snr_single_frequency(s, d));
    }
    return r;
}

struct IntegratedSnr {
    double snr_closed_form = 0.0;
    double signal_closed_form = 0.0;  // pi kappa (nH - nC)
    double signal_numeric = 0.0;
    double snr_numeric = 0.0;
    double relative_error = 0.0;  // of signal_numeric against the closed form
    std::vector<std::string> warnings;
};

// The photon signal integrated over the half of the detuning axis that
// holds the + resonance, from delta = 0 out to infinity. The half-axis is
// mapped onto [0, pi/2) by delta = kappa tan(u) and integrated with the
// trapezoid rule; the integrand vanishes at u = pi/2.
inline double integrated_signal_numeric(const ScatterScene& s, std::size_t panels = 200000) {
    const double side = s.chi >= 0.0 ? -1.0 : 1.0;
    const double h = (std::numbers::pi / 2.0) / static_cast<double>(panels);
    double sum = 0.5 * photon_signal_at(0.0, s);
    for (std::size_t i = 1; i < panels; ++i) {
        const double t = std::tan(h * static_cast<double>(i));
        sum += photon_signal_at(side * s.kappa * t, s) * s.kappa * (1.0 + t * t);
    }
    return sum * h;
}

inline IntegratedSnr snr_integrated(const ScatterScene& s) {
    s.validate();
    IntegratedSnr r;
    const double dn = s.nbar_hot - s.nbar_cold;
    const double noise = (s.nbar_hot + 1.0) * (s.nbar_hot + 1.0) + (s.nbar_cold + 1.0) * (s.nbar_cold + 1.0);
    r.snr_closed_form = std::sqrt(std::numbers::pi * s.kappa * s.duration) * dn / std::sqrt(noise);
    r.signal_closed_form = std::numbers::pi * s.kappa * dn;
    r.signal_numeric = integrated_signal_numeric(s);
    r.snr_numeric = r.signal_numeric * std::sqrt(s.duration) / std::sqrt(std::numbers::pi * s.kappa * noise);
    r.relative_error = r.signal_closed_form != 0.0
                           ? std::abs(r.signal_numeric - r.signal_closed_form) / std::abs(r.signal_closed_form)
                           : std::abs(r.signal_numeric);
    if (std::abs(s.chi) / s.kappa < 5.0)
        r.warnings.push_back("chi/kappa = " + csv::format(std::abs(s.chi) / s.kappa) +
                             " < 5: resonances overlap and the integrated closed form is unreliable");
    return r;
}

inline csv::Table spectral_table(const SpectralResult& r) {
    csv::Table t{{"delta_rad_s", "s_plus", "s_minus", "signal", "photon_signal", "dT2", "dT2_closed_form", "snr_p"}, {}};
    for (std::size_t i = 0; i < r.detuning_grid.size(); ++i)
        t.add({r.detuning_grid[i], r.s_plus[i], r.s_minus[i], r.signal[i], r.photon_signal[i], r.transmission_difference[i],
               r.transmission_difference_closed_form[i], r.snr_p[i]});
    return t;
}

}  // namespace meascost

#pragma once

// Probe-light channels acting on the qubit-cavity system, the resulting
// measurement backaction, and the literature dephasing-rate formulas used
// as consistency checks.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "meascost/errors.hpp"
#include "meascost/fock.hpp"

namespace meascost {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Rates are angular frequencies everywhere in the library.
inline constexpr double hz_to_angular(double hz) { return kTwoPi * hz; }
inline constexpr double angular_to_hz(double rad_per_s) { return rad_per_s / kTwoPi; }

struct Coherent {
    Complex alpha;
};
struct Thermal {
    double nbar_per_mode = 0.0;
};
struct SinglePhoton {
    double theta = 0.0;  // radians, [0, pi]
};

using SourceSpec = std::variant<Coherent, Thermal, SinglePhoton>;

enum class SourceFamily { coherent, thermal, single_photon };

inline std::string_view family_name(SourceFamily f) {
    switch (f) {
        case SourceFamily::coherent: return "coherent";
        case SourceFamily::thermal: return "thermal";
        case SourceFamily::single_photon: return "single_photon";
    }
    return "?";
}

inline SourceFamily parse_family(std::string_view name) {
    if (name == "coherent") return SourceFamily::coherent;
    if (name == "thermal") return SourceFamily::thermal;
    if (name == "single_photon" || name == "single-photon") return SourceFamily::single_photon;
    throw ConfigError("unknown source family '" + std::string(name) + "'");
}

inline SourceFamily family_of(const SourceSpec& s) {
    return static_cast<SourceFamily>(s.index());
}

inline void validate(const SourceSpec& s) {
    if (const auto* t = std::get_if<Thermal>(&s); t && !(t->nbar_per_mode >= 0.0))
        throw DomainError("thermal occupancy must be >= 0");
    if (const auto* p = std::get_if<SinglePhoton>(&s); p && !(p->theta >= 0.0 && p->theta <= std::numbers::pi))
        throw DomainError("single-photon rotation angle must lie in [0, pi]");
}

// Mean photons emitted per measurement for a single application of the
// channel: |alpha|^2, two resonances times the per-mode occupancy, or
// sin^2(theta/2).
inline double emitted_photons(const SourceSpec& s) {
    return std::visit(
        [](const auto& src) -> double {
            using T = std::decay_t<decltype(src)>;
            if constexpr (std::is_same_v<T, Coherent>) return std::norm(src.alpha);
            else if constexpr (std::is_same_v<T, Thermal>) return 2.0 * src.nbar_per_mode;
            else {
                const double s2 = std::sin(src.theta / 2.0);
                return s2 * s2;
            }
        },
        s);
}

// Inverse of emitted_photons; coherent amplitudes are taken real.
inline SourceSpec source_for_photons(SourceFamily family, double n) {
    if (!(n >= 0.0)) throw DomainError("photon number must be >= 0");
    switch (family) {
        case SourceFamily::coherent: return Coherent{Complex{std::sqrt(n), 0.0}};
        case SourceFamily::thermal: return Thermal{n / 2.0};
        case SourceFamily::single_photon:
            if (n > 1.0) throw DomainError("n_emit > 1 for single photon");
            return SinglePhoton{2.0 * std::asin(std::sqrt(n))};
    }
    throw DomainError("unknown family");
}

// Smallest cutoff that keeps the discarded tail under `tail_tolerance`.
inline TruncationPolicy policy_for(const SourceSpec& s, double tail_tolerance) {
    TruncationPolicy p;
    p.tail_tolerance = tail_tolerance;
    std::visit(
        [&](const auto& src) {
            using T = std::decay_t<decltype(src)>;
            if constexpr (std::is_same_v<T, Coherent>)
                p.dim = poisson_min_dim(std::norm(src.alpha), tail_tolerance);
            else if constexpr (std::is_same_v<T, Thermal>)
                p.dim = geometric_min_dim(src.nbar_per_mode, tail_tolerance);
            else
                p.dim = 2;
        },
        s);
    p.dim = std::max<std::size_t>(p.dim, 2);
    return p;
}

inline DensityMatrix qubit_state(Complex amp_g, Complex amp_e) {
    CVector v(2);
    v << amp_g, amp_e;
    v.normalize();
    return DensityMatrix::pure(v, {2}, {"qubit"});
}

// (|g> + |e>)/sqrt(2); index 0 is g, index 1 is e.
inline DensityMatrix plus_state() { return qubit_state(1.0, 1.0); }

// Kraus operator from the qubit (dim 2) into the joint qubit-field space,
// stored as two sparse columns (images of |g> and |e>).
struct KrausOp {
    using Column = std::vector<std::pair<std::size_t, Complex>>;
    std::array<Column, 2> columns;
};

struct SourceChannel {
    std::vector<KrausOp> kraus;
    std::vector<std::size_t> dims;
    std::vector<std::string> labels;
};

namespace detail {

inline KrausOp::Column embed(std::size_t qubit, const CVector& field, std::size_t field_size,
                             double weight = 1.0) {
    KrausOp::Column col;
    for (Eigen::Index n = 0; n < field.size(); ++n)
        if (field(n) != Complex{}) col.emplace_back(qubit * field_size + static_cast<std::size_t>(n), weight * field(n));
    return col;
}

}  // namespace detail

inline constexpr std::size_t kQubitG = 0;
inline constexpr std::size_t kQubitE = 1;

// Builds the channel for one application of the source. Coherent light
// displaces the cavity only when the qubit is in g; single-photon light
// adds a photon amplitude sin(theta/2) only when the qubit is in e; thermal
// light is the two-mode classical mixture in which the mode resonant with
// the qubit's current state receives a thermal photon number.
inline SourceChannel source_channel(const SourceSpec& source, const TruncationPolicy& policy) {
    validate(source);
    policy.validate();
    SourceChannel ch;
    std::visit(
        [&](const auto& src) {
            using T = std::decay_t<decltype(src)>;
            if constexpr (std::is_same_v<T, Coherent>) {
                const auto alpha = coherent_state(src.alpha, policy);
                const auto vac = fock_state(0, policy.dim);
                ch.dims = {2, policy.dim};
                ch.labels = {"qubit", "cavity"};
                KrausOp k;
                k.columns[kQubitG] = detail::embed(kQubitG, alpha.amplitudes(), policy.dim);
                k.columns[kQubitE] = detail::embed(kQubitE, vac.amplitudes(), policy.dim);
                ch.kraus.push_back(std::move(k));
            } else if constexpr (std::is_same_v<T, SinglePhoton>) {
                const double s = std::sin(src.theta / 2.0);
                if (policy.dim < 2 && s * s > policy.tail_tolerance)
                    throw TailTooHeavy("single photon needs dim >= 2", s * s);
                const std::size_t dim = std::max<std::size_t>(policy.dim, 2);
                CVector excited = CVector::Zero(static_cast<Eigen::Index>(dim));
                excited(0) = std::cos(src.theta / 2.0);
                excited(1) = s;
                CVector vac = CVector::Zero(static_cast<Eigen::Index>(dim));
                vac(0) = 1.0;
                ch.dims = {2, dim};
                ch.labels = {"qubit", "cavity"};
                KrausOp k;
                k.columns[kQubitG] = detail::embed(kQubitG, vac, dim);
                k.columns[kQubitE] = detail::embed(kQubitE, excited, dim);
                ch.kraus.push_back(std::move(k));
            } else {
                const auto p = thermal_populations(src.nbar_per_mode, policy);
                const std::size_t d = policy.dim;
                const std::size_t field = d * d;
                ch.dims = {2, d, d};
                ch.labels = {"qubit", "mode_e", "mode_g"};
                // field index = n_e * d + n_g
                for (std::size_t n = 0; n < d; ++n) {
                    if (p[n] == 0.0) continue;
                    const double w = std::sqrt(p[n] / 2.0);
                    KrausOp on_e;  // light at the e resonance
                    on_e.columns[kQubitE] = {{kQubitE * field + n * d, w}};
                    on_e.columns[kQubitG] = {{kQubitG * field, w}};
                    KrausOp on_g;  // light at the g resonance
                    on_g.columns[kQubitG] = {{kQubitG * field + n, w}};
                    on_g.columns[kQubitE] = {{kQubitE * field, w}};
                    ch.kraus.push_back(std::move(on_e));
                    ch.kraus.push_back(std::move(on_g));
                }
            }
        },
        source);
    return ch;
}

inline DensityMatrix apply_channel(const SourceChannel& ch, const DensityMatrix& qubit) {
    if (qubit.dims().size() != 1 || qubit.dims()[0] != 2)
        throw DomainError("source channels act on a single two-level qubit state");
    const auto n = static_cast<Eigen::Index>(detail::product(ch.dims));
    CMatrix out = CMatrix::Zero(n, n);
    for (const auto& k : ch.kraus)
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b) {
                const Complex rho_ab = qubit(a, b);
                if (rho_ab == Complex{}) continue;
                for (const auto& [i, ki] : k.columns[a])
                    for (const auto& [j, kj] : k.columns[b])
                        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += ki * rho_ab * std::conj(kj);
            }
    return DensityMatrix(unchecked, std::move(out), ch.dims, ch.labels);
}

inline DensityMatrix apply_source(const SourceSpec& source, const DensityMatrix& qubit,
                                  const TruncationPolicy& policy) {
    return apply_channel(source_channel(source, policy), qubit);
}

inline DensityMatrix reduced_qubit(const DensityMatrix& joint) { return partial_trace(joint, {"qubit"}); }

// |2 rho_ge| of the reduced qubit state.
inline double qubit_coherence(const DensityMatrix& joint) {
    const auto q = reduced_qubit(joint);
    return 2.0 * std::abs(q(kQubitG, kQubitE));
}

// Coherence left after n_cells successive thermal cells, each carrying
// n_emit / (2 n_cells) photons per mode: (p0)^n_cells.
inline double thermal_coherence_repeated_map(double n_emit, std::size_t n_cells, const TruncationPolicy& policy) {
    if (n_cells < 1) throw DomainError("n_cells must be >= 1");
    if (!(n_emit >= 0.0)) throw DomainError("n_emit must be >= 0");
    const double nbar_cell = n_emit / (2.0 * static_cast<double>(n_cells));
    const double p0 = thermal_populations(nbar_cell, policy)[0];
    return std::pow(p0, static_cast<double>(n_cells));
}

inline double thermal_coherence_repeated_map(double n_emit, std::size_t n_cells) {
    TruncationPolicy policy;
    policy.tail_tolerance = 1e-15;
    policy.dim = geometric_min_dim(n_emit / (2.0 * static_cast<double>(std::max<std::size_t>(n_cells, 1))),
                                   policy.tail_tolerance);
    return thermal_coherence_repeated_map(n_emit, n_cells, policy);
}

struct CoherencePoint {
    double n_emit;
    double coherence;
};

inline double closed_form_coherence(SourceFamily family, double n_emit) {
    if (!(n_emit >= 0.0)) throw DomainError("n_emit must be >= 0");
    if (family == SourceFamily::single_photon) {
        if (n_emit > 1.0) throw DomainError("n_emit > 1 for single photon");
        return std::sqrt(1.0 - n_emit);
    }
    return std::exp(-n_emit / 2.0);
}

inline std::vector<CoherencePoint> coherence_curve(SourceFamily family, const std::vector<double>& n_emit_grid) {
    std::vector<CoherencePoint> out;
    out.reserve(n_emit_grid.size());
    for (const double n : n_emit_grid) out.push_back({n, closed_form_coherence(family, n)});
    return out;
}

struct RateParams {
    double kappa = 0.0;    // rad/s
    double chi = 0.0;      // rad/s
    double delta_r = 0.0;  // drive detuning, rad/s
    double nbar_plus = 0.0;   // occupancy with the qubit in g (thermal: equilibrium nbar)
    double nbar_minus = 0.0;  // occupancy with the qubit in e
    std::size_t n_fock = 0;

    void validate() const {
        if (!(kappa > 0.0)) throw DomainError("kappa must be > 0");
    }
};

// Measurement-induced dephasing rate for a coherent drive.
inline double dephasing_rate_coherent(const RateParams& p) {
    p.validate();
    return (p.nbar_plus + p.nbar_minus) * p.kappa * p.chi * p.chi /
           (p.kappa * p.kappa / 4.0 + p.chi * p.chi + p.delta_r * p.delta_r);
}

// Dephasing rate for a cavity in Fock state N under thermal occupancy nbar.
inline double dephasing_rate_thermal(const RateParams& p) {
    p.validate();
    const double nbar = p.nbar_plus;
    const double big_n = static_cast<double>(p.n_fock);
    return p.kappa * (2.0 * nbar * big_n + nbar + big_n);
}

inline double coherence_after(double rate, double duration) { return std::exp(-rate * duration); }

}  // namespace meascost

#pragma once

// Entropy bookkeeping of an unread measurement: the qubit-field state after
// the field is projected onto Fock states without recording the outcome,
// the entropies of its parts, their mutual information, and the minimal
// energy needed to erase the probe's entropy at a given temperature.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "meascost/constants.hpp"
#include "meascost/csv.hpp"
#include "meascost/errors.hpp"
#include "meascost/fock.hpp"
#include "meascost/parallel.hpp"
#include "meascost/sources.hpp"

namespace meascost {

struct InfoReport {
    SourceFamily family = SourceFamily::coherent;
    double n_cav = 0.0;
    double s_field = 0.0;  // bits
    double s_qubit = 0.0;
    double s_total = 0.0;
    double mutual_info = 0.0;
    double erasure_cost = 0.0;  // joules at the temperature used for the report
};

inline std::vector<std::string> field_labels(const DensityMatrix& joint) {
    if (!joint.has_label("qubit")) throw UnknownLabel("joint state has no 'qubit' subsystem");
    std::vector<std::string> out;
    for (const auto& l : joint.labels())
        if (l != "qubit") out.push_back(l);
    if (out.empty()) throw UnknownLabel("joint state has no field subsystem");
    return out;
}

inline DensityMatrix post_measurement_state(const SourceSpec& source, const TruncationPolicy& policy) {
    const auto joint = apply_source(source, plus_state(), policy);
    return dephase_fock_basis(joint, field_labels(joint));
}

inline double field_entropy(const DensityMatrix& joint) {
    return von_neumann_entropy(partial_trace(joint, field_labels(joint)), LogBase::two);
}

inline double qubit_entropy(const DensityMatrix& joint) {
    field_labels(joint);
    return von_neumann_entropy(partial_trace(joint, {"qubit"}), LogBase::two);
}

inline double mutual_information(const DensityMatrix& joint) {
    return qubit_entropy(joint) + field_entropy(joint) - von_neumann_entropy(joint, LogBase::two);
}

inline double erasure_cost(double s_field_bits, double temperature) {
    if (!(temperature > 0.0)) throw DomainError("erasure temperature must be > 0");
    if (!(s_field_bits >= 0.0)) throw DomainError("entropy must be >= 0");
    return kBoltzmann * temperature * s_field_bits * std::numbers::ln2;
}

inline InfoReport info_report(SourceFamily family, double n_cav, const TruncationPolicy& policy, double temperature) {
    const auto joint = post_measurement_state(source_for_photons(family, n_cav), policy);
    InfoReport r;
    r.family = family;
    r.n_cav = n_cav;
    r.s_qubit = qubit_entropy(joint);
    r.s_field = field_entropy(joint);
    r.s_total = von_neumann_entropy(joint, LogBase::two);
    r.mutual_info = r.s_qubit + r.s_field - r.s_total;
    r.erasure_cost = erasure_cost(r.s_field, temperature);
    return r;
}

// The cutoff is the policy's dim for every point; a point whose photon
// distribution does not fit raises TailTooHeavy.
inline std::vector<InfoReport> efficiency_scan(SourceFamily family, const std::vector<double>& n_grid,
                                               const TruncationPolicy& policy = {}, double temperature = 0.01,
                                               std::size_t threads = 1) {
    policy.validate();
    for (const double n : n_grid) validate(source_for_photons(family, n));
    std::vector<InfoReport> out(n_grid.size());
    parallel_for(n_grid.size(), threads, [&](std::size_t i) { out[i] = info_report(family, n_grid[i], policy, temperature); });
    return out;
}

inline csv::Table info_table(const std::vector<InfoReport>& reports) {
    csv::Table t{{"family", "n_cav", "S_f_bits", "S_q_bits", "S_tot_bits", "I_bits", "erasure_cost_J"}, {}};
    for (const auto& r : reports)
        t.add({std::string(family_name(r.family)), r.n_cav, r.s_field, r.s_qubit, r.s_total, r.mutual_info,
               r.erasure_cost});
    return t;
}

}  // namespace meascost

// Prints, for each source family, the qubit coherence left after emitting n
// photons and how much of the probe's entropy is information about the qubit.

#include <cstdio>

#include "meascost/sources.hpp"
#include "meascost/thermo.hpp"

using namespace meascost;

int main() {
    const TruncationPolicy policy{24, 1e-10};
    std::printf("%-14s %6s %10s %8s %8s %8s %12s\n", "family", "n", "coherence", "S_f", "I", "I/S_f", "erase@10mK");
    for (const auto family : {SourceFamily::coherent, SourceFamily::thermal, SourceFamily::single_photon}) {
        for (const double n : {0.1, 0.25, 0.5, 1.0}) {
            const auto r = info_report(family, n, policy, 0.01);
            std::printf("%-14s %6.2f %10.4f %8.4f %8.4f %8.3f %12.3e\n", std::string(family_name(family)).c_str(), n,
                        closed_form_coherence(family, n), r.s_field, r.mutual_info,
                        r.s_field > 0 ? r.mutual_info / r.s_field : 0.0, r.erasure_cost);
        }
    }
}

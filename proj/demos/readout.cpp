// Coherent versus thermal readout at equal emitted photon number, plus the
// transmission-difference signal of a symmetric cavity between two baths.

#include <cstdio>

#include "meascost/heterodyne.hpp"
#include "meascost/scatter.hpp"

using namespace meascost;

int main() {
    SystemParams sys;
    const double duration = 1e-6;
    ThermalSnrOptions opt;
    opt.threads = 4;

    std::printf("%6s %10s %12s %12s\n", "n_emit", "model", "coherent_mc", "thermal_mc");
    for (const double n : {1.0, 2.0, 4.0, 8.0}) {
        const double coherent = coherent_snr_mc(n, 1.0, 10000, 1, 4).snr;
        const double thermal = thermal_snr_mc(n / (sys.kappa * duration), duration, sys, 1000, 1, opt).snr;
        std::printf("%6.1f %10.3f %12.3f %12.3f\n", n, snr_model_coherent(n, 1.0), coherent, thermal);
    }

    ScatterScene scene;
    scene.nbar_hot = 2.0;
    scene.nbar_cold = 0.0;
    const auto s = snr_integrated(scene);
    std::printf("\nchi/kappa %.1f: integrated signal %.4e (closed form %.4e), SNR in 1 us %.3f\n",
                scene.chi / scene.kappa, s.signal_numeric, s.signal_closed_form, s.snr_numeric);
}

#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's implementation paths.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Fock population of a thermal state obtained by integrating the Glauber P
// distribution P(alpha) = exp(-|alpha|^2/nbar)/nbar against |<n|alpha>|^2
// over the complex plane (d^2 alpha / pi), in polar coordinates.
inline double thermal_population_from_p_function(double nbar, int n) {
    auto integrand = [&](double r) {
        const double r2 = r * r;
        return 2.0 * r * std::exp(-r2 / nbar) / nbar * std::exp(-r2 + n * std::log(std::max(r2, 1e-300)) - std::lgamma(n + 1.0));
    };
    const double upper = std::sqrt(60.0 * (nbar + 1.0)) + 6.0;
    return simpson(integrand, 0.0, upper, 200000);
}

inline double thermal_entropy_bits(double nbar) {
    if (nbar <= 0.0) return 0.0;
    return ((nbar + 1.0) * std::log(nbar + 1.0) - nbar * std::log(nbar)) / std::log(2.0);
}

inline double poisson_tail_by_complement(double mean, int dim) {
    double head = 0.0;
    for (int n = 0; n < dim; ++n) head += std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
    return 1.0 - head;
}

// Eigenvalues of a real symmetric 2x2 or diagonal-ish small matrix are not
// needed here; entropies below are from explicit probability lists.
inline double shannon_bits(const std::vector<double>& p) {
    double s = 0.0;
    for (const double x : p)
        if (x > 0.0) s -= x * std::log2(x);
    return s;
}

// Entropy (bits) of the 2x2 Hermitian matrix [[a, c], [conj(c), b]].
inline double entropy_2x2_bits(double a, double b, std::complex<double> c) {
    const double tr = a + b;
    const double disc = std::sqrt((a - b) * (a - b) / 4.0 + std::norm(c));
    return shannon_bits({tr / 2.0 + disc, tr / 2.0 - disc});
}

}  // namespace oracle

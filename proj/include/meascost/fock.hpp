#pragma once

// Truncated Fock-space linear algebra: state constructors, tensor products,
// partial trace, von Neumann entropy and Fock-basis dephasing.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "meascost/errors.hpp"

namespace meascost {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kHermiticityTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kEigenvalueFloor = -1e-10;
inline constexpr double kEntropyClamp = 1e-14;

// Photon-number cutoff plus the largest probability mass we agree to throw
// away above it.
struct TruncationPolicy {
    std::size_t dim = 32;
    double tail_tolerance = 1e-10;

    void validate() const {
        if (dim < 1) throw DomainError("truncation dim must be >= 1");
        if (!(tail_tolerance > 0.0 && tail_tolerance < 1.0))
            throw DomainError("tail_tolerance must lie in (0, 1)");
    }
};

// P(N >= dim) for N ~ Poisson(mean), summed directly over the tail.
inline double poisson_tail(double mean, std::size_t dim) {
    if (mean <= 0.0) return dim == 0 ? 1.0 : 0.0;
    const double log_mean = std::log(mean);
    double tail = 0.0;
    for (std::size_t n = dim;; ++n) {
        const double nn = static_cast<double>(n);
        const double term = std::exp(-mean + nn * log_mean - std::lgamma(nn + 1.0));
        tail += term;
        if (nn > mean && term < 1e-18 * std::max(tail, 1e-300)) break;
        if (nn > mean && term == 0.0) break;
    }
    return std::min(tail, 1.0);
}

// P(N >= dim) for the Bose-Einstein (geometric) distribution of mean nbar.
inline double geometric_tail(double nbar, std::size_t dim) {
    if (nbar <= 0.0) return dim == 0 ? 1.0 : 0.0;
    return std::pow(nbar / (nbar + 1.0), static_cast<double>(dim));
}

inline std::size_t poisson_min_dim(double mean, double tail_tolerance) {
    std::size_t dim = 1;
    while (poisson_tail(mean, dim) > tail_tolerance) ++dim;
    return dim;
}

inline std::size_t geometric_min_dim(double nbar, double tail_tolerance) {
    if (nbar <= 0.0) return 1;
    const double ratio = nbar / (nbar + 1.0);
    auto dim = static_cast<std::size_t>(std::ceil(std::log(tail_tolerance) / std::log(ratio)));
    dim = std::max<std::size_t>(dim, 1);
    while (geometric_tail(nbar, dim) > tail_tolerance) ++dim;
    return dim;
}

// Pure single-mode state in the Fock basis.
class FockVector {
public:
    FockVector(CVector amplitudes, double tail_mass = 0.0, bool normalize = true)
        : amplitudes_(std::move(amplitudes)), tail_mass_(tail_mass) {
        if (amplitudes_.size() < 1) throw DomainError("FockVector needs dim >= 1");
        const double norm = amplitudes_.norm();
        if (normalize) {
            if (norm == 0.0) throw InvalidState("cannot normalize a zero vector");
            renormalization_ = 1.0 / norm;
            amplitudes_ *= renormalization_;
        }
        normalized_ = normalize || std::abs(norm - 1.0) < 1e-12;
    }

    const CVector& amplitudes() const noexcept { return amplitudes_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }
    bool normalized() const noexcept { return normalized_; }
    // Factor the raw truncated amplitudes were multiplied by.
    double renormalization() const noexcept { return renormalization_; }
    double tail_mass() const noexcept { return tail_mass_; }
    Complex operator[](std::size_t n) const { return amplitudes_(static_cast<Eigen::Index>(n)); }

private:
    CVector amplitudes_;
    double tail_mass_ = 0.0;
    double renormalization_ = 1.0;
    bool normalized_ = true;
};

inline FockVector fock_state(std::size_t n, std::size_t dim) {
    if (n >= dim) throw DomainError("Fock index outside the truncated space");
    CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(n)) = 1.0;
    return FockVector(std::move(v));
}

inline FockVector coherent_state(Complex alpha, const TruncationPolicy& policy) {
    policy.validate();
    const double mean = std::norm(alpha);
    const double tail = poisson_tail(mean, policy.dim);
    if (tail > policy.tail_tolerance)
        throw TailTooHeavy("coherent state: tail mass " + std::to_string(tail) +
                               " above cutoff dim=" + std::to_string(policy.dim),
                           tail);
    const auto dim = static_cast<Eigen::Index>(policy.dim);
    CVector v(dim);
    v(0) = std::exp(-mean / 2.0);
    for (Eigen::Index n = 1; n < dim; ++n)
        v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return FockVector(std::move(v), tail);
}

// <bra|ket>
inline Complex overlap(const FockVector& bra, const FockVector& ket) {
    const auto dim = std::min(bra.dim(), ket.dim());
    const auto n = static_cast<Eigen::Index>(dim);
    return bra.amplitudes().head(n).dot(ket.amplitudes().head(n));
}

namespace detail {

inline std::size_t product(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

// Union-find over the nonzero pattern; Hermitian matrices from dephased or
// product states split into many small blocks.
inline std::vector<std::vector<Eigen::Index>> nonzero_blocks(const CMatrix& m) {
    const Eigen::Index n = m.rows();
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    auto find = [&](Eigen::Index i) {
        while (parent[static_cast<std::size_t>(i)] != i) {
            auto& p = parent[static_cast<std::size_t>(i)];
            p = parent[static_cast<std::size_t>(p)];
            i = p;
        }
        return i;
    };
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            if (m(i, j) != Complex{} || m(j, i) != Complex{}) {
                const auto a = find(i), b = find(j);
                if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
            }
    std::vector<std::vector<Eigen::Index>> blocks;
    std::vector<Eigen::Index> slot(static_cast<std::size_t>(n), -1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto root = find(i);
        auto& s = slot[static_cast<std::size_t>(root)];
        if (s < 0) {
            s = static_cast<Eigen::Index>(blocks.size());
            blocks.emplace_back();
        }
        blocks[static_cast<std::size_t>(s)].push_back(i);
    }
    return blocks;
}

}  // namespace detail

// Eigenvalues of a Hermitian matrix, diagonalizing each decoupled block
// separately. Order is unspecified.
inline std::vector<double> hermitian_eigenvalues(const CMatrix& m) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m.rows()));
    for (const auto& block : detail::nonzero_blocks(m)) {
        if (block.size() == 1) {
            out.push_back(m(block[0], block[0]).real());
            continue;
        }
        const auto k = static_cast<Eigen::Index>(block.size());
        CMatrix sub(k, k);
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b)
                sub(a, b) = m(block[static_cast<std::size_t>(a)], block[static_cast<std::size_t>(b)]);
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(sub, Eigen::EigenvaluesOnly);
        for (Eigen::Index a = 0; a < k; ++a) out.push_back(solver.eigenvalues()(a));
    }
    return out;
}

struct StateDiagnostics {
    double hermiticity_error = 0.0;  // max |rho - rho^dagger|
    double trace_error = 0.0;        // |Tr rho - 1|
    double min_eigenvalue = 0.0;

    bool ok() const {
        return hermiticity_error <= kHermiticityTolerance && trace_error <= kTraceTolerance &&
               min_eigenvalue >= kEigenvalueFloor;
    }
};

inline StateDiagnostics diagnose(const CMatrix& m) {
    StateDiagnostics d;
    d.hermiticity_error = (m - m.adjoint()).cwiseAbs().maxCoeff();
    d.trace_error = std::abs(m.trace() - Complex{1.0});
    const CMatrix herm = 0.5 * (m + m.adjoint());
    const auto eig = hermitian_eigenvalues(herm);
    d.min_eigenvalue = eig.empty() ? 0.0 : *std::min_element(eig.begin(), eig.end());
    return d;
}

struct unchecked_t {
    explicit unchecked_t() = default;
};
inline constexpr unchecked_t unchecked{};

// Density operator on a labeled tensor product of truncated subsystems.
// Subsystem order is row-major: the first label varies slowest.
class DensityMatrix {
public:
    DensityMatrix(CMatrix matrix, std::vector<std::size_t> dims, std::vector<std::string> labels)
        : DensityMatrix(unchecked, std::move(matrix), std::move(dims), std::move(labels)) {
        const auto d = diagnose(matrix_);
        if (!d.ok())
            throw InvalidState("density matrix violates invariants (hermiticity " +
                               std::to_string(d.hermiticity_error) + ", trace " +
                               std::to_string(d.trace_error) + ", min eigenvalue " +
                               std::to_string(d.min_eigenvalue) + ")");
    }

    // Skips the Hermitian/trace/PSD checks; for results that hold them by
    // construction. Shape checks still apply.
    DensityMatrix(unchecked_t, CMatrix matrix, std::vector<std::size_t> dims,
                  std::vector<std::string> labels)
        : matrix_(std::move(matrix)), dims_(std::move(dims)), labels_(std::move(labels)) {
        if (dims_.size() != labels_.size())
            throw InvalidState("dims and labels differ in length");
        if (matrix_.rows() != matrix_.cols())
            throw InvalidState("density matrix must be square");
        if (static_cast<std::size_t>(matrix_.rows()) != detail::product(dims_))
            throw InvalidState("subsystem dims do not multiply to the matrix size");
        for (std::size_t i = 0; i < labels_.size(); ++i)
            for (std::size_t j = i + 1; j < labels_.size(); ++j)
                if (labels_[i] == labels_[j]) throw DuplicateLabel("duplicate label " + labels_[i]);
    }

    static DensityMatrix pure(const FockVector& psi, std::string label = "mode") {
        const CVector& v = psi.amplitudes();
        return DensityMatrix(unchecked, v * v.adjoint(), {psi.dim()}, {std::move(label)});
    }

    static DensityMatrix pure(const CVector& psi, std::vector<std::size_t> dims,
                              std::vector<std::string> labels) {
        const double norm = psi.norm();
        if (std::abs(norm - 1.0) > 1e-10) throw InvalidState("state vector is not normalized");
        return DensityMatrix(unchecked, psi * psi.adjoint(), std::move(dims), std::move(labels));
    }

    // Diagonal state from populations (renormalized).
    static DensityMatrix diagonal(const std::vector<double>& populations, std::string label = "mode") {
        const double total = std::accumulate(populations.begin(), populations.end(), 0.0);
        if (!(total > 0.0)) throw InvalidState("populations must have positive sum");
        const auto n = static_cast<Eigen::Index>(populations.size());
        CMatrix m = CMatrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (populations[static_cast<std::size_t>(i)] < 0.0)
                throw InvalidState("negative population");
            m(i, i) = populations[static_cast<std::size_t>(i)] / total;
        }
        return DensityMatrix(unchecked, std::move(m), {populations.size()}, {std::move(label)});
    }

    const CMatrix& matrix() const noexcept { return matrix_; }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
    Complex operator()(std::size_t i, std::size_t j) const {
        return matrix_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    bool has_label(std::string_view label) const {
        return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
    }

    std::size_t position(std::string_view label) const {
        const auto it = std::find(labels_.begin(), labels_.end(), label);
        if (it == labels_.end()) throw UnknownLabel("unknown subsystem label '" + std::string(label) + "'");
        return static_cast<std::size_t>(it - labels_.begin());
    }

    std::size_t dim_of(std::string_view label) const { return dims_[position(label)]; }

    // Flat index of a multi-index given in label order.
    std::size_t flat_index(const std::vector<std::size_t>& multi) const {
        if (multi.size() != dims_.size()) throw DomainError("multi-index rank mismatch");
        std::size_t idx = 0;
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            if (multi[k] >= dims_[k]) throw DomainError("multi-index out of range");
            idx = idx * dims_[k] + multi[k];
        }
        return idx;
    }

    StateDiagnostics diagnostics() const { return diagnose(matrix_); }

private:
    CMatrix matrix_;
    std::vector<std::size_t> dims_;
    std::vector<std::string> labels_;
};

// Thermal (Bose-Einstein) populations p_n = nbar^n / (nbar+1)^(n+1),
// renormalized after truncation.
inline std::vector<double> thermal_populations(double nbar, const TruncationPolicy& policy) {
    policy.validate();
    if (!(nbar >= 0.0)) throw DomainError("thermal occupancy must be >= 0");
    const double tail = geometric_tail(nbar, policy.dim);
    if (tail > policy.tail_tolerance)
        throw TailTooHeavy("thermal state: tail mass " + std::to_string(tail) +
                               " above cutoff dim=" + std::to_string(policy.dim),
                           tail);
    std::vector<double> p(policy.dim, 0.0);
    const double ratio = nbar / (nbar + 1.0);
    double pn = 1.0 / (nbar + 1.0);
    for (auto& x : p) {
        x = pn;
        pn *= ratio;
    }
    const double kept = 1.0 - tail;
    for (auto& x : p) x /= kept;
    return p;
}

inline DensityMatrix thermal_state(double nbar, const TruncationPolicy& policy,
                                   std::string label = "mode") {
    return DensityMatrix::diagonal(thermal_populations(nbar, policy), std::move(label));
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    for (const auto& la : a.labels())
        if (b.has_label(la)) throw DuplicateLabel("label '" + la + "' appears in both factors");
    const auto na = static_cast<Eigen::Index>(a.size());
    const auto nb = static_cast<Eigen::Index>(b.size());
    CMatrix out(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < na; ++j) out.block(i * nb, j * nb, nb, nb) = a.matrix()(i, j) * b.matrix();
    auto dims = a.dims();
    dims.insert(dims.end(), b.dims().begin(), b.dims().end());
    auto labels = a.labels();
    labels.insert(labels.end(), b.labels().begin(), b.labels().end());
    return DensityMatrix(unchecked, std::move(out), std::move(dims), std::move(labels));
}

namespace detail {

// Splits every flat index into (kept-subsystem index, traced-subsystem index).
struct IndexSplit {
    std::vector<std::size_t> kept;
    std::vector<std::size_t> traced;
    std::size_t kept_size = 1;
    std::size_t traced_size = 1;
};

inline IndexSplit split_indices(const std::vector<std::size_t>& dims, const std::vector<bool>& keep) {
    IndexSplit s;
    for (std::size_t k = 0; k < dims.size(); ++k) (keep[k] ? s.kept_size : s.traced_size) *= dims[k];
    const std::size_t total = product(dims);
    s.kept.resize(total);
    s.traced.resize(total);
    std::vector<std::size_t> multi(dims.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t ki = 0, ti = 0;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            if (keep[k])
                ki = ki * dims[k] + multi[k];
            else
                ti = ti * dims[k] + multi[k];
        }
        s.kept[flat] = ki;
        s.traced[flat] = ti;
        for (std::size_t k = dims.size(); k-- > 0;) {
            if (++multi[k] < dims[k]) break;
            multi[k] = 0;
        }
    }
    return s;
}

}  // namespace detail

// Reduced state on the subsystems named in `keep`; kept subsystems retain
// their original relative order.
inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep) {
    std::vector<bool> mask(rho.dims().size(), false);
    for (const auto& label : keep) mask[rho.position(label)] = true;
    const auto split = detail::split_indices(rho.dims(), mask);
    CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(split.kept_size),
                                static_cast<Eigen::Index>(split.kept_size));
    const std::size_t n = rho.size();
    // Group flat indices by traced index so that only matching pairs are visited.
    std::vector<std::vector<std::size_t>> by_traced(split.traced_size);
    for (std::size_t i = 0; i < n; ++i) by_traced[split.traced[i]].push_back(i);
    for (const auto& group : by_traced)
        for (const auto i : group)
            for (const auto j : group)
                out(static_cast<Eigen::Index>(split.kept[i]), static_cast<Eigen::Index>(split.kept[j])) +=
                    rho.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    std::vector<std::size_t> dims;
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < mask.size(); ++k)
        if (mask[k]) {
            dims.push_back(rho.dims()[k]);
            labels.push_back(rho.labels()[k]);
        }
    return DensityMatrix(unchecked, std::move(out), std::move(dims), std::move(labels));
}

enum class LogBase { two, e };

// Shannon entropy of a probability list, same clamp and base rules as the
// von Neumann entropy.
inline double shannon_entropy(const std::vector<double>& probabilities, LogBase base = LogBase::two) {
    double s = 0.0;
    for (const double p : probabilities)
        if (p > kEntropyClamp) s -= p * std::log(p);
    return base == LogBase::two ? s / std::log(2.0) : s;
}

inline double von_neumann_entropy(const DensityMatrix& rho, LogBase base = LogBase::two) {
    const double s = shannon_entropy(hermitian_eigenvalues(rho.matrix()), base);
    return std::max(s, 0.0);
}

// Unread projective measurement of the listed modes in the Fock basis.
inline DensityMatrix dephase_fock_basis(const DensityMatrix& rho, const std::vector<std::string>& mode_labels) {
    std::vector<bool> mask(rho.dims().size(), false);
    for (const auto& label : mode_labels) {
        if (label == "qubit") throw DomainError("dephase_fock_basis acts on field modes, not the qubit");
        mask[rho.position(label)] = true;
    }
    const auto split = detail::split_indices(rho.dims(), mask);
    CMatrix out = rho.matrix();
    const auto n = static_cast<Eigen::Index>(rho.size());
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            if (split.kept[static_cast<std::size_t>(i)] != split.kept[static_cast<std::size_t>(j)])
                out(i, j) = Complex{};
    return DensityMatrix(unchecked, std::move(out), rho.dims(), rho.labels());
}

}  // namespace meascost

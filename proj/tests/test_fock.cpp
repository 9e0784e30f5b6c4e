#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "meascost/fock.hpp"
#include "oracles.hpp"

using namespace meascost;

namespace {

TruncationPolicy policy(std::size_t dim, double tol = 1e-10) { return {dim, tol}; }

DensityMatrix qubit_mixed() {
    CMatrix m = CMatrix::Identity(2, 2) / 2.0;
    return DensityMatrix(m, {2}, {"a"});
}

// Random pure/mixed states for the property checks.
DensityMatrix random_state(std::mt19937_64& rng, std::size_t dim, std::string label, std::size_t rank = 2) {
    std::normal_distribution<double> g;
    CMatrix a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rank));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = Complex{g(rng), g(rng)};
    CMatrix rho = a * a.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix(rho, {dim}, {std::move(label)});
}

}  // namespace

TEST(CoherentState, VacuumAtZeroAmplitude) {
    const auto psi = coherent_state(0.0, policy(8));
    EXPECT_EQ(psi.dim(), 8u);
    EXPECT_NEAR(std::abs(psi[0] - Complex{1.0}), 0.0, 1e-15);
    for (std::size_t n = 1; n < 8; ++n) EXPECT_EQ(psi[n], Complex{});
}

TEST(CoherentState, VacuumPopulationAtUnitAmplitude) {
    const auto psi = coherent_state(1.0, policy(16));
    EXPECT_NEAR(std::norm(psi[0]), std::exp(-1.0), 1e-9);
    EXPECT_NEAR(std::norm(psi[0]), 0.3679, 1e-4);
}

TEST(CoherentState, RejectsHeavyTail) {
    // P(N >= 4) for Poisson(4), by complement of the head sum.
    const double expected_tail = oracle::poisson_tail_by_complement(4.0, 4);
    EXPECT_NEAR(expected_tail, 0.567, 1e-3);
    try {
        coherent_state(2.0, policy(4, 0.1));
        FAIL() << "expected TailTooHeavy";
    } catch (const TailTooHeavy& e) {
        EXPECT_NEAR(e.tail_mass(), expected_tail, 1e-12);
    }
}

TEST(CoherentState, RecordsRenormalization) {
    const auto psi = coherent_state(Complex{0.5, 0.5}, policy(12));
    EXPECT_NEAR(psi.amplitudes().norm(), 1.0, 1e-14);
    EXPECT_NEAR(psi.renormalization(), 1.0 / std::sqrt(1.0 - psi.tail_mass()), 1e-12);
}

TEST(CoherentState, OverlapMatchesGaussianKernel) {
    const std::vector<Complex> amps = {0.0, 1.0, Complex{0.3, -1.2}, Complex{-1.4, 1.4}, 2.0, Complex{0.0, -2.0}};
    for (const auto a : amps)
        for (const auto b : amps) {
            const auto pa = coherent_state(a, policy(64));
            const auto pb = coherent_state(b, policy(64));
            EXPECT_NEAR(std::norm(overlap(pb, pa)), std::exp(-std::norm(b - a)), 1e-8);
        }
}

TEST(ThermalState, VacuumAtZeroOccupancy) {
    const auto rho = thermal_state(0.0, policy(6));
    EXPECT_NEAR(rho(0, 0).real(), 1.0, 1e-15);
    EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-15);
}

TEST(ThermalState, PopulationsMatchPFunctionIntegral) {
    const auto rho1 = thermal_state(1.0, policy(32, 1e-9));
    EXPECT_NEAR(rho1(0, 0).real(), oracle::thermal_population_from_p_function(1.0, 0), 1e-6);
    EXPECT_NEAR(rho1(1, 1).real(), oracle::thermal_population_from_p_function(1.0, 1), 1e-6);
    EXPECT_NEAR(rho1(0, 0).real(), 0.5, 1e-6);
    EXPECT_NEAR(rho1(1, 1).real(), 0.25, 1e-6);

    const auto rho_half = thermal_state(0.5, policy(32));
    EXPECT_NEAR(rho_half(0, 0).real(), oracle::thermal_population_from_p_function(0.5, 0), 1e-6);
    EXPECT_NEAR(rho_half(0, 0).real(), 2.0 / 3.0, 1e-6);
    for (int n = 2; n < 6; ++n)
        EXPECT_NEAR(rho_half(n, n).real(), oracle::thermal_population_from_p_function(0.5, n), 1e-6);
}

TEST(ThermalState, RejectsHeavyTail) {
    EXPECT_THROW(thermal_state(5.0, policy(8, 1e-6)), TailTooHeavy);
    EXPECT_THROW(thermal_state(-0.1, policy(8)), DomainError);
}

TEST(Truncation, DoublingCutoffMovesPopulationsLessThanTolerance) {
    const double tol = 1e-6;
    for (const double nbar : {0.2, 1.0, 3.0}) {
        const std::size_t dim = geometric_min_dim(nbar, tol);
        const auto a = thermal_state(nbar, policy(dim, tol));
        const auto b = thermal_state(nbar, policy(2 * dim, tol));
        for (std::size_t n = 0; n < dim; ++n) EXPECT_LT(std::abs(a(n, n).real() - b(n, n).real()), tol);
    }
    for (const double mean : {0.5, 2.0, 8.0}) {
        const std::size_t dim = poisson_min_dim(mean, tol);
        const auto a = coherent_state(std::sqrt(mean), policy(dim, tol));
        const auto b = coherent_state(std::sqrt(mean), policy(2 * dim, tol));
        for (std::size_t n = 0; n < dim; ++n) EXPECT_LT(std::abs(std::norm(a[n]) - std::norm(b[n])), tol);
    }
}

TEST(Truncation, PolicyValidation) {
    EXPECT_THROW(coherent_state(0.1, policy(0)), DomainError);
    EXPECT_THROW(coherent_state(0.1, policy(4, 0.0)), DomainError);
    EXPECT_THROW(coherent_state(0.1, policy(4, 1.0)), DomainError);
}

TEST(DensityMatrixInvariants, ConstructorRejectsInvalidMatrices) {
    CMatrix not_herm(2, 2);
    not_herm << 0.5, 0.1, 0.0, 0.5;
    EXPECT_THROW(DensityMatrix(not_herm, {2}, {"q"}), InvalidState);
    CMatrix bad_trace = CMatrix::Identity(2, 2);
    EXPECT_THROW(DensityMatrix(bad_trace, {2}, {"q"}), InvalidState);
    CMatrix negative(2, 2);
    negative << 1.2, 0.0, 0.0, -0.2;
    EXPECT_THROW(DensityMatrix(negative, {2}, {"q"}), InvalidState);
    EXPECT_THROW(DensityMatrix(CMatrix::Identity(2, 2) / 2.0, {3}, {"q"}), InvalidState);
    EXPECT_THROW(DensityMatrix(CMatrix::Identity(4, 4) / 4.0, {2, 2}, {"q", "q"}), DuplicateLabel);
}

TEST(Tensor, MaximallyMixedProduct) {
    auto a = qubit_mixed();
    auto b = DensityMatrix(CMatrix::Identity(2, 2) / 2.0, {2}, {"b"});
    const auto ab = tensor(a, b);
    EXPECT_EQ(ab.dims(), (std::vector<std::size_t>{2, 2}));
    EXPECT_EQ(ab.labels(), (std::vector<std::string>{"a", "b"}));
    EXPECT_NEAR((ab.matrix() - CMatrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Tensor, ProductOfProjectors) {
    const auto zero = DensityMatrix::pure(fock_state(0, 2), "a");
    const auto one = DensityMatrix::pure(fock_state(1, 2), "b");
    const auto ab = tensor(zero, one);
    const auto idx = ab.flat_index({0, 1});
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            EXPECT_EQ(ab(i, j), (i == idx && j == idx) ? Complex{1.0} : Complex{});
}

TEST(Tensor, ThermalWithVacuumInterleavesZeros) {
    const auto th = thermal_state(1.0, policy(32, 1e-9), "a");
    const auto vac = DensityMatrix::pure(fock_state(0, 2), "b");
    const auto joint = tensor(th, vac);
    for (std::size_t n = 0; n < 32; ++n) {
        EXPECT_EQ(joint(2 * n, 2 * n), th(n, n));
        EXPECT_EQ(joint(2 * n + 1, 2 * n + 1), Complex{});
    }
}

TEST(Tensor, DuplicateLabelRejected) {
    EXPECT_THROW(tensor(qubit_mixed(), qubit_mixed()), DuplicateLabel);
}

TEST(PartialTrace, RecoversFactorsOfProducts) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_state(rng, 3, "a");
        const auto b = random_state(rng, 4, "b", 3);
        const auto c = random_state(rng, 2, "c", 1);
        const auto abc = tensor(tensor(a, b), c);
        EXPECT_LT((partial_trace(abc, {"a"}).matrix() - a.matrix()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((partial_trace(abc, {"b"}).matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((partial_trace(abc, {"a", "c"}).matrix() - tensor(a, c).matrix()).cwiseAbs().maxCoeff(), 1e-12);
        // Kept order follows the original order, not the request order.
        EXPECT_EQ(partial_trace(abc, {"c", "a"}).labels(), (std::vector<std::string>{"a", "c"}));
        EXPECT_TRUE(partial_trace(abc, {"b", "c"}).diagnostics().ok());
    }
}

TEST(PartialTrace, BellStateGivesMaximallyMixed) {
    CVector bell = CVector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    const auto rho = DensityMatrix::pure(bell, {2, 2}, {"a", "b"});
    EXPECT_LT((partial_trace(rho, {"a"}).matrix() - CMatrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(partial_trace(rho, {"z"}), UnknownLabel);
}

TEST(Entropy, PureStatesHaveZeroEntropy) {
    EXPECT_NEAR(von_neumann_entropy(DensityMatrix::pure(coherent_state(1.3, policy(30)))), 0.0, 1e-9);
    CVector bell = CVector::Zero(4);
    bell(1) = bell(2) = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(von_neumann_entropy(DensityMatrix::pure(bell, {2, 2}, {"a", "b"})), 0.0, 1e-12);
}

TEST(Entropy, MaximallyMixedQubitIsOneBit) {
    EXPECT_NEAR(von_neumann_entropy(qubit_mixed()), 1.0, 1e-14);
    EXPECT_NEAR(von_neumann_entropy(qubit_mixed(), LogBase::e), std::log(2.0), 1e-14);
}

TEST(Entropy, ThermalStateMatchesClosedForm) {
    const auto rho = thermal_state(1.0, policy(64, 1e-12));
    EXPECT_NEAR(von_neumann_entropy(rho), oracle::thermal_entropy_bits(1.0), 1e-6);
    EXPECT_NEAR(von_neumann_entropy(rho), 2.0, 1e-6);
}

TEST(Entropy, ClampKeepsNumericalNegativesFinite) {
    CMatrix m = CMatrix::Zero(3, 3);
    m(0, 0) = 1.0 + 1e-13;
    m(1, 1) = -1e-13;
    const DensityMatrix rho(m, {3}, {"a"});
    EXPECT_TRUE(std::isfinite(von_neumann_entropy(rho)));
    EXPECT_NEAR(von_neumann_entropy(rho), 0.0, 1e-10);
}

TEST(Dephasing, DiagonalStateUnchanged) {
    const auto th = thermal_state(0.7, policy(20, 1e-3), "m");
    const auto d = dephase_fock_basis(th, {"m"});
    EXPECT_EQ(d.matrix(), th.matrix());
}

TEST(Dephasing, KeepsQubitCoherenceWithinFockBlock) {
    // (|g,0> + |e,1>)/sqrt(2) -> classical mixture; (|g,0> + |e,0>)/sqrt(2) unchanged.
    CVector v = CVector::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    const auto ent = DensityMatrix::pure(v, {2, 2}, {"qubit", "m"});
    const auto d = dephase_fock_basis(ent, {"m"});
    EXPECT_EQ(d(0, 3), Complex{});
    EXPECT_NEAR(d(0, 0).real(), 0.5, 1e-15);

    CVector w = CVector::Zero(4);
    w(0) = w(2) = 1.0 / std::sqrt(2.0);
    const auto prod = DensityMatrix::pure(w, {2, 2}, {"qubit", "m"});
    EXPECT_EQ(dephase_fock_basis(prod, {"m"}).matrix(), prod.matrix());

    EXPECT_THROW(dephase_fock_basis(prod, {"qubit"}), DomainError);
    EXPECT_THROW(dephase_fock_basis(prod, {"other"}), UnknownLabel);
}

TEST(Dephasing, NeverDecreasesEntropy) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto q = random_state(rng, 2, "qubit", 1 + trial % 2);
        const auto m1 = random_state(rng, 3, "m1", 1 + trial % 3);
        const auto m2 = random_state(rng, 2, "m2", 1);
        // Entangle by mixing two random product states with a random pure joint state.
        std::normal_distribution<double> g;
        CVector psi(12);
        for (Eigen::Index i = 0; i < 12; ++i) psi(i) = Complex{g(rng), g(rng)};
        psi.normalize();
        const CMatrix mixed = 0.5 * tensor(tensor(q, m1), m2).matrix() + 0.5 * psi * psi.adjoint();
        const DensityMatrix rho(mixed, {2, 3, 2}, {"qubit", "m1", "m2"});
        const auto d = dephase_fock_basis(rho, {"m1", "m2"});
        EXPECT_TRUE(d.diagnostics().ok());
        EXPECT_GE(von_neumann_entropy(d), von_neumann_entropy(rho) - 1e-10);
        EXPECT_NEAR(d.matrix().trace().real(), 1.0, 1e-12);
    }
}

TEST(BlockEigenvalues, MatchesDenseSolver) {
    std::mt19937_64 rng(3);
    const auto a = random_state(rng, 3, "a");
    const auto b = random_state(rng, 4, "b");
    const auto ab = dephase_fock_basis(tensor(a, b), {"b"});
    auto blocked = hermitian_eigenvalues(ab.matrix());
    Eigen::SelfAdjointEigenSolver<CMatrix> dense(ab.matrix());
    std::vector<double> full(dense.eigenvalues().data(), dense.eigenvalues().data() + dense.eigenvalues().size());
    std::sort(blocked.begin(), blocked.end());
    ASSERT_EQ(blocked.size(), full.size());
    for (std::size_t i = 0; i < full.size(); ++i) EXPECT_NEAR(blocked[i], full[i], 1e-12);
}

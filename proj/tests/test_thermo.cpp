#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "meascost/thermo.hpp"
#include "oracles.hpp"

using namespace meascost;

namespace {

constexpr std::size_t kDim = 32;
const TruncationPolicy kPolicy{kDim, 1e-10};

constexpr std::size_t G = 0, E = 1;

double poisson(double mean, std::size_t k) {
    return std::exp(-mean + static_cast<double>(k) * std::log(mean) - std::lgamma(static_cast<double>(k) + 1.0));
}

double geometric(double nbar, std::size_t k) { return std::pow(nbar, static_cast<double>(k)) / std::pow(1.0 + nbar, k + 1.0); }

// Joint states after the unread Fock measurement, written out term by term
// from the textbook expressions (qubit index first, then the field).
CMatrix single_photon_closed_form(double theta, std::size_t d) {
    CMatrix rho = CMatrix::Zero(2 * d, 2 * d);
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    const double amp[2] = {1.0, c};  // (|e> cos + |g>) on |0>
    for (std::size_t a : {G, E})
        for (std::size_t b : {G, E}) rho(a * d, b * d) += amp[a] * amp[b] / 2.0;
    rho(E * d + 1, E * d + 1) += s * s / 2.0;
    return rho;
}

CMatrix coherent_closed_form(double alpha, std::size_t d) {
    CMatrix rho = CMatrix::Zero(2 * d, 2 * d);
    const double amp[2] = {std::exp(-alpha * alpha / 2.0), 1.0};  // (|e> + |g> e^{-|a|^2/2}) on |0>
    for (std::size_t a : {G, E})
        for (std::size_t b : {G, E}) rho(a * d, b * d) += amp[a] * amp[b] / 2.0;
    for (std::size_t k = 1; k < d; ++k) rho(G * d + k, G * d + k) += poisson(alpha * alpha, k) / 2.0;
    return rho;
}

CMatrix thermal_closed_form(double nbar_mode, std::size_t d) {
    const std::size_t f = d * d;
    CMatrix rho = CMatrix::Zero(2 * f, 2 * f);
    auto idx = [&](std::size_t q, std::size_t ne, std::size_t ng) { return q * f + ne * d + ng; };
    const double p0 = geometric(nbar_mode, 0);
    for (std::size_t a : {G, E})
        for (std::size_t b : {G, E}) rho(idx(a, 0, 0), idx(b, 0, 0)) += (p0 + p0) / 4.0;
    for (std::size_t n = 1; n < d; ++n) {
        const double p = geometric(nbar_mode, n);
        rho(idx(E, n, 0), idx(E, n, 0)) += p / 4.0;
        rho(idx(G, 0, 0), idx(G, 0, 0)) += p / 4.0;
        rho(idx(E, 0, 0), idx(E, 0, 0)) += p / 4.0;
        rho(idx(G, 0, n), idx(G, 0, n)) += p / 4.0;
    }
    return rho;
}

// Entropies of the three dephased states from their block structure, with
// untruncated photon distributions.
struct Entropies {
    double s_q, s_f, s_tot;
    double info() const { return s_q + s_f - s_tot; }
};

Entropies single_photon_entropies(double n) {
    const double c2 = 1.0 - n, s2 = n;
    const double c = std::sqrt(c2);
    const double joint = oracle::shannon_bits({(1.0 + c2) / 2.0, s2 / 2.0});
    return {oracle::entropy_2x2_bits(0.5, 0.5, c / 2.0), joint, joint};
}

Entropies coherent_entropies(double n) {
    std::vector<double> p = {(1.0 + std::exp(-n)) / 2.0};
    for (std::size_t k = 1; k < 400; ++k) p.push_back(poisson(n, k) / 2.0);
    const double joint = oracle::shannon_bits(p);
    return {oracle::entropy_2x2_bits(0.5, 0.5, std::exp(-n / 2.0) / 2.0), joint, joint};
}

Entropies thermal_entropies(double n) {
    const double nbar = n / 2.0;
    const double p0 = geometric(nbar, 0);
    std::vector<double> tot = {p0 + (1.0 - p0) / 4.0, (1.0 - p0) / 4.0};
    std::vector<double> field = {p0 + (1.0 - p0) / 2.0};
    for (std::size_t k = 1; k < 400; ++k) {
        const double q = geometric(nbar, k) / 4.0;
        tot.insert(tot.end(), {q, q});
        field.insert(field.end(), {q, q});
    }
    return {oracle::entropy_2x2_bits(0.5, 0.5, p0 / 2.0), oracle::shannon_bits(field), oracle::shannon_bits(tot)};
}

Entropies oracle_for(SourceFamily f, double n) {
    switch (f) {
        case SourceFamily::coherent: return coherent_entropies(n);
        case SourceFamily::thermal: return thermal_entropies(n);
        case SourceFamily::single_photon: return single_photon_entropies(n);
    }
    return {};
}

const SourceFamily kFamilies[] = {SourceFamily::coherent, SourceFamily::thermal, SourceFamily::single_photon};

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(PostMeasurementState, MatchesClosedFormTranscriptions) {
    for (const double n : {0.0, 0.1, 0.5, 1.0}) {
        const double theta = 2.0 * std::asin(std::sqrt(n));
        EXPECT_LT(max_abs(post_measurement_state(SinglePhoton{theta}, kPolicy).matrix() -
                          single_photon_closed_form(theta, kDim)),
                  1e-10);
        EXPECT_LT(max_abs(post_measurement_state(Coherent{std::sqrt(n)}, kPolicy).matrix() -
                          coherent_closed_form(std::sqrt(n), kDim)),
                  1e-10);
        EXPECT_LT(max_abs(post_measurement_state(Thermal{n / 2.0}, kPolicy).matrix() - thermal_closed_form(n / 2.0, kDim)),
                  1e-10);
    }
}

TEST(PostMeasurementState, ZeroLightIsProductOfPlusAndVacuum) {
    const auto expected = tensor(plus_state(), DensityMatrix::pure(fock_state(0, kDim), "cavity"));
    for (const SourceSpec s : {SourceSpec{SinglePhoton{0.0}}, SourceSpec{Coherent{0.0}}}) {
        const auto rho = post_measurement_state(s, kPolicy);
        EXPECT_LT(max_abs(rho.matrix() - expected.matrix()), 1e-15);
        EXPECT_NEAR(mutual_information(rho), 0.0, 1e-12);
        EXPECT_NEAR(field_entropy(rho), 0.0, 1e-12);
    }
}

TEST(ReducedField, CoherentAndThermalDiagonals) {
    const double n = 0.6;
    const auto coh = partial_trace(post_measurement_state(Coherent{std::sqrt(n)}, kPolicy), {"cavity"});
    EXPECT_NEAR(coh(0, 0).real(), (1.0 + std::exp(-n)) / 2.0, 1e-12);
    for (std::size_t k = 1; k < 6; ++k) EXPECT_NEAR(coh(k, k).real(), poisson(n, k) / 2.0, 1e-12);

    const auto th = partial_trace(post_measurement_state(Thermal{n / 2.0}, kPolicy), {"mode_e", "mode_g"});
    const double p0 = geometric(n / 2.0, 0);
    EXPECT_NEAR(th(0, 0).real(), p0 + (1.0 - p0) / 2.0, 1e-12);
    for (std::size_t k = 1; k < 6; ++k) {
        EXPECT_NEAR(th(k * kDim, k * kDim).real(), geometric(n / 2.0, k) / 4.0, 1e-12);
        EXPECT_NEAR(th(k, k).real(), geometric(n / 2.0, k) / 4.0, 1e-12);
        EXPECT_EQ(th(k * kDim + k, k * kDim + k), 0.0);
    }
    EXPECT_LT(max_abs(th.matrix() - CMatrix(th.matrix().diagonal().asDiagonal())), 1e-15);
}

TEST(MutualInformation, AgreesWithBlockOracle) {
    for (const auto fam : kFamilies)
        for (const double n : {0.05, 0.2, 0.5, 1.0}) {
            const auto r = info_report(fam, n, kPolicy, 0.01);
            const auto o = oracle_for(fam, n);
            EXPECT_NEAR(r.s_qubit, o.s_q, 1e-9) << family_name(fam) << " " << n;
            EXPECT_NEAR(r.s_field, o.s_f, 1e-9) << family_name(fam) << " " << n;
            EXPECT_NEAR(r.s_total, o.s_tot, 1e-9) << family_name(fam) << " " << n;
            EXPECT_NEAR(r.mutual_info, r.s_qubit + r.s_field - r.s_total, 1e-12);
        }
}

TEST(MutualInformation, FullSinglePhotonReadoutIsOneBit) {
    const auto rho = post_measurement_state(SinglePhoton{std::numbers::pi}, kPolicy);
    EXPECT_NEAR(mutual_information(rho), 1.0, 1e-9);
    EXPECT_NEAR(field_entropy(rho), 1.0, 1e-9);
    EXPECT_LT(mutual_information(post_measurement_state(Coherent{1.0}, kPolicy)), 1.0);
}

TEST(MutualInformation, ProductStateCarriesNone) {
    const auto rho = tensor(plus_state(), thermal_state(0.7, kPolicy, "cavity"));
    EXPECT_NEAR(mutual_information(rho), 0.0, 1e-10);
    EXPECT_THROW(mutual_information(thermal_state(0.7, kPolicy, "cavity")), UnknownLabel);
    EXPECT_THROW(field_entropy(plus_state()), UnknownLabel);
}

TEST(MutualInformation, BoundedAndBelowFieldEntropy) {
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(0.1 * i);
    for (const auto fam : kFamilies)
        for (const auto& r : efficiency_scan(fam, grid, kPolicy)) {
            EXPECT_GE(r.mutual_info, -1e-9);
            EXPECT_LE(r.mutual_info, 2.0);
            EXPECT_GE(r.s_field, r.mutual_info - 1e-9) << family_name(fam) << " " << r.n_cav;
        }
}

TEST(EfficiencyScan, SinglePhotonDominatesInformation) {
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(0.1 * i);
    const auto sp = efficiency_scan(SourceFamily::single_photon, grid, kPolicy);
    const auto co = efficiency_scan(SourceFamily::coherent, grid, kPolicy);
    const auto th = efficiency_scan(SourceFamily::thermal, grid, kPolicy);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_GT(sp[i].mutual_info, co[i].mutual_info);
        EXPECT_GT(sp[i].mutual_info, th[i].mutual_info);
    }
    EXPECT_NEAR(sp.back().s_field - sp.back().mutual_info, 0.0, 1e-9);
}

TEST(EfficiencyScan, CoherentFieldEntropyExceedsThermalAtSmallN) {
    const auto co = info_report(SourceFamily::coherent, 0.2, kPolicy, 0.01);
    const auto th = info_report(SourceFamily::thermal, 0.2, kPolicy, 0.01);
    EXPECT_GT(co.s_field, th.s_field);
    EXPECT_GT(coherent_entropies(0.2).s_f, thermal_entropies(0.2).s_f);
}

TEST(EfficiencyScan, ZeroPhotonsGiveZeroReport) {
    for (const auto fam : kFamilies) {
        const auto r = efficiency_scan(fam, {0.0}, kPolicy).front();
        EXPECT_NEAR(r.s_field, 0.0, 1e-12);
        EXPECT_NEAR(r.s_total, 0.0, 1e-12);
        EXPECT_NEAR(r.mutual_info, 0.0, 1e-12);
        EXPECT_NEAR(r.erasure_cost, 0.0, 1e-40);
    }
    EXPECT_THROW(efficiency_scan(SourceFamily::single_photon, {0.5, 1.2}, kPolicy), DomainError);
}

TEST(EfficiencyScan, TruncationStability) {
    const TruncationPolicy coarse{16, 1e-6}, fine{32, 1e-6};
    for (const auto fam : kFamilies)
        for (const double n : {0.3, 1.0}) {
            const auto a = info_report(fam, n, coarse, 0.01);
            const auto b = info_report(fam, n, fine, 0.01);
            EXPECT_LT(std::abs(a.mutual_info - b.mutual_info), 1e-6);
            EXPECT_LT(std::abs(a.s_field - b.s_field), 1e-6);
        }
}

TEST(EfficiencyScan, CsvHasExpectedColumns) {
    const auto t = info_table(efficiency_scan(SourceFamily::coherent, {0.0, 0.5}, kPolicy));
    EXPECT_EQ(t.columns, (std::vector<std::string>{"family", "n_cav", "S_f_bits", "S_q_bits", "S_tot_bits", "I_bits",
                                                   "erasure_cost_J"}));
    const auto text = csv::render(t, "abc");
    EXPECT_EQ(text.rfind("# config_hash: abc\nfamily,n_cav,", 0), 0u);
    EXPECT_NE(text.find("\ncoherent,0.5,"), std::string::npos);
}

TEST(ErasureCost, Values) {
    EXPECT_EQ(erasure_cost(0.0, 0.01), 0.0);
    EXPECT_NEAR(erasure_cost(1.0, 0.01), 9.57e-26, 0.005e-26);
    EXPECT_NEAR(erasure_cost(1.0, 0.01), 1.380649e-23 * 0.01 * std::log(2.0), 1e-40);
    EXPECT_DOUBLE_EQ(erasure_cost(2.0, 0.05), 2.0 * erasure_cost(1.0, 0.05));
    EXPECT_THROW(erasure_cost(1.0, 0.0), DomainError);
}

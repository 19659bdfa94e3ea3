#include <random>

#include <gtest/gtest.h>

#include <qdl/discrimination.hpp>

#include "oracles.hpp"

using namespace qdl;

namespace {

DensityMatrix pure_density(const std::array<cplx, 2>& ket) { return DensityMatrix(projector(ket)); }

DensityMatrix qubit_density(double r, std::array<double, 3> dir) { return DensityMatrix(QubitState(r, dir).matrix()); }

} // namespace

TEST(Helstrom, TrivialCases)
{
    const auto up = pure_density({1.0, 0.0}), down = pure_density({0.0, 1.0});
    EXPECT_NEAR(helstrom_error({up, down, 0.5}), 0.0, 1e-15);
    for (double eta : {0.2, 0.5, 0.9})
        EXPECT_NEAR(helstrom_error({up, up, eta}), std::min(eta, 1 - eta), 1e-15);
}

TEST(Helstrom, PureStatesMatchOverlapFormula)
{
    for (double c : {0.0, 0.2, 0.5, 0.7, 0.95, 1.0})
        for (double eta : {0.1, 0.5, 0.8}) {
            const auto psi = pure_qubit_pair(c);
            const double dense = helstrom_error({pure_density(psi[0]), pure_density(psi[1]), eta});
            EXPECT_NEAR(dense, pure_overlap_error(c, eta), 1e-12);
        }
    EXPECT_NEAR(pure_overlap_error(0.7, 0.5), (1 - std::sqrt(0.51)) / 2, 1e-15);
    EXPECT_NEAR(pure_overlap_error(0.5, 0.5), (1 - std::sqrt(3.0) / 2) / 2, 1e-15);
    EXPECT_NEAR(pure_overlap_error(1.0, 0.5), 0.5, 1e-15);
    EXPECT_EQ(pure_overlap_error(0.0, 0.5), 0.0);
    EXPECT_THROW(pure_overlap_error(1.2, 0.5), DomainError);
}

TEST(Helstrom, PriorSymmetry)
{
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const auto a = qubit_density(u(gen), {0, 0, 1});
        const auto b = qubit_density(u(gen), {std::sin(1.0), 0, std::cos(1.0)});
        const double eta = u(gen);
        EXPECT_NEAR(helstrom_error({a, b, eta}), helstrom_error({b, a, 1 - eta}), 1e-13);
    }
}

TEST(Helstrom, DimensionMismatch)
{
    const auto q = qubit_density(0.5, {0, 0, 1});
    const DensityMatrix big(ComplexMatrix::identity(3) * cplx(1.0 / 3.0));
    EXPECT_THROW(BinaryHypotheses(q, big, 0.5), DomainError);
}

TEST(Unambiguous, Branches)
{
    EXPECT_NEAR(unambiguous_q(0.5, 0.5), 0.5, 1e-15);
    for (double c : {0.0, 0.3, 0.9}) {
        EXPECT_NEAR(unambiguous_q(c, 0.5), c, 1e-15);
        EXPECT_EQ(unambiguous_q(0.0, 0.1 + c / 2), 0.0);
    }
    const double c = 0.6;
    const double low = c * c / (1 + c * c);
    EXPECT_NEAR(unambiguous_q(c, 0.5 * low), 0.5 * low + (1 - 0.5 * low) * c * c, 1e-15);
    const double mid = 0.4;
    EXPECT_NEAR(unambiguous_q(c, mid), 2 * std::sqrt(mid * (1 - mid)) * c, 1e-15);
    EXPECT_NEAR(unambiguous_q(c, 1 - 0.5 * low), (1 - 0.5 * low) * c * c + 0.5 * low, 1e-15);
}

TEST(Margins, WeakEndpoints)
{
    for (double c = 0.0; c <= 1.0; c += 0.05) {
        EXPECT_NEAR(weak_margin(c, 0.0).p_success, 1 - unambiguous_q(c, 0.5), 1e-14);
        const double rc = critical_margin(c);
        const auto at = weak_margin(c, std::min(1.0, rc + 0.01));
        EXPECT_NEAR(at.p_success, 0.5 * (1 + std::sqrt(1 - c * c)), 1e-14);
        EXPECT_NEAR(at.p_inconclusive, 0.0, 1e-14);
    }
    EXPECT_NEAR(critical_margin(0.7), 0.142928579, 1e-9);
}

TEST(Margins, ProbabilitiesSumToOneAndMonotone)
{
    for (auto scheme : {MarginScheme::weak, MarginScheme::strong})
        for (double c : {0.1, 0.4, 0.7, 0.99}) {
            double prev = -1.0;
            for (double r = 0.0; r <= 0.5; r += 0.01) {
                const auto m = margin(c, r, scheme);
                EXPECT_NEAR(m.p_success + m.p_error + m.p_inconclusive, 1.0, 1e-12);
                EXPECT_GE(m.p_success, prev - 1e-14);
                prev = m.p_success;
            }
        }
}

TEST(Margins, StrongMeetsWeakAtExtremes)
{
    for (double c : {0.2, 0.5, 0.7, 0.9}) {
        EXPECT_NEAR(strong_margin(c, 0.0).p_success, weak_margin(c, 0.0).p_success, 1e-14);
        const double rc = critical_margin(c);
        EXPECT_NEAR(strong_margin(c, rc).p_success, weak_margin(c, rc).p_success, 1e-12);
        EXPECT_NEAR(*strong_margin(c, rc).phi, *weak_margin(c, rc).phi, 1e-9);
        EXPECT_NEAR(*strong_margin(c, 0.0).phi, *weak_margin(c, 0.0).phi, 1e-9);
    }
}

TEST(Margins, StrongConversionReproducesWeak)
{
    for (double c : {0.3, 0.7})
        for (double rw = 0.0; rw < critical_margin(c); rw += 0.01) {
            const double rs = weak_to_strong_margin(c, rw);
            EXPECT_NEAR(strong_margin(c, rs).p_success, weak_margin(c, rw).p_success, 1e-10);
            // the strong margin is the conditional error rate among conclusive answers
            const auto w = weak_margin(c, rw);
            EXPECT_NEAR(rs, w.p_error / (w.p_error + w.p_success), 1e-12);
        }
}

TEST(Margins, IdenticalStatesLeaveAngleUndetermined)
{
    const auto m = strong_margin(1.0, 0.2);
    EXPECT_FALSE(m.phi.has_value());
    EXPECT_NEAR(m.p_success + m.p_error + m.p_inconclusive, 1.0, 1e-12);
    EXPECT_THROW(weak_margin(0.5, 1.5), DomainError);
}

TEST(Confidence, RangeAndLimits)
{
    for (auto scheme : {MarginScheme::weak, MarginScheme::strong})
        for (double c : {0.2, 0.7})
            for (double r = 0.0; r <= 0.3; r += 0.05) {
                const double conf = confidence(c, r, scheme);
                EXPECT_GE(conf, 0.5 - 1e-12);
                EXPECT_LE(conf, 1.0 + 1e-12);
            }
    EXPECT_NEAR(confidence(0.7, 0.0, MarginScheme::weak), 1.0, 1e-14);
    EXPECT_THROW(confidence(1.0, 0.0, MarginScheme::weak), DomainError);
}

TEST(Chernoff, Classical)
{
    const std::vector<double> p{0.5, 0.5}, q{0.9, 0.1}, disjoint_a{1.0, 0.0}, disjoint_b{0.0, 1.0};
    EXPECT_NEAR(chernoff_classical(p, p), 0.0, 1e-12);
    EXPECT_TRUE(std::isinf(chernoff_classical(disjoint_a, disjoint_b)));
    double best = 1e300;
    for (int i = 0; i <= 200000; ++i) {
        const double s = i / 200000.0;
        best = std::min(best, std::pow(0.5, s) * std::pow(0.9, 1 - s) + std::pow(0.5, s) * std::pow(0.1, 1 - s));
    }
    EXPECT_NEAR(chernoff_classical(p, q), -std::log(best), 1e-8);
    const std::vector<double> bad{0.5, 0.6};
    EXPECT_THROW(chernoff_classical(bad, p), DomainError);
}

TEST(Chernoff, Quantum)
{
    const auto a = qubit_density(0.6, {0, 0, 1});
    EXPECT_NEAR(chernoff_quantum(a, a), 0.0, 1e-10);
    for (double c : {0.2, 0.5, 0.9}) {
        const auto psi = pure_qubit_pair(c);
        EXPECT_NEAR(chernoff_quantum(pure_density(psi[0]), pure_density(psi[1])), -std::log(c * c), 1e-9);
    }
    // commuting states reduce to their spectra
    const auto b = qubit_density(0.2, {0, 0, -1});
    const std::vector<double> pa{0.8, 0.2}, pb{0.4, 0.6};
    EXPECT_NEAR(chernoff_quantum(a, b), chernoff_classical(pa, pb), 1e-9);
}

TEST(Multicopy, PureAndSingleCopy)
{
    const auto psi = pure_qubit_pair(0.8);
    const double t = std::acos(0.8);
    const QubitState q1(1.0, {std::sin(t / 2) * 2 * std::cos(t / 2), 0, std::cos(t)});
    const QubitState q2(1.0, {-std::sin(t / 2) * 2 * std::cos(t / 2), 0, std::cos(t)});
    EXPECT_NEAR(multicopy_error(q1, q2, 0.5, 3), (1 - std::sqrt(1 - std::pow(0.8, 6))) / 2, 1e-12);
    const QubitState m1(0.5, {0, 0, 1}), m2(0.7, {1, 0, 0});
    EXPECT_NEAR(multicopy_error(m1, m2, 0.3, 1),
                helstrom_error({DensityMatrix(m1.matrix()), DensityMatrix(m2.matrix()), 0.3}), 1e-13);
    (void)psi;
}

TEST(Multicopy, MatchesDenseTensorPower)
{
    const QubitState q1(0.5, {0, 0, 1}), q2(0.5, {std::sin(1.2), 0, std::cos(1.2)});
    for (int n = 1; n <= 8; ++n) {
        const auto r1 = oracle::tensor_power(oracle::to_eigen(q1.matrix()), n);
        const auto r2 = oracle::tensor_power(oracle::to_eigen(q2.matrix()), n);
        const double dense = 0.5 * (1 - oracle::trace_norm(0.4 * r1 - 0.6 * r2));
        EXPECT_NEAR(multicopy_error(q1, q2, 0.4, n), dense, 1e-9) << n;
    }
}

TEST(Multicopy, DecayRateApproachesChernoff)
{
    // The slope carries a polynomial prefactor correction, so it converges
    // from above and only well separated states are close at 16 copies.
    auto slope_gap = [](double r, double angle, int copies) {
        const QubitState q1(r, {0, 0, 1}), q2(r, {std::sin(angle), 0, std::cos(angle)});
        const double distance = chernoff_quantum(DensityMatrix(q1.matrix()), DensityMatrix(q2.matrix()));
        const double slope =
            std::log(multicopy_error(q1, q2, 0.5, copies)) - std::log(multicopy_error(q1, q2, 0.5, copies - 1));
        return std::abs(-slope - distance) / distance;
    };
    for (double r : {0.95, 1.0})
        EXPECT_LT(slope_gap(r, M_PI / 2, 16), 0.10) << r;
    for (double angle : {0.3, 0.8, M_PI / 2})
        EXPECT_LT(slope_gap(0.9, angle, 40), slope_gap(0.9, angle, 16));
    const QubitState q1(0.9, {0, 0, 1}), q2(0.9, {std::sin(0.8), 0, std::cos(0.8)});
    double prev = 1.0;
    for (int n = 1; n <= 16; ++n) {
        const double pe = multicopy_error(q1, q2, 0.5, n);
        EXPECT_LT(pe, prev);
        prev = pe;
    }
}

TEST(Compare, Limits)
{
    for (double eta : {0.3, 0.5}) {
        const double same = eta * eta + (1 - eta) * (1 - eta);
        EXPECT_NEAR(compare_error(1.0, eta), std::min(same, 1 - same), 1e-12);
    }
    // orthogonal inputs make all four product states orthogonal
    EXPECT_NEAR(compare_error(0.0, 0.5), 0.0, 1e-12);
    EXPECT_GT(compare_error(0.5, 0.5), compare_error(0.0, 0.5));
}

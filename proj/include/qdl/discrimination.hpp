#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "angular.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "numeric.hpp"

namespace qdl {

namespace detail {

inline void check_unit(double x, const char* name)
{
    if (!(x >= 0.0 && x <= 1.0))
        throw DomainError(std::string(name) + " must lie in [0, 1]");
}

} // namespace detail

struct BinaryHypotheses {
    DensityMatrix rho1;
    DensityMatrix rho2;
    double eta1;

    BinaryHypotheses(DensityMatrix a, DensityMatrix b, double prior1)
        : rho1(std::move(a)), rho2(std::move(b)), eta1(prior1)
    {
        if (rho1.dim() != rho2.dim())
            throw DomainError("hypotheses have different dimensions");
        detail::check_unit(eta1, "prior");
    }
    double eta2() const { return 1.0 - eta1; }
};

// Minimum error probability for two known states.
inline double helstrom_error(const BinaryHypotheses& h)
{
    const ComplexMatrix gamma = h.eta1 * h.rho1.matrix() - h.eta2() * h.rho2.matrix();
    return 0.5 * (1.0 - trace_norm(gamma));
}

inline double pure_overlap_error(double c, double eta1)
{
    detail::check_unit(c, "overlap");
    detail::check_unit(eta1, "prior");
    const double disc = std::max(0.0, 1.0 - 4.0 * eta1 * (1.0 - eta1) * c * c);
    return 0.5 * (1.0 - std::sqrt(disc));
}

// Optimal inconclusive rate for error-free identification of two pure states.
inline double unambiguous_q(double c, double eta1)
{
    detail::check_unit(c, "overlap");
    detail::check_unit(eta1, "prior");
    const double eta2 = 1.0 - eta1, c2 = c * c;
    if (eta1 < c2 / (1.0 + c2))
        return eta1 + eta2 * c2;
    if (eta1 > 1.0 / (1.0 + c2))
        return eta1 * c2 + eta2;
    return 2.0 * std::sqrt(eta1 * eta2) * c;
}

enum class Regime { margin_limited, minimum_error };
enum class MarginScheme { weak, strong };

struct MarginResult {
    double p_success = 0.0;
    double p_error = 0.0;
    double p_inconclusive = 0.0;
    std::optional<double> phi; // empty when the measurement angle is not determined
    Regime regime = Regime::margin_limited;
};

// Margin at which the optimal measurement stops having an inconclusive outcome.
inline double critical_margin(double c)
{
    detail::check_unit(c, "overlap");
    return 0.5 * (1.0 - std::sqrt(1.0 - c * c));
}

inline MarginResult weak_margin(double c, double r)
{
    detail::check_unit(c, "overlap");
    detail::check_unit(r, "margin");
    const double rc = critical_margin(c);
    MarginResult out;
    if (r < rc) {
        const double a = std::sqrt(r) + std::sqrt(1.0 - c);
        out.p_success = a * a;
        out.p_error = r;
        out.p_inconclusive = std::max(0.0, 1.0 - out.p_success - out.p_error);
        out.phi = 2.0 * std::atan2(std::sqrt(1.0 + c), std::sqrt(1.0 - c) + 2.0 * std::sqrt(r));
        out.regime = Regime::margin_limited;
    } else {
        out.p_success = 0.5 * (1.0 + std::sqrt(1.0 - c * c));
        out.p_error = rc;
        out.p_inconclusive = 0.0;
        out.phi = std::numbers::pi / 2;
        out.regime = Regime::minimum_error;
    }
    return out;
}

inline MarginResult strong_margin(double c, double r)
{
    detail::check_unit(c, "overlap");
    detail::check_unit(r, "margin");
    const double rc = critical_margin(c);
    MarginResult out;
    if (r < rc) {
        const double sr = std::sqrt(r), sq = std::sqrt(1.0 - r);
        const double ratio = sq / (sr - sq);
        out.p_success = ratio * ratio * (1.0 - c);
        out.p_error = r * out.p_success / (1.0 - r);
        out.p_inconclusive = std::max(0.0, 1.0 - out.p_success - out.p_error);
        if (c < 1.0)
            out.phi = 2.0 * std::atan((sq - sr) / (sq + sr) * std::sqrt((1.0 + c) / (1.0 - c)));
        out.regime = Regime::margin_limited;
    } else {
        out.p_success = 0.5 * (1.0 + std::sqrt(1.0 - c * c));
        out.p_error = rc;
        out.p_inconclusive = 0.0;
        out.phi = std::numbers::pi / 2;
        out.regime = Regime::minimum_error;
    }
    return out;
}

inline MarginResult margin(double c, double r, MarginScheme scheme)
{
    return scheme == MarginScheme::weak ? weak_margin(c, r) : strong_margin(c, r);
}

// Strong margin equivalent to a weak one: the conditional error given a conclusive answer.
inline double weak_to_strong_margin(double c, double r_weak)
{
    const auto w = weak_margin(c, r_weak);
    const double conclusive = w.p_success + w.p_error;
    if (conclusive <= 0.0)
        throw DomainError("no conclusive outcomes at this margin");
    return w.p_error / conclusive;
}

// Probability of being right given a conclusive answer.
inline double confidence(double c, double r, MarginScheme scheme)
{
    const auto m = margin(c, r, scheme);
    const double conclusive = 1.0 - m.p_inconclusive;
    if (conclusive <= 0.0 || m.p_success + m.p_error <= 0.0)
        throw DomainError("confidence undefined: every outcome is inconclusive");
    return m.p_success / (m.p_success + m.p_error);
}

namespace detail {

// x^s with 0^s = 0 for s > 0 and x^0 the support indicator.
inline double support_pow(double x, double s)
{
    if (x <= 0.0)
        return 0.0;
    if (s == 0.0)
        return 1.0;
    return std::pow(x, s);
}

inline double chernoff_from_objective(const std::function<double(double)>& f, bool disjoint)
{
    if (disjoint)
        return std::numeric_limits<double>::infinity();
    const auto best = golden_section_min(f, 0.0, 1.0, 1e-10);
    if (best.value <= 0.0)
        return std::numeric_limits<double>::infinity();
    return std::max(0.0, -std::log(best.value));
}

} // namespace detail

inline double chernoff_classical(std::span<const double> p1, std::span<const double> p2)
{
    if (p1.size() != p2.size())
        throw DomainError("probability vectors differ in length");
    for (auto p : {p1, p2}) {
        double s = 0.0;
        for (double x : p) {
            if (x < 0.0)
                throw DomainError("negative probability");
            s += x;
        }
        if (std::abs(s - 1.0) > 1e-9)
            throw DomainError("probability vector is not normalized");
    }
    bool disjoint = true;
    for (std::size_t i = 0; i < p1.size(); ++i)
        if (p1[i] > 0.0 && p2[i] > 0.0)
            disjoint = false;
    auto f = [&](double s) {
        double acc = 0.0;
        for (std::size_t i = 0; i < p1.size(); ++i)
            acc += detail::support_pow(p1[i], s) * detail::support_pow(p2[i], 1.0 - s);
        return acc;
    };
    return detail::chernoff_from_objective(f, disjoint);
}

inline double chernoff_quantum(const DensityMatrix& rho1, const DensityMatrix& rho2)
{
    if (rho1.dim() != rho2.dim())
        throw DomainError("states have different dimensions");
    const auto e1 = herm_eig(rho1.matrix());
    const auto e2 = herm_eig(rho2.matrix());
    const std::size_t d = rho1.dim();
    // eigenvalues at round-off level belong to the kernel
    auto support = [](std::vector<double> v) {
        for (double& x : v)
            if (x < 1e-12)
                x = 0.0;
        return v;
    };
    const auto l1 = support(e1.values), l2 = support(e2.values);
    RealMatrix overlap(d, d);
    bool disjoint = true;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            cplx ip = 0.0;
            for (std::size_t k = 0; k < d; ++k)
                ip += std::conj(e1.vectors(k, i)) * e2.vectors(k, j);
            overlap(i, j) = std::norm(ip);
            if (l1[i] > 0.0 && l2[j] > 0.0 && overlap(i, j) > 1e-24)
                disjoint = false;
        }
    auto f = [&](double s) {
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                acc += detail::support_pow(l1[i], s) * detail::support_pow(l2[j], 1.0 - s) * overlap(i, j);
        return acc;
    };
    return detail::chernoff_from_objective(f, disjoint);
}

// Helstrom error for N copies of each qubit state, one irrep block at a time.
inline double multicopy_error(const QubitState& q1, const QubitState& q2, double eta1, int copies)
{
    detail::check_unit(eta1, "prior");
    if (copies < 1)
        throw DomainError("copy number must be at least 1");
    const auto s1 = make_block_state(copies, q1);
    const auto s2 = make_block_state(copies, q2);
    CompensatedSum norm;
    for (std::size_t b = 0; b < s1.blocks.size(); ++b) {
        const auto& b1 = s1.blocks[b];
        const ComplexMatrix gamma = eta1 * b1.block - (1.0 - eta1) * s2.blocks[b].block;
        norm.add(std::exp(log_multiplicity(copies, b1.j)) * trace_norm(gamma));
    }
    return 0.5 * (1.0 - norm.value());
}

// Pure qubit pair with real overlap c: cos(t/2)|0> -/+ sin(t/2)|1>, c = cos t.
inline std::array<std::array<cplx, 2>, 2> pure_qubit_pair(double c)
{
    detail::check_unit(c, "overlap");
    const double t = std::acos(c);
    const double co = std::cos(t / 2), si = std::sin(t / 2);
    return {{{co, si}, {co, -si}}};
}

// Decide whether two unknown copies are equal or different; one copy of each.
inline double compare_error(double c, double eta1)
{
    detail::check_unit(eta1, "prior");
    const auto psi = pure_qubit_pair(c);
    auto ket2 = [](const std::array<cplx, 2>& a, const std::array<cplx, 2>& b) {
        return std::vector<cplx>{a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]};
    };
    auto outer = [](const std::vector<cplx>& a, const std::vector<cplx>& b) {
        ComplexMatrix m(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j)
                m(i, j) = a[i] * std::conj(b[j]);
        return m;
    };
    const double eta2 = 1.0 - eta1;
    const auto k11 = ket2(psi[0], psi[0]), k22 = ket2(psi[1], psi[1]);
    const auto k12 = ket2(psi[0], psi[1]), k21 = ket2(psi[1], psi[0]);
    const ComplexMatrix same = eta1 * eta1 * outer(k11, k11) + eta2 * eta2 * outer(k22, k22);
    const ComplexMatrix differ = eta1 * eta2 * (outer(k12, k12) + outer(k21, k21));
    return 0.5 * (1.0 - trace_norm(same - differ));
}

} // namespace qdl

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "angular.hpp"
#include "discrimination.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "numeric.hpp"

namespace qdl {

// Copies loaded at the two program ports (A, C) and the data port (B).
struct PortLoad {
    int n_a = 1;
    int n_b = 1;
    int n_c = 1;

    void validate() const
    {
        if (n_a < 1 || n_b < 1 || n_c < 1)
            throw DomainError("every port needs at least one copy");
    }
    // Swapping A and C exchanges the hypotheses, which leaves error rates unchanged.
    PortLoad canonical() const { return n_a >= n_c ? *this : PortLoad{n_c, n_b, n_a}; }
};

struct PuritySpec {
    enum class Kind { fixed, hard_sphere, bures, chernoff };
    Kind kind = Kind::fixed;
    double r = 1.0;

    static PuritySpec fixed(double purity)
    {
        detail::check_purity(purity);
        return {Kind::fixed, purity};
    }
    static PuritySpec hard_sphere() { return {Kind::hard_sphere, 0.0}; }
    static PuritySpec bures() { return {Kind::bures, 0.0}; }
    static PuritySpec chernoff() { return {Kind::chernoff, 0.0}; }
};

struct Rates {
    double q = 0.0;  // inconclusive probability, error-free scheme
    double pe = 0.0; // minimum error probability
};

inline Rates pure_rates(int n, int nprime)
{
    if (n < 1 || nprime < 1)
        throw DomainError("pure_rates needs n, n' >= 1");
    const double den = static_cast<double>(n + 1) * (nprime + 2);
    Rates out;
    out.q = (den - static_cast<double>(n) * nprime) / den;
    CompensatedSum s;
    const double norm = static_cast<double>(n + 1) * (n + nprime + 1);
    for (int k = 0; k <= n; ++k) {
        const double c = jordan_overlap(n, nprime, k);
        s.add((nprime + 2.0 * k + 1.0) / norm * std::sqrt(std::max(0.0, 1.0 - c * c)));
    }
    out.pe = 0.5 * (1.0 - s.value());
    return out;
}

namespace detail {

// ln [ C(nA+nB-nC+k, nB) C(nB+k, nB) / (C(nA+nB, nB) C(nC+nB, nB)) ]
inline double log_general_overlap_sq(const PortLoad& l, int k)
{
    return log_binomial(l.n_a + l.n_b - l.n_c + k, l.n_b) + log_binomial(l.n_b + k, l.n_b) -
           log_binomial(l.n_a + l.n_b, l.n_b) - log_binomial(l.n_c + l.n_b, l.n_b);
}

} // namespace detail

// Pure states with arbitrary port loads, closed forms.
inline Rates general_rates(const PortLoad& load)
{
    load.validate();
    const PortLoad l = load.canonical();
    const double d1 = static_cast<double>(l.n_a + l.n_b + 1) * (l.n_c + 1);
    const double d2 = static_cast<double>(l.n_a + 1) * (l.n_b + l.n_c + 1);
    const double dabc = l.n_a + l.n_b + l.n_c + 1.0;
    CompensatedSum qsum, esum;
    for (int k = 0; k <= l.n_c; ++k) {
        const double c2 = std::exp(detail::log_general_overlap_sq(l, k));
        const double mult = l.n_a + l.n_b - l.n_c + 2.0 * k + 1.0;
        qsum.add(mult * std::sqrt(c2));
        esum.add(mult * std::sqrt(std::max(0.0, 1.0 - 4.0 * d1 * d2 / ((d1 + d2) * (d1 + d2)) * c2)));
    }
    const double gap = 1.0 / std::sqrt(d1) - 1.0 / std::sqrt(d2);
    Rates out;
    out.q = 0.5 * gap * gap * dabc + qsum.value() / std::sqrt(d1 * d2);
    out.pe = 0.25 * (1.0 + d1 / d2 - (d1 + d2) / (d1 * d2) * esum.value());
    return out;
}

// Same rates from the Jordan decomposition, with overlaps taken from 6j symbols.
inline Rates general_rates_jordan(const PortLoad& load)
{
    load.validate();
    const PortLoad l = load.canonical();
    const HalfInt ja = HalfInt::from_twice(l.n_a), jb = HalfInt::from_twice(l.n_b), jc = HalfInt::from_twice(l.n_c);
    const double d1 = static_cast<double>(l.n_a + l.n_b + 1) * (l.n_c + 1);
    const double d2 = static_cast<double>(l.n_a + 1) * (l.n_b + l.n_c + 1);
    const double pj = 0.5 * (1.0 / d1 + 1.0 / d2);
    const double pi1 = 1.0 / (2.0 * pj * d1);
    CompensatedSum q, pe;
    for (int k = 0; k <= l.n_c; ++k) {
        const HalfInt J = HalfInt::from_twice(l.n_a + l.n_b - l.n_c + 2 * k);
        const auto m = overlap_matrix(ja, jb, jc, J);
        // the fully stretched couplings head both label lists
        const double c = std::abs(m.lambda(0, 0));
        const double w = pj * (J.twice() + 1.0);
        q.add(w * unambiguous_q(c, pi1));
        pe.add(w * pure_overlap_error(c, pi1));
    }
    return {q.value(), pe.value()};
}

namespace detail {

using LogCoefficient = std::function<double(int copies, HalfInt j)>;

inline double small_trace_norm(const RealMatrix& m)
{
    if (m.rows() == 1)
        return std::abs(m(0, 0));
    if (m.rows() == 2) {
        const double a = m(0, 0), d = m(1, 1), b = m(0, 1);
        if (a * d - b * b >= 0.0)
            return std::abs(a + d);
        return 2.0 * std::hypot(0.5 * (a - d), b);
    }
    return trace_norm(m);
}

// Sum over blocks {jA, jB, jC, J} of gamma * || sigma1 - sigma2 ||_1 where the
// AB state and C state are independent: sigma1 weights C_{jAB} C_{jC}, sigma2
// weights C_{jA} C_{jBC}.
inline double block_trace_norm_sum(const PortLoad& load, const LogCoefficient& logc)
{
    load.validate();
    const int na = load.n_a, nb = load.n_b, nc = load.n_c;
    const double ninf = -std::numeric_limits<double>::infinity();
    auto coefficient_table = [&](int copies) {
        std::vector<double> t(copies + 1, ninf);
        for (HalfInt j : irreps(copies))
            t[j.twice()] = logc(copies, j);
        return t;
    };
    auto multiplicity_table = [](int copies) {
        std::vector<double> t(copies + 1, 0.0);
        for (HalfInt j : irreps(copies))
            t[j.twice()] = log_multiplicity(copies, j);
        return t;
    };
    const auto c_ab = coefficient_table(na + nb), c_c = coefficient_table(nc);
    const auto c_a = coefficient_table(na), c_bc = coefficient_table(nb + nc);
    const auto nu_a = multiplicity_table(na), nu_b = multiplicity_table(nb), nu_c = multiplicity_table(nc);
    const auto ja_list = irreps(na);

    const auto partial = parallel_map<double>(ja_list.size(), [&](std::size_t ia) {
        const HalfInt ja = ja_list[ia];
        CompensatedSum acc;
        for (HalfInt jb : irreps(nb))
            for (HalfInt jc : irreps(nc)) {
                const double lnu = nu_a[ja.twice()] + nu_b[jb.twice()] + nu_c[jc.twice()];
                for (int tj = ja.twice() + jb.twice() + jc.twice(); tj >= 0; tj -= 2) {
                    const HalfInt J = HalfInt::from_twice(tj);
                    const auto labels = recoupling_labels(ja, jb, jc, J);
                    const std::size_t d = labels.jab.size();
                    if (d == 0)
                        continue;
                    const double lg = lnu + std::log(tj + 1.0);
                    std::vector<double> s1(d), s2(d);
                    bool any = false;
                    for (std::size_t i = 0; i < d; ++i) {
                        const double l1 = c_ab[labels.jab[i].twice()] + c_c[jc.twice()];
                        const double l2 = c_a[ja.twice()] + c_bc[labels.jbc[i].twice()];
                        s1[i] = std::isinf(l1) ? 0.0 : std::exp(lg + l1);
                        s2[i] = std::isinf(l2) ? 0.0 : std::exp(lg + l2);
                        any = any || s1[i] > 0.0 || s2[i] > 0.0;
                    }
                    if (!any)
                        continue;
                    const auto lam = overlap_matrix(ja, jb, jc, J).lambda;
                    RealMatrix m(d, d);
                    for (std::size_t i = 0; i < d; ++i)
                        for (std::size_t k = i; k < d; ++k) {
                            double v = 0.0;
                            for (std::size_t l = 0; l < d; ++l)
                                v += lam(i, l) * s2[l] * lam(k, l);
                            m(i, k) = (i == k ? s1[i] : 0.0) - v;
                            m(k, i) = m(i, k);
                        }
                    acc.add(small_trace_norm(m));
                }
            }
        return acc.value();
    });
    return compensated_sum(partial);
}

inline double error_from_norm_sum(double t) { return std::clamp(0.5 * (1.0 - 0.5 * t), 0.0, 0.5); }

} // namespace detail

// Mixed qubit states of purity r with arbitrary port loads.
inline double mixed_error(const PortLoad& load, double r)
{
    detail::check_purity(r);
    return detail::error_from_norm_sum(detail::block_trace_norm_sum(
        load, [r](int copies, HalfInt j) { return log_block_coefficient(copies, j, r); }));
}

inline double mixed_error(int n, int nprime, double r)
{
    if (n < 1 || nprime < 1)
        throw DomainError("mixed_error needs n, n' >= 1");
    return mixed_error(PortLoad{n, nprime, n}, r);
}

// Leading large-n behaviour, valid when r is well above 1/n.
inline double mixed_asymptote(int n, double r)
{
    if (n < 1)
        throw DomainError("mixed_asymptote needs n >= 1");
    if (!(r > 0.0 && r <= 1.0))
        throw DomainError("mixed_asymptote needs 0 < r <= 1");
    return 0.5 - r / 3.0 + 1.0 / (3.0 * n * r);
}

// Block coefficient averaged over a purity prior, closed forms.
inline double log_averaged_block_coefficient(PuritySpec::Kind kind, int copies, HalfInt j)
{
    detail::check_irrep(copies, j);
    const double h = copies / 2.0, jj = j.value();
    switch (kind) {
    case PuritySpec::Kind::hard_sphere:
        return std::log(6.0) + std::lgamma(h + jj + 2.0) + std::lgamma(h - jj + 1.0) - std::lgamma(copies + 4.0);
    case PuritySpec::Kind::bures:
        return std::log(4.0 / std::numbers::pi) + std::lgamma(h + jj + 1.5) + std::lgamma(h - jj + 0.5) -
               std::lgamma(copies + 3.0);
    case PuritySpec::Kind::chernoff: {
        CompensatedSum s;
        for (int tm = -j.twice(); tm <= j.twice(); tm += 2) {
            const double m = tm / 2.0;
            s.add(boost::math::beta((copies + 1 - 2 * m) / 2, (copies + 1 + 2 * m) / 2, 0.5));
            s.add(-2.0 * boost::math::beta((copies - 2 * m + 2) / 2, (copies + 2 * m + 2) / 2, 0.5));
        }
        const double v = 2.0 / ((std::numbers::pi - 2.0) * (j.twice() + 1.0)) * s.value();
        if (v <= 0.0)
            throw InvariantViolation("non-positive averaged coefficient");
        return std::log(v);
    }
    case PuritySpec::Kind::fixed:
        break;
    }
    throw DomainError("a fixed purity has no averaged coefficient");
}

inline double averaged_block_coefficient(PuritySpec::Kind kind, int copies, HalfInt j)
{
    return std::exp(log_averaged_block_coefficient(kind, copies, j));
}

// Prior density in the angle t with r = sin t, on [0, pi/2].
inline double prior_angle_density(PuritySpec::Kind kind, double t)
{
    switch (kind) {
    case PuritySpec::Kind::hard_sphere:
        return 3.0 * std::sin(t) * std::sin(t) * std::cos(t);
    case PuritySpec::Kind::bures:
        return 4.0 / std::numbers::pi * std::sin(t) * std::sin(t);
    case PuritySpec::Kind::chernoff:
        return (2.0 - 2.0 * std::cos(t)) / (std::numbers::pi - 2.0);
    case PuritySpec::Kind::fixed:
        break;
    }
    throw DomainError("a fixed purity has no density");
}

// Same average by Gauss-Legendre quadrature; a cross-check for the closed forms.
inline double averaged_block_coefficient_quadrature(PuritySpec::Kind kind, int copies, HalfInt j, int order = 200)
{
    const auto q = gauss_legendre(order);
    CompensatedSum s;
    const double half = std::numbers::pi / 4;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double t = half * (q.nodes[i] + 1.0);
        s.add(half * q.weights[i] * prior_angle_density(kind, t) * block_coefficient(copies, j, std::sin(t)));
    }
    return s.value();
}

inline double universal_error(const PuritySpec& prior, const PortLoad& load)
{
    if (prior.kind == PuritySpec::Kind::fixed)
        return mixed_error(load, prior.r);
    return detail::error_from_norm_sum(detail::block_trace_norm_sum(
        load, [&](int copies, HalfInt j) { return log_averaged_block_coefficient(prior.kind, copies, j); }));
}

inline double universal_error(const PuritySpec& prior, int n, int nprime)
{
    if (n < 1 || nprime < 1)
        throw DomainError("universal_error needs n, n' >= 1");
    return universal_error(prior, PortLoad{n, nprime, n});
}

// Program ports unlimited, n' data copies. Pass n to include the 1/n correction.
inline Rates program_limit(int nprime, std::optional<int> n = std::nullopt)
{
    if (nprime < 1 || (n && *n < 1))
        throw DomainError("program_limit needs positive copy numbers");
    const double x = 1.0 / nprime;
    const double correction = n ? 1.0 - 1.0 / *n : 1.0;
    Rates out;
    out.q = 2.0 / (nprime + 2.0);
    out.pe = 0.5 - std::sqrt(std::numbers::pi) / 4.0 * std::exp(std::lgamma(1.0 + x) - std::lgamma(1.5 + x)) *
                       correction;
    return out;
}

// Data port unlimited, n program copies.
inline Rates data_limit(int n)
{
    if (n < 1)
        throw DomainError("data_limit needs n >= 1");
    return {1.0 / (n + 1.0), 1.0 / (2.0 * (n + 1.0))};
}

// Pe ~ coefficient / n when n = n' grows.
inline double symmetric_error_coefficient()
{
    CompensatedSum zeta;
    double xk = 1.0;
    for (int k = 0; k < 200 && xk > 0.0; ++k) {
        zeta.add(1.0 - std::sqrt(1.0 - xk));
        xk *= 0.25;
    }
    return 0.75 * zeta.value();
}

struct MarginCurve {
    double p_success = 0.0;
    std::vector<double> margins;           // one per Jordan subspace, increasing overlap
    std::vector<double> saturation_points; // global margins where each subspace saturates
    double critical = 0.0;                 // beyond this no inconclusive outcome remains
};

struct MarginSubspaces {
    std::vector<double> overlap;
    std::vector<double> weight;
    std::vector<double> critical; // per-subspace critical margins
};

inline MarginSubspaces margin_subspaces(int n, int nprime)
{
    if (n < 1 || nprime < 1)
        throw DomainError("margin_success needs n, n' >= 1");
    MarginSubspaces s;
    for (int a = 1; a <= n + 1; ++a) {
        const double c = jordan_overlap(n, nprime, a - 1);
        s.overlap.push_back(c);
        s.weight.push_back((2.0 * a + nprime - 1.0) / ((n + 1.0) * (n + nprime + 1.0)));
        s.critical.push_back(critical_margin(c));
    }
    return s;
}

namespace detail {

struct WeakInterval {
    double xi = 0.0;        // error already committed by saturated subspaces
    double chi = 0.0;       // sum of p (1 - c) over unsaturated subspaces
    double saturated = 0.0; // success from saturated subspaces
};

inline WeakInterval weak_interval(const MarginSubspaces& s, std::size_t beta)
{
    WeakInterval w;
    for (std::size_t a = 0; a < s.overlap.size(); ++a) {
        if (a < beta) {
            w.xi += s.weight[a] * s.critical[a];
            w.saturated += 0.5 * s.weight[a] * (1.0 + std::sqrt(1.0 - s.overlap[a] * s.overlap[a]));
        } else {
            w.chi += s.weight[a] * (1.0 - s.overlap[a]);
        }
    }
    return w;
}

inline std::vector<double> weak_saturation_points(const MarginSubspaces& s)
{
    std::vector<double> out;
    for (std::size_t b = 0; b < s.overlap.size(); ++b) {
        const auto w = weak_interval(s, b);
        if (s.overlap[b] < 1.0)
            out.push_back(w.xi + s.critical[b] * w.chi / (1.0 - s.overlap[b]));
        else
            out.push_back(w.xi + s.weight[b] * s.critical[b]);
    }
    return out;
}

inline double weak_success_in(const WeakInterval& w, double big_r)
{
    const double u = std::sqrt(std::max(0.0, big_r - w.xi));
    return w.saturated + (u + std::sqrt(w.chi)) * (u + std::sqrt(w.chi));
}

inline std::size_t active_interval(const std::vector<double>& points, double big_r)
{
    return static_cast<std::size_t>(std::lower_bound(points.begin(), points.end(), big_r) - points.begin());
}

struct WeakSolution {
    double p_success;
    std::vector<double> margins;
    std::vector<double> subspace_success;
};

inline WeakSolution weak_solution(const MarginSubspaces& s, const std::vector<double>& points, double big_r)
{
    const std::size_t count = s.overlap.size();
    WeakSolution out{0.0, std::vector<double>(count), std::vector<double>(count)};
    const std::size_t beta = active_interval(points, big_r);
    if (beta >= count) {
        for (std::size_t a = 0; a < count; ++a) {
            out.margins[a] = s.critical[a];
            out.subspace_success[a] = 0.5 * (1.0 + std::sqrt(1.0 - s.overlap[a] * s.overlap[a]));
        }
        out.p_success = weak_interval(s, count).saturated;
        return out;
    }
    const auto w = weak_interval(s, beta);
    for (std::size_t a = 0; a < count; ++a) {
        if (a < beta) {
            out.margins[a] = s.critical[a];
            out.subspace_success[a] = 0.5 * (1.0 + std::sqrt(1.0 - s.overlap[a] * s.overlap[a]));
        } else if (w.chi > 0.0) {
            out.margins[a] = (1.0 - s.overlap[a]) * (big_r - w.xi) / w.chi;
            out.subspace_success[a] = weak_margin(s.overlap[a], out.margins[a]).p_success;
        } else {
            // only the identical-state subspace is left
            out.margins[a] = (big_r - w.xi) / s.weight[a];
            out.subspace_success[a] = out.margins[a];
        }
    }
    out.p_success = weak_success_in(w, big_r);
    return out;
}

} // namespace detail

inline MarginCurve margin_success(int n, int nprime, double big_r, MarginScheme scheme)
{
    detail::check_unit(big_r, "margin");
    const auto s = margin_subspaces(n, nprime);
    const auto weak_points = detail::weak_saturation_points(s);
    MarginCurve out;
    out.critical = weak_points.back();

    if (scheme == MarginScheme::weak) {
        const auto sol = detail::weak_solution(s, weak_points, big_r);
        out.p_success = sol.p_success;
        out.margins = sol.margins;
        out.saturation_points = weak_points;
        return out;
    }

    // strong margins map onto weak ones through R_s = R_w / (Ps(R_w) + R_w)
    std::vector<double> strong_points;
    for (std::size_t b = 0; b < weak_points.size(); ++b) {
        const double ps = detail::weak_success_in(detail::weak_interval(s, b), weak_points[b]);
        strong_points.push_back(weak_points[b] / (ps + weak_points[b]));
    }
    out.saturation_points = strong_points;
    double r_weak;
    const std::size_t beta = detail::active_interval(strong_points, big_r);
    if (beta >= strong_points.size()) {
        r_weak = std::max(big_r, out.critical);
    } else {
        const auto w = detail::weak_interval(s, beta);
        const double a = 1.0 - 2.0 * big_r;
        const double b = -2.0 * big_r * std::sqrt(w.chi);
        const double c = w.xi - big_r * (w.saturated + w.chi + w.xi);
        if (a <= 0.0)
            throw InvariantViolation("strong margin at or above 1/2 inside an unsaturated interval");
        const double u = (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a);
        r_weak = std::min(w.xi + u * u, out.critical);
    }
    const auto sol = detail::weak_solution(s, weak_points, r_weak);
    out.p_success = sol.p_success;
    out.margins.resize(sol.margins.size());
    for (std::size_t a = 0; a < sol.margins.size(); ++a) {
        const double conclusive = sol.subspace_success[a] + sol.margins[a];
        out.margins[a] = s.overlap[a] >= 1.0 ? 0.5 : (conclusive > 0.0 ? sol.margins[a] / conclusive : 0.0);
    }
    return out;
}

} // namespace qdl

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "numeric.hpp"

namespace qdl {

// alpha0: rough localisation of the unknown amplitude; mu: width of the
// Gaussian prior of the local parameter; n_aux: auxiliary copies.
struct ReadingConfig {
    cplx alpha0{1.0, 0.0};
    double mu = 1.0;
    int n_aux = 1;

    void validate() const
    {
        if (!(mu > 0.0) || !std::isfinite(mu))
            throw DomainError("prior width must be positive and finite");
        if (n_aux < 1)
            throw DomainError("need at least one auxiliary copy");
        if (!std::isfinite(alpha0.real()) || !std::isfinite(alpha0.imag()))
            throw DomainError("amplitude must be finite");
    }
    // The problem is phase covariant, so only |alpha0| matters.
    double amplitude() const { return std::abs(alpha0); }
};

// Operator on the Fock space truncated at photon number `cutoff`.
struct FockOperator {
    int cutoff = 0;
    ComplexMatrix matrix;
};

// Photon-number cutoff generous enough for amplitudes up to `amplitude`.
inline int fock_cutoff(double amplitude)
{
    const double a = std::abs(amplitude);
    return static_cast<int>(std::ceil(a * a + 8.0 * a + 20.0));
}

// Fock amplitudes of |alpha> up to `cutoff`; throws when the dropped tail
// carries 1e-12 or more of the norm.
inline std::vector<cplx> coherent_ket(cplx alpha, int cutoff)
{
    if (cutoff < 0)
        throw DomainError("negative Fock cutoff");
    std::vector<cplx> v(cutoff + 1);
    cplx term = std::exp(-std::norm(alpha) / 2.0);
    double kept = 0.0;
    for (int k = 0; k <= cutoff; ++k) {
        v[k] = term;
        kept += std::norm(term);
        term *= alpha / std::sqrt(k + 1.0);
    }
    if (1.0 - kept >= 1e-12)
        throw DomainError("Fock cutoff " + std::to_string(cutoff) + " too small for amplitude " +
                          std::to_string(std::abs(alpha)) + "; increase the cutoff");
    return v;
}

inline FockOperator coherent_projector(cplx alpha, int cutoff)
{
    const auto ket = coherent_ket(alpha, cutoff);
    return {cutoff, projector(ket)};
}

// Gaussian average of |u><u| with prior width mu: thermal, mean photon number mu^2.
inline std::vector<double> thermal_weights(double mu, int cutoff)
{
    std::vector<double> c(cutoff + 1);
    const double mu2 = mu * mu;
    for (int k = 0; k <= cutoff; ++k)
        c[k] = std::pow(mu2, k) / std::pow(mu2 + 1.0, k + 1);
    return c;
}

// All n copies of |alpha> gathered into one mode by beam splitters.
inline cplx concentrate_modes(cplx alpha, int n)
{
    if (n < 1)
        throw DomainError("need at least one mode");
    return std::sqrt(static_cast<double>(n)) * alpha;
}

namespace detail {

inline void check_amplitude(double a)
{
    if (!(a > 0.0) || !std::isfinite(a))
        throw DomainError("amplitude must be positive");
}

} // namespace detail

// Zeroth-order eigenvalue sum of the positive part; the negative part is its opposite.
inline double collective_lambda0(double a)
{
    detail::check_amplitude(a);
    return std::sqrt(-std::expm1(-a * a));
}

// Second-order eigenvalue sum of the positive part at prior width mu.
inline double collective_lambda2(double a, double mu)
{
    detail::check_amplitude(a);
    const double a2 = a * a, em1 = std::expm1(a2), mu2 = mu * mu;
    const double shape = a2 * (2.0 * std::exp(a2) - 1.0) / em1;
    return mu2 * std::exp(-a2 / 2.0) / (2.0 * std::sqrt(em1)) * (1.0 - (mu2 + 1.0) / (2.0 * mu2 + 1.0) * shape);
}

// First-order correction to the error for a perfectly known amplitude.
inline double known_state_lambda(double a, double mu)
{
    detail::check_amplitude(a);
    const double a2 = a * a, e = std::exp(-a2), mu2 = mu * mu;
    return mu2 * (2.0 * (e - 1.0) + a2 * (2.0 - e)) / (4.0 * std::expm1(a2) * std::sqrt(1.0 - e));
}

// Overlaps of the zeroth-order eigenvectors with the vacuum and one-photon states.
struct EigenOverlaps {
    double vacuum_plus;
    double vacuum_minus;
    double photon_plus;
    double photon_minus;
    double photon_null;
};

inline EigenOverlaps eigen_overlaps(double a)
{
    detail::check_amplitude(a);
    const double a2 = a * a, q = std::sqrt(-std::expm1(-a2)), em1 = std::expm1(a2);
    return {0.5 * (1.0 - q), 0.5 * (1.0 + q), a2 / 2.0 * (1.0 + q) / em1, a2 / 2.0 * (1.0 - q) / em1,
            1.0 - a2 * std::exp(-a2) / -std::expm1(-a2)};
}

// Collective excess risk keeping the prior width finite.
inline double collective_excess_risk(double a, double mu)
{
    if (!(mu > 0.0))
        throw DomainError("prior width must be positive");
    const double l2 = collective_lambda2(a, mu);
    return -0.25 * (l2 - (-l2)) - 0.5 * known_state_lambda(a, mu);
}

// Collective excess risk with a flat prior.
inline double collective_excess_risk(double a)
{
    detail::check_amplitude(a);
    const double a2 = a * a, em1 = std::expm1(a2);
    return a2 * std::exp(-a2 / 2.0) * (2.0 * std::exp(a2) - 1.0) / (16.0 * std::pow(em1, 1.5));
}

// Excess risk of estimate-and-discriminate with a squeezed heterodyne of squeezing `squeeze`.
inline double eyd_excess_risk(double a, double squeeze)
{
    detail::check_amplitude(a);
    if (!std::isfinite(squeeze))
        throw DomainError("squeezing must be finite");
    const double a2 = a * a, e = std::exp(a2), q = std::sqrt(-std::expm1(-a2));
    const double bracket = 4.0 * e * (1.0 - e) * (q - 1.0) + a2 * (4.0 * e * q - 2.0);
    const double ch = std::cosh(squeeze);
    return std::exp(-a2) / (16.0 * q * std::expm1(a2)) * (bracket * ch * ch + a2 * std::sinh(2.0 * squeeze));
}

// Squeezing that minimizes the estimate-and-discriminate excess risk; negative for every a.
inline double optimal_squeezing(double a)
{
    detail::check_amplitude(a);
    const double a2 = a * a, e = std::exp(a2), q = std::sqrt(-std::expm1(-a2));
    const double f = 2.0 * e * (e - 1.0) * (q - 1.0) + a2 * (1.0 - 2.0 * e * q);
    const double ratio = (f + a2) / (f - a2);
    if (!(ratio > 0.0) || !std::isfinite(ratio))
        throw DomainError("optimal squeezing undefined at this amplitude (numerical breakdown)");
    return 0.25 * std::log(ratio);
}

struct EydOptimum {
    double squeeze;
    double excess_risk;
};

inline EydOptimum eyd_minimum(double a)
{
    const double s = optimal_squeezing(a);
    return {s, eyd_excess_risk(a, s)};
}

enum class ReadingStrategy { collective, eyd };

struct OracleResult {
    double pe = 0.0;       // finite-n error of the strategy
    double pe_known = 0.0; // finite-n error with the amplitude known
    double excess = 0.0;   // n (pe - pe_known)
};

namespace detail {

inline int geometric_cutoff(double ratio)
{
    // smallest K with ratio^(K+1) < 1e-12
    if (ratio <= 0.0)
        return 1;
    return std::max(1, static_cast<int>(std::ceil(std::log(1e-12) / std::log(ratio))));
}

inline double known_amplitude_error(double a, double mu, int n, int order)
{
    const auto gh = gauss_hermite(order);
    CompensatedSum s;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i)
        for (std::size_t j = 0; j < gh.nodes.size(); ++j) {
            const cplx u = mu * cplx(gh.nodes[i], gh.nodes[j]);
            const double overlap = std::exp(-std::norm(a + u / std::sqrt(static_cast<double>(n))));
            const double pe = 0.5 * (1.0 - std::sqrt(std::max(0.0, 1.0 - overlap)));
            s.add(gh.weights[i] * gh.weights[j] / M_PI * pe);
        }
    return s.value();
}

// Signal mode thermal (prior average of |u>), auxiliary mode holding either
// |-a> or |u/sqrt(n)>. Auxiliary basis: Fock 0..L plus the normalized tail of |-a>.
inline double collective_oracle(double a, double mu, int n)
{
    const double mu2 = mu * mu;
    const int k1 = geometric_cutoff(mu2 / (mu2 + 1.0));
    const int tail_cut = fock_cutoff(a);
    const int l_max = std::min(tail_cut, geometric_cutoff(mu2 / (mu2 + n)) + 1);
    const auto target = coherent_ket(-a, tail_cut);
    const std::size_t d2 = l_max + 2;
    std::vector<double> aux(d2, 0.0);
    double tail = 0.0;
    for (int k = 0; k <= tail_cut; ++k) {
        if (k <= l_max)
            aux[k] = target[k].real();
        else
            tail += std::norm(target[k]);
    }
    aux[l_max + 1] = std::sqrt(tail);

    const auto c = thermal_weights(mu, k1);
    const std::size_t dim = (k1 + 1) * d2;
    RealMatrix diff(dim, dim);
    for (int k = 0; k <= k1; ++k)
        for (std::size_t i = 0; i < d2; ++i)
            for (std::size_t j = 0; j < d2; ++j)
                diff(k * d2 + i, k * d2 + j) = c[k] * aux[i] * aux[j];
    // prior average of |u>|u/sqrt n> <u|<u/sqrt n|, total photon number conserved
    const double lam = 1.0 / mu2 + 1.0 + 1.0 / n;
    for (int k = 0; k <= k1; ++k)
        for (int l = 0; l <= l_max; ++l) {
            const int total = k + l;
            for (int kp = std::max(0, total - l_max); kp <= std::min(k1, total); ++kp) {
                const int lp = total - kp;
                const double logv = std::lgamma(total + 1.0) - 0.5 * (l + lp) * std::log(static_cast<double>(n)) -
                                    std::log(mu2) - (total + 1.0) * std::log(lam) -
                                    0.5 * (std::lgamma(k + 1.0) + std::lgamma(kp + 1.0) + std::lgamma(l + 1.0) +
                                           std::lgamma(lp + 1.0));
                diff(k * d2 + l, kp * d2 + lp) -= std::exp(logv);
            }
        }
    CompensatedSum norm;
    for (double ev : sym_eigenvalues(diff))
        norm.add(std::abs(ev));
    return 0.5 * (1.0 - 0.5 * norm.value());
}

// Estimate with a squeezed heterodyne on the concentrated auxiliary mode,
// then discriminate |-a> against the posterior state of |u/sqrt n>.
inline double eyd_oracle(double a, double mu, int n, double squeeze, int order)
{
    const double t = std::tanh(squeeze);
    const double sn = std::sqrt(static_cast<double>(n));
    const int cutoff = fock_cutoff(std::max(a, 5.0 * std::max(mu, 1.0) / sn));
    const auto target = coherent_ket(-a, cutoff);
    const ComplexMatrix p0 = projector(target);
    const auto outer = gauss_hermite(order);
    const auto inner = gauss_hermite(cutoff + 2);
    const double prec[2] = {1.0 + t, 1.0 - t};
    const std::size_t dim = cutoff + 1;
    std::vector<double> sqrt_fact(dim);
    for (std::size_t k = 0; k < dim; ++k)
        sqrt_fact[k] = std::exp(0.5 * std::lgamma(k + 1.0));

    const std::size_t q = outer.nodes.size();
    auto at_node = [&](std::size_t idx) {
        const std::size_t ia = idx / q, ib = idx % q;
        double v[2];
        for (int c = 0; c < 2; ++c) {
            const double var = 1.0 / (2.0 * prec[c]) + mu * mu / 2.0;
            v[c] = std::sqrt(2.0 * var) * outer.nodes[c == 0 ? ia : ib];
        }
        const double w = outer.weights[ia] * outer.weights[ib] / M_PI;
        // posterior of each component times exp(-u^2/n) from the coherent-state norm
        double mean[2], width[2], scale = 1.0;
        for (int c = 0; c < 2; ++c) {
            const double p = prec[c] + 1.0 / (mu * mu);
            const double m = prec[c] * v[c] / p;
            const double p2 = p + 1.0 / n;
            const double m2 = p * m / p2;
            scale *= std::sqrt(p / p2) * std::exp(-p * m * m + p2 * m2 * m2);
            mean[c] = m2;
            width[c] = 1.0 / std::sqrt(p2);
        }
        ComplexMatrix rho(dim, dim);
        std::vector<cplx> f(dim);
        for (std::size_t i = 0; i < inner.nodes.size(); ++i)
            for (std::size_t j = 0; j < inner.nodes.size(); ++j) {
                const cplx u(mean[0] + inner.nodes[i] * width[0], mean[1] + inner.nodes[j] * width[1]);
                const double ww = inner.weights[i] * inner.weights[j] / M_PI * scale;
                cplx pw = 1.0;
                for (std::size_t k = 0; k < dim; ++k) {
                    f[k] = pw / sqrt_fact[k];
                    pw *= u / sn;
                }
                for (std::size_t r = 0; r < dim; ++r) {
                    const cplx fr = ww * f[r];
                    for (std::size_t s = 0; s < dim; ++s)
                        rho(r, s) += fr * std::conj(f[s]);
                }
            }
        return w * trace_norm(p0 - rho);
    };
    const auto parts = parallel_map<double>(q * q, at_node);
    CompensatedSum total;
    for (double x : parts)
        total.add(x);
    return 0.5 * (1.0 - 0.5 * total.value());
}

} // namespace detail

// Finite-n error in truncated Fock space, averaged over the Gaussian prior.
// The amplitude is rotated onto the positive real axis first.
inline OracleResult finite_n_oracle(const ReadingConfig& cfg, ReadingStrategy strategy, double squeeze = 0.0,
                                    int quadrature_order = 32)
{
    cfg.validate();
    if (quadrature_order < 2)
        throw DomainError("quadrature order must be at least 2");
    const double a = cfg.amplitude();
    detail::check_amplitude(a);
    OracleResult out;
    out.pe = strategy == ReadingStrategy::collective ? detail::collective_oracle(a, cfg.mu, cfg.n_aux)
                                                     : detail::eyd_oracle(a, cfg.mu, cfg.n_aux, squeeze, quadrature_order);
    out.pe_known = detail::known_amplitude_error(a, cfg.mu, cfg.n_aux, std::max(quadrature_order, 40));
    out.excess = cfg.n_aux * (out.pe - out.pe_known);
    return out;
}

} // namespace qdl

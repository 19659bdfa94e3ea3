#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "numeric.hpp"

namespace qdl {

// Angular momentum stored as twice its value, so half-integers stay exact.
class HalfInt {
public:
    constexpr HalfInt() = default;
    constexpr static HalfInt from_twice(int twice) { return HalfInt(twice); }
    constexpr static HalfInt whole(int j) { return HalfInt(2 * j); }

    constexpr int twice() const { return twice_; }
    constexpr double value() const { return twice_ / 2.0; }
    constexpr bool is_integer() const { return twice_ % 2 == 0; }

    constexpr HalfInt operator+(HalfInt o) const { return HalfInt(twice_ + o.twice_); }
    constexpr HalfInt operator-(HalfInt o) const { return HalfInt(twice_ - o.twice_); }
    constexpr HalfInt operator-() const { return HalfInt(-twice_); }
    constexpr auto operator<=>(const HalfInt&) const = default;

    std::string str() const
    {
        return twice_ % 2 == 0 ? std::to_string(twice_ / 2) : std::to_string(twice_) + "/2";
    }

private:
    constexpr explicit HalfInt(int twice) : twice_(twice) {}
    int twice_ = 0;
};

namespace detail {

// ln(k!) in extended precision, tabulated once.
inline long double lfact(int k)
{
    static const std::vector<long double> table = [] {
        std::vector<long double> t(2048);
        t[0] = 0.0L;
        for (std::size_t i = 1; i < t.size(); ++i)
            t[i] = t[i - 1] + std::log(static_cast<long double>(i));
        return t;
    }();
    if (k < 0)
        throw InvariantViolation("negative factorial argument");
    if (static_cast<std::size_t>(k) < table.size())
        return table[k];
    return std::lgamma(static_cast<long double>(k) + 1.0L);
}

inline bool triangle(int ta, int tb, int tc)
{
    return tc <= ta + tb && tc >= std::abs(ta - tb) && (ta + tb + tc) % 2 == 0;
}

// Half of ln Delta(a,b,c), arguments doubled.
inline long double half_log_delta(int ta, int tb, int tc)
{
    return 0.5L * (lfact((ta + tb - tc) / 2) + lfact((ta - tb + tc) / 2) + lfact((-ta + tb + tc) / 2) -
                   lfact((ta + tb + tc) / 2 + 1));
}

} // namespace detail

inline double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M)
{
    const int a = j1.twice(), b = j2.twice(), c = J.twice();
    const int ma = m1.twice(), mb = m2.twice(), mc = M.twice();
    if (ma + mb != mc || !detail::triangle(a, b, c))
        return 0.0;
    if (std::abs(ma) > a || std::abs(mb) > b || std::abs(mc) > c)
        return 0.0;
    if ((a + ma) % 2 || (b + mb) % 2 || (c + mc) % 2)
        return 0.0;
    using detail::lfact;
    const long double pre =
        0.5L * std::log(static_cast<long double>(c + 1)) + detail::half_log_delta(a, b, c) +
        0.5L * (lfact((a + ma) / 2) + lfact((a - ma) / 2) + lfact((b + mb) / 2) + lfact((b - mb) / 2) +
                lfact((c + mc) / 2) + lfact((c - mc) / 2));
    const int kmin = std::max({0, (b - c - ma) / 2, (a - c + mb) / 2});
    const int kmax = std::min({(a + b - c) / 2, (a - ma) / 2, (b + mb) / 2});
    if (kmin > kmax)
        return 0.0;
    const int e1 = (a + b - c) / 2, e2 = (a - ma) / 2, e3 = (b + mb) / 2;
    const int f1 = (c - b + ma) / 2, f2 = (c - a - mb) / 2;
    const long double first = std::exp(pre - (lfact(kmin) + lfact(e1 - kmin) + lfact(e2 - kmin) +
                                              lfact(e3 - kmin) + lfact(f1 + kmin) + lfact(f2 + kmin)));
    // consecutive terms differ by a rational factor
    long double term = 1.0L, sum = 0.0L;
    for (int k = kmin; k <= kmax; ++k) {
        sum += term;
        term *= -static_cast<long double>(e1 - k) * (e2 - k) * (e3 - k) /
                (static_cast<long double>(k + 1) * (f1 + k + 1) * (f2 + k + 1));
    }
    sum *= first;
    if (kmin % 2)
        sum = -sum;
    return static_cast<double>(sum);
}

// Wigner 6j symbol {j1 j2 j12; j3 J j23}, Condon-Shortley phases.
inline double wigner6j(HalfInt j1, HalfInt j2, HalfInt j12, HalfInt j3, HalfInt J, HalfInt j23)
{
    const int a = j1.twice(), b = j2.twice(), c = j12.twice();
    const int d = j3.twice(), e = J.twice(), f = j23.twice();
    using detail::triangle;
    if (!triangle(a, b, c) || !triangle(a, e, f) || !triangle(d, b, f) || !triangle(d, e, c))
        return 0.0;
    using detail::lfact;
    const long double pre = detail::half_log_delta(a, b, c) + detail::half_log_delta(a, e, f) +
                            detail::half_log_delta(d, b, f) + detail::half_log_delta(d, e, c);
    const int s1 = (a + b + c) / 2, s2 = (a + e + f) / 2, s3 = (d + b + f) / 2, s4 = (d + e + c) / 2;
    const int p1 = (a + b + d + e) / 2, p2 = (b + c + e + f) / 2, p3 = (c + a + f + d) / 2;
    const int tmin = std::max({s1, s2, s3, s4});
    const int tmax = std::min({p1, p2, p3});
    if (tmin > tmax)
        return 0.0;
    const long double first =
        std::exp(pre + lfact(tmin + 1) - lfact(tmin - s1) - lfact(tmin - s2) - lfact(tmin - s3) -
                 lfact(tmin - s4) - lfact(p1 - tmin) - lfact(p2 - tmin) - lfact(p3 - tmin));
    long double term = 1.0L, sum = 0.0L;
    for (int t = tmin; t <= tmax; ++t) {
        sum += term;
        term *= -static_cast<long double>(t + 2) * (p1 - t) * (p2 - t) * (p3 - t) /
                (static_cast<long double>(t + 1 - s1) * (t + 1 - s2) * (t + 1 - s3) * (t + 1 - s4));
    }
    sum *= first;
    if (tmin % 2)
        sum = -sum;
    return static_cast<double>(sum);
}

namespace detail {

inline void check_irrep(int n, HalfInt j)
{
    if (n < 1)
        throw DomainError("copy number must be at least 1");
    if (j.twice() < 0 || j.twice() > n || (n - j.twice()) % 2 != 0)
        throw DomainError("angular momentum " + j.str() + " does not occur for " + std::to_string(n) +
                          " qubits");
}

} // namespace detail

// Irreps j = n/2, n/2 - 1, ... down to 0 or 1/2.
inline std::vector<HalfInt> irreps(int n)
{
    std::vector<HalfInt> out;
    for (int t = n; t >= 0; t -= 2)
        out.push_back(HalfInt::from_twice(t));
    return out;
}

// Number of times irrep j occurs in n qubits.
inline std::uint64_t multiplicity(int n, HalfInt j)
{
    detail::check_irrep(n, j);
    const int k = (n - j.twice()) / 2;
    // C(n,k) - C(n,k-1) with 128-bit intermediates
    auto binom = [](int nn, int kk) -> unsigned __int128 {
        if (kk < 0 || kk > nn)
            return 0;
        unsigned __int128 c = 1;
        kk = std::min(kk, nn - kk);
        for (int i = 1; i <= kk; ++i) {
            c = c * static_cast<unsigned __int128>(nn - kk + i) / static_cast<unsigned __int128>(i);
        }
        return c;
    };
    if (n > 120)
        throw DomainError("multiplicity overflows 64 bits; use log_multiplicity");
    const unsigned __int128 v = binom(n, k) - binom(n, k - 1);
    if (v > std::numeric_limits<std::uint64_t>::max())
        throw DomainError("multiplicity overflows 64 bits; use log_multiplicity");
    return static_cast<std::uint64_t>(v);
}

inline double log_multiplicity(int n, HalfInt j)
{
    detail::check_irrep(n, j);
    const int k = (n - j.twice()) / 2;
    return log_binomial(n, k) + std::log(j.twice() + 1.0) - std::log(n / 2.0 + j.value() + 1.0);
}

namespace detail {

inline void check_purity(double r)
{
    if (!(r >= 0.0 && r <= 1.0))
        throw DomainError("purity must lie in [0, 1]");
}

// ln of sum_{k=-j..j} ((1-r)/2)^(j-k) ((1+r)/2)^(j+k)
inline double log_t(HalfInt j, double r)
{
    const double lp = (1.0 + r) / 2.0, lm = (1.0 - r) / 2.0;
    const double q = lm / lp;
    double s = 0.0, qi = 1.0;
    for (int i = 0; i <= j.twice(); ++i) {
        s += qi;
        qi *= q;
    }
    return j.twice() * std::log(lp) + std::log(s);
}

} // namespace detail

// ln C_j^n, the eigenvalue weight shared by all equivalent copies of irrep j.
inline double log_block_coefficient(int n, HalfInt j, double r)
{
    detail::check_irrep(n, j);
    detail::check_purity(r);
    const int excess = (n - j.twice()) / 2;
    double lead = 0.0;
    if (excess > 0) {
        const double det = (1.0 - r * r) / 4.0;
        if (det <= 0.0)
            return -std::numeric_limits<double>::infinity();
        lead = excess * std::log(det);
    }
    return lead + detail::log_t(j, r) - std::log(j.twice() + 1.0);
}

inline double block_coefficient(int n, HalfInt j, double r) { return std::exp(log_block_coefficient(n, j, r)); }

// Probability of landing in irrep j: nu_j (2j+1) C_j^n.
inline double block_probability(int n, HalfInt j, double r)
{
    const double lc = log_block_coefficient(n, j, r);
    if (std::isinf(lc))
        return 0.0;
    return std::exp(log_multiplicity(n, j) + std::log(j.twice() + 1.0) + lc);
}

// Overlap between paired Jordan basis vectors of the pure programmable machine.
inline double jordan_overlap(int n, int nprime, int k)
{
    if (n < 1 || nprime < 1 || k < 0 || k > n)
        throw DomainError("jordan_overlap requires n, n' >= 1 and 0 <= k <= n");
    return std::exp(log_binomial(nprime + k, nprime) - log_binomial(n + nprime, nprime));
}

struct OverlapMatrix {
    std::vector<HalfInt> jab; // rows, descending
    std::vector<HalfInt> jbc; // columns, descending
    RealMatrix lambda;
};

struct RecouplingLabels {
    std::vector<HalfInt> jab; // descending
    std::vector<HalfInt> jbc; // descending
};

// Intermediate couplings through which jA, jB, jC reach total J.
// Both lists are empty when J is not reachable.
inline RecouplingLabels recoupling_labels(HalfInt ja, HalfInt jb, HalfInt jc, HalfInt J)
{
    RecouplingLabels out;
    if ((ja.twice() + jb.twice() + jc.twice() + J.twice()) % 2 != 0)
        return out;
    const int lo_ab = std::max(std::abs(ja.twice() - jb.twice()), std::abs(J.twice() - jc.twice()));
    const int hi_ab = std::min(ja.twice() + jb.twice(), J.twice() + jc.twice());
    const int lo_bc = std::max(std::abs(jb.twice() - jc.twice()), std::abs(J.twice() - ja.twice()));
    const int hi_bc = std::min(jb.twice() + jc.twice(), J.twice() + ja.twice());
    for (int t = hi_ab; t >= lo_ab; t -= 2)
        if ((t + ja.twice() + jb.twice()) % 2 == 0)
            out.jab.push_back(HalfInt::from_twice(t));
    for (int t = hi_bc; t >= lo_bc; t -= 2)
        if ((t + jb.twice() + jc.twice()) % 2 == 0)
            out.jbc.push_back(HalfInt::from_twice(t));
    if (out.jab.size() != out.jbc.size())
        throw InvariantViolation("recoupling label counts differ");
    return out;
}

// Recoupling matrix <(jA jB) jAB, jC; J | jA, (jB jC) jBC; J>.
inline OverlapMatrix overlap_matrix(HalfInt ja, HalfInt jb, HalfInt jc, HalfInt J)
{
    OverlapMatrix out;
    auto labels = recoupling_labels(ja, jb, jc, J);
    if (labels.jab.empty())
        throw DomainError("empty Jordan block for the given couplings");
    out.jab = std::move(labels.jab);
    out.jbc = std::move(labels.jbc);
    const std::size_t d = out.jab.size();
    out.lambda = RealMatrix(d, d);
    const int phase_twice = ja.twice() + jb.twice() + jc.twice() + J.twice();
    const double sign = (phase_twice / 2) % 2 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            const double w = std::sqrt((out.jab[i].twice() + 1.0) * (out.jbc[k].twice() + 1.0));
            out.lambda(i, k) = sign * w * wigner6j(ja, jb, out.jab[i], jc, J, out.jbc[k]);
        }
    return out;
}

// Action of a 2x2 matrix on the symmetric power of dimension 2j+1.
// Basis index i carries m = j - i, with |0> taken as spin up.
inline ComplexMatrix symmetric_power(const ComplexMatrix& a2, HalfInt j)
{
    if (a2.rows() != 2 || a2.cols() != 2)
        throw DomainError("symmetric_power expects a 2x2 matrix");
    const int n = j.twice();
    const cplx a = a2(0, 0), b = a2(0, 1), c = a2(1, 0), d = a2(1, 1);
    auto ipow = [](cplx z, int e) {
        cplx r = 1.0;
        for (int i = 0; i < e; ++i)
            r *= z;
        return r;
    };
    ComplexMatrix out(n + 1, n + 1);
    for (int io = 0; io <= n; ++io)
        for (int ii = 0; ii <= n; ++ii) {
            const int po = n - io, pi = n - ii; // number of up spins
            cplx s = 0.0;
            for (int k = std::max(0, po + pi - n); k <= std::min(po, pi); ++k)
                s += binomial(po, k) * binomial(n - po, pi - k) * ipow(a, k) * ipow(b, po - k) *
                     ipow(c, pi - k) * ipow(d, n - po - pi + k);
            out(io, ii) = s * std::sqrt(binomial(n, po) / binomial(n, pi));
        }
    return out;
}

struct Block {
    HalfInt j;
    std::uint64_t multiplicity = 0;
    ComplexMatrix block; // unnormalized restriction of the n-copy state to one copy of irrep j
};

struct BlockState {
    int n_copies = 0;
    double r = 0.0;
    std::vector<Block> blocks;
};

// rho^{otimes n} in block form. Each block is det(rho)^(n/2-j) times the
// symmetric power of rho; for a z-aligned Bloch vector it is diagonal.
inline BlockState make_block_state(int n, const QubitState& q)
{
    if (n < 1)
        throw DomainError("copy number must be at least 1");
    const ComplexMatrix rho = q.matrix();
    const double det = (1.0 - q.r * q.r) / 4.0;
    BlockState s{n, q.r, {}};
    for (HalfInt j : irreps(n)) {
        const int excess = (n - j.twice()) / 2;
        ComplexMatrix blk = symmetric_power(rho, j);
        blk *= cplx(std::pow(det, excess));
        s.blocks.push_back({j, multiplicity(n, j), std::move(blk)});
    }
    return s;
}

struct SchurVector {
    HalfInt j;
    HalfInt m;
    std::vector<int> path; // doubled j after each added qubit
    std::vector<double> ket;
};

// Angular momentum basis of n qubits built by coupling one qubit at a time.
inline std::vector<SchurVector> schur_basis(int n)
{
    if (n < 1 || n > 14)
        throw DomainError("schur_basis supports 1 to 14 qubits");
    const HalfInt half = HalfInt::from_twice(1);
    std::vector<SchurVector> cur;
    cur.push_back({half, half, {1}, {1.0, 0.0}});
    cur.push_back({half, -half, {1}, {0.0, 1.0}});
    for (int q = 2; q <= n; ++q) {
        const std::size_t dim_old = std::size_t{1} << (q - 1);
        std::vector<SchurVector> next;
        // group the old basis by path
        std::vector<std::vector<int>> paths;
        for (const auto& v : cur)
            if (std::find(paths.begin(), paths.end(), v.path) == paths.end())
                paths.push_back(v.path);
        for (const auto& path : paths) {
            const HalfInt j = HalfInt::from_twice(path.back());
            auto find_ket = [&](HalfInt m) -> const std::vector<double>* {
                for (const auto& v : cur)
                    if (v.path == path && v.m == m)
                        return &v.ket;
                return nullptr;
            };
            for (int tj = j.twice() + 1; tj >= std::max(j.twice() - 1, 0); tj -= 2) {
                const HalfInt jn = HalfInt::from_twice(tj);
                auto np = path;
                np.push_back(tj);
                for (int tm = tj; tm >= -tj; tm -= 2) {
                    const HalfInt m = HalfInt::from_twice(tm);
                    std::vector<double> ket(2 * dim_old, 0.0);
                    for (int sgn : {1, -1}) {
                        const HalfInt ms = HalfInt::from_twice(sgn);
                        const auto* old = find_ket(m - ms);
                        if (!old)
                            continue;
                        const double cg = clebsch_gordan(j, m - ms, half, ms, jn, m);
                        const std::size_t bit = sgn == 1 ? 0 : 1;
                        for (std::size_t i = 0; i < dim_old; ++i)
                            ket[2 * i + bit] += cg * (*old)[i];
                    }
                    next.push_back({jn, m, np, std::move(ket)});
                }
            }
        }
        cur = std::move(next);
    }
    return cur;
}

// Rebuilds the full 2^n matrix from a block state, one copy per coupling path.
inline ComplexMatrix assemble(const BlockState& s)
{
    const auto basis = schur_basis(s.n_copies);
    const std::size_t dim = std::size_t{1} << s.n_copies;
    ComplexMatrix out(dim, dim);
    for (const auto& u : basis)
        for (const auto& v : basis) {
            if (u.path != v.path)
                continue;
            const Block* blk = nullptr;
            for (const auto& b : s.blocks)
                if (b.j == u.j)
                    blk = &b;
            const std::size_t iu = (u.j.twice() - u.m.twice()) / 2;
            const std::size_t iv = (v.j.twice() - v.m.twice()) / 2;
            const cplx val = blk->block(iu, iv);
            if (val == cplx{})
                continue;
            for (std::size_t a = 0; a < dim; ++a) {
                if (u.ket[a] == 0.0)
                    continue;
                for (std::size_t b = 0; b < dim; ++b)
                    out(a, b) += val * u.ket[a] * v.ket[b];
            }
        }
    return out;
}

} // namespace qdl

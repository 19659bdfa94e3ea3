#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "angular.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "numeric.hpp"
#include "programmable.hpp"

namespace qdl {

namespace detail {

// <J_z> in irrep j of a qubit-purity-r product state.
inline double mean_jz(HalfInt j, double r)
{
    const double lp = (1.0 + r) / 2.0, lm = (1.0 - r) / 2.0;
    const double q = lp > 0.0 ? lm / lp : 1.0;
    // weights q^(j-m), m = j, j-1, ..., -j
    double norm = 0.0, first = 0.0, w = 1.0;
    for (int i = 0; i <= j.twice(); ++i) {
        const double m = j.value() - i;
        norm += w;
        first += w * m;
        w *= q;
    }
    return first / norm;
}

// r <J_z>_j / j, the shrinking of the irrep-j Bloch vector; zero for j = 0.
inline double shrink_factor(HalfInt j, double r)
{
    if (j.twice() == 0)
        return 0.0;
    return r * mean_jz(j, r) / j.value();
}

} // namespace detail

// Pure-state learning machine error, from the projections of the seed onto
// each total angular momentum. Cross-checked against the programmable bound.
inline double lm_error(int n)
{
    if (n < 1)
        throw DomainError("lm_error needs n >= 1");
    const double d = n + 1.0;
    // <j,0| Jz_A - Jz_C |j-1,0> for two spins n/2, with seed weights sqrt(2j+1)
    CompensatedSum s;
    for (int j = 1; j <= n; ++j) {
        const double elem = j * std::sqrt((d * d - 1.0 * j * j) / (4.0 * j * j - 1.0));
        const double proj = std::sqrt((2.0 * j + 1.0) * (2.0 * j - 1.0));
        s.add(2.0 * proj * elem / (d * d * (d + 1.0)));
    }
    const double pe = 0.5 - 0.5 * s.value();
    const double bound = pure_rates(n, 1).pe;
    // the bound is evaluated through log-gamma ratios and loses digits at large n
    if (std::abs(pe - bound) > 1e-12 * std::max(1.0, n / 100.0))
        throw InvariantViolation("learning machine error departs from the programmable bound");
    return pe;
}

struct GammaBlock {
    HalfInt m;
    std::vector<HalfInt> js; // descending, all with j >= |m|
    RealMatrix matrix;
};

// Operator on the training-set irreps ja (x) jc whose overlap with the seed
// gives the success bias when the data qubit reads "up".
struct GammaUp {
    HalfInt ja;
    HalfInt jc;
    double weight = 0.0;      // probability of the irrep pair
    std::vector<double> diag; // product basis, index (ja - ma) * (2jc+1) + (jc - mc)
    std::vector<GammaBlock> blocks;
};

inline GammaUp gamma_up(int n, double r, HalfInt ja, HalfInt jc)
{
    detail::check_irrep(n, ja);
    detail::check_irrep(n, jc);
    detail::check_purity(r);
    GammaUp g{ja, jc, block_probability(n, ja, r) * block_probability(n, jc, r), {}, {}};
    const double da = ja.twice() + 1.0, dc = jc.twice() + 1.0;
    const double sa = detail::shrink_factor(ja, r), sc = detail::shrink_factor(jc, r);
    auto gamma_of = [&](double ma, double mc) {
        return (sa * ma / (ja.value() + 1.0) - sc * mc / (jc.value() + 1.0)) / (2.0 * da * dc);
    };
    for (int ia = 0; ia <= ja.twice(); ++ia)
        for (int ic = 0; ic <= jc.twice(); ++ic)
            g.diag.push_back(gamma_of(ja.value() - ia, jc.value() - ic));

    const int tmax = ja.twice() + jc.twice();
    const int tmin = std::abs(ja.twice() - jc.twice());
    for (int tm = tmax; tm >= -tmax; tm -= 2) {
        GammaBlock b;
        b.m = HalfInt::from_twice(tm);
        for (int tj = tmax; tj >= std::max(tmin, std::abs(tm)); tj -= 2)
            b.js.push_back(HalfInt::from_twice(tj));
        const std::size_t d = b.js.size();
        b.matrix = RealMatrix(d, d);
        for (int tma = -ja.twice(); tma <= ja.twice(); tma += 2) {
            const int tmc = tm - tma;
            if (std::abs(tmc) > jc.twice())
                continue;
            const HalfInt ma = HalfInt::from_twice(tma), mc = HalfInt::from_twice(tmc);
            std::vector<double> cg(d);
            for (std::size_t i = 0; i < d; ++i)
                cg[i] = clebsch_gordan(ja, ma, jc, mc, b.js[i], b.m);
            const double gv = gamma_of(ma.value(), mc.value());
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t k = 0; k < d; ++k)
                    b.matrix(i, k) += cg[i] * cg[k] * gv;
        }
        g.blocks.push_back(std::move(b));
    }
    return g;
}

// Seed of the covariant measurement restricted to one irrep pair: one PSD
// operator per total magnetic number.
struct SeedBlock {
    HalfInt ja;
    HalfInt jc;
    std::map<int, RealMatrix> omega; // keyed by 2m
    double value = 0.0;              // sum_m tr(Gamma_m Omega_m)
    double dual_bound = 0.0;         // certified upper bound on value
};

struct SeedOptimization {
    double delta_lm = 0.0;
    double pe = 0.0;
    double residual = 0.0; // worst violation of the resolution constraints
    double gap = 0.0;      // weighted primal-dual gap
    std::vector<SeedBlock> seed;
};

namespace detail {

struct SeedRun {
    double value = -1e300;
    double dual = 1e300;
    std::vector<RealMatrix> factors;
};

// max sum_m tr(G_m L_m L_m^T) with sum_m ||row_j(L_m)||^2 = 2j+1, by
// gradient ascent on a product of spheres plus a dual certificate.
inline SeedRun maximize_seed(const GammaUp& g, unsigned restart)
{
    const auto& blocks = g.blocks;
    // rank of the factors: big enough to avoid spurious local optima
    std::size_t rank = 1;
    for (const auto& b : blocks)
        rank = std::max(rank, b.js.size());
    std::vector<int> tjs; // distinct 2j values
    for (const auto& b : blocks)
        for (HalfInt j : b.js)
            if (std::find(tjs.begin(), tjs.end(), j.twice()) == tjs.end())
                tjs.push_back(j.twice());

    std::mt19937_64 rng(0x5eedULL + restart);
    std::normal_distribution<double> gauss;
    std::vector<RealMatrix> L;
    for (const auto& b : blocks) {
        RealMatrix f(b.js.size(), rank);
        for (auto& x : f.data())
            x = gauss(rng);
        L.push_back(std::move(f));
    }
    auto row_of = [&](std::size_t bi, int tj) -> int {
        for (std::size_t i = 0; i < blocks[bi].js.size(); ++i)
            if (blocks[bi].js[i].twice() == tj)
                return static_cast<int>(i);
        return -1;
    };
    auto normalize = [&](std::vector<RealMatrix>& f) {
        for (int tj : tjs) {
            double s = 0.0;
            for (std::size_t bi = 0; bi < blocks.size(); ++bi)
                if (int i = row_of(bi, tj); i >= 0)
                    for (std::size_t k = 0; k < rank; ++k)
                        s += f[bi](i, k) * f[bi](i, k);
            const double scale = std::sqrt((tj + 1.0) / s);
            for (std::size_t bi = 0; bi < blocks.size(); ++bi)
                if (int i = row_of(bi, tj); i >= 0)
                    for (std::size_t k = 0; k < rank; ++k)
                        f[bi](i, k) *= scale;
        }
    };
    auto objective = [&](const std::vector<RealMatrix>& f) {
        double v = 0.0;
        for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
            const RealMatrix gl = blocks[bi].matrix * f[bi];
            for (std::size_t i = 0; i < gl.rows(); ++i)
                for (std::size_t k = 0; k < rank; ++k)
                    v += gl(i, k) * f[bi](i, k);
        }
        return v;
    };
    // multipliers y_j from stationarity
    auto multipliers = [&](const std::vector<RealMatrix>& f) {
        std::map<int, double> y;
        for (int tj : tjs)
            y[tj] = 0.0;
        for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
            const RealMatrix gl = blocks[bi].matrix * f[bi];
            for (std::size_t i = 0; i < gl.rows(); ++i)
                for (std::size_t k = 0; k < rank; ++k)
                    y[blocks[bi].js[i].twice()] += gl(i, k) * f[bi](i, k);
        }
        for (auto& [tj, v] : y)
            v /= (tj + 1.0);
        return y;
    };

    normalize(L);
    double value = objective(L);
    double step = 1.0 / (1e-300 + [&] {
        double m = 0.0;
        for (const auto& b : blocks)
            m = std::max(m, b.matrix.max_abs());
        return m;
    }());
    int stall = 0;
    for (int it = 0; it < 20000 && stall < 200; ++it) {
        const auto y = multipliers(L);
        // Riemannian gradient: 2 (G_m - Y_m) L_m
        std::vector<RealMatrix> grad;
        double gnorm = 0.0;
        for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
            RealMatrix gr = blocks[bi].matrix * L[bi];
            for (std::size_t i = 0; i < gr.rows(); ++i)
                for (std::size_t k = 0; k < rank; ++k) {
                    gr(i, k) = 2.0 * (gr(i, k) - y.at(blocks[bi].js[i].twice()) * L[bi](i, k));
                    gnorm = std::max(gnorm, std::abs(gr(i, k)));
                }
            grad.push_back(std::move(gr));
        }
        if (gnorm < 1e-14)
            break;
        bool accepted = false;
        for (int tries = 0; tries < 60; ++tries) {
            auto trial = L;
            for (std::size_t bi = 0; bi < blocks.size(); ++bi)
                trial[bi] += step * grad[bi];
            normalize(trial);
            const double tv = objective(trial);
            if (tv >= value) {
                stall = (tv - value < 1e-15 * std::max(1.0, std::abs(value))) ? stall + 1 : 0;
                L = std::move(trial);
                value = tv;
                step *= 1.5;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            break;
    }

    // dual certificate: shift the multipliers until every Y_m - G_m is PSD
    const auto y = multipliers(L);
    double shift = 0.0;
    for (const auto& b : blocks) {
        RealMatrix slack = -b.matrix;
        for (std::size_t i = 0; i < b.js.size(); ++i)
            slack(i, i) += y.at(b.js[i].twice());
        const auto ev = sym_eigenvalues(slack);
        shift = std::max(shift, -ev.back());
    }
    double dual = 0.0;
    for (const auto& [tj, v] : y)
        dual += (tj + 1.0) * (v + shift);

    SeedRun run;
    run.value = value;
    run.dual = dual;
    run.factors = std::move(L);
    return run;
}

} // namespace detail

// Best covariant seed for the mixed-state learning machine, n <= 5.
inline SeedOptimization lm_mixed_optimize(int n, double r, int restarts = 20)
{
    if (n < 1 || n > 5)
        throw DomainError("seed optimization supports 1 <= n <= 5");
    if (!(r > 0.0 && r <= 1.0))
        throw DomainError("seed optimization needs 0 < r <= 1");
    SeedOptimization out;
    CompensatedSum delta, gap;
    for (HalfInt ja : irreps(n))
        for (HalfInt jc : irreps(n)) {
            const auto g = gamma_up(n, r, ja, jc);
            if (g.weight == 0.0)
                continue;
            const auto runs = parallel_map<detail::SeedRun>(
                static_cast<std::size_t>(restarts), [&](std::size_t i) { return detail::maximize_seed(g, static_cast<unsigned>(i)); });
            std::size_t best = 0;
            for (std::size_t i = 1; i < runs.size(); ++i)
                if (runs[i].value > runs[best].value)
                    best = i;
            double tightest = runs[0].dual;
            for (const auto& run : runs)
                tightest = std::min(tightest, run.dual);
            SeedBlock sb{ja, jc, {}, runs[best].value, tightest};
            for (std::size_t bi = 0; bi < g.blocks.size(); ++bi) {
                const auto& f = runs[best].factors[bi];
                sb.omega[g.blocks[bi].m.twice()] = f * RealMatrix(f).adjoint();
            }
            // resolution of the identity inside each irrep j
            std::map<int, double> diag;
            for (std::size_t bi = 0; bi < g.blocks.size(); ++bi)
                for (std::size_t i = 0; i < g.blocks[bi].js.size(); ++i)
                    diag[g.blocks[bi].js[i].twice()] += sb.omega[g.blocks[bi].m.twice()](i, i);
            for (const auto& [tj, v] : diag)
                out.residual = std::max(out.residual, std::abs(v - (tj + 1.0)));
            delta.add(2.0 * g.weight * sb.value);
            gap.add(2.0 * g.weight * std::max(0.0, tightest - sb.value));
            out.seed.push_back(std::move(sb));
        }
    out.delta_lm = delta.value();
    out.gap = gap.value();
    out.pe = 0.5 * (1.0 - 0.5 * out.delta_lm);
    if (out.residual > 1e-8 || out.gap > 1e-7)
        throw ConvergenceError("seed optimization did not certify its optimum", out.pe);
    return out;
}

// Error with the true states known, averaged over directions; purity r.
inline double known_state_error(double r)
{
    detail::check_purity(r);
    return 0.5 - r / 3.0;
}

struct EydResult {
    double pe = 0.0;               // best known estimate-and-discriminate machine
    double excess_risk = 0.0;      // pe minus the known-state error
    double pe_continuous = 0.0;    // covariant continuous estimation
    double excess_continuous = 0.0;
};

// Pure qubits. For one training copy the optimal finite estimation measurement
// beats the continuous covariant one.
inline EydResult eyd_qubit(int n)
{
    if (n < 1)
        throw DomainError("eyd_qubit needs n >= 1");
    EydResult out;
    out.pe_continuous = 0.5 * (1.0 - 2.0 * n / (3.0 * (n + 2.0)));
    out.excess_continuous = out.pe_continuous - known_state_error(1.0);
    out.pe = n == 1 ? 0.5 - std::sqrt(2.0) / 12.0 : out.pe_continuous;
    out.excess_risk = out.pe - known_state_error(1.0);
    return out;
}

// Data measured first, training set afterwards.
inline double reversed_error(int n)
{
    if (n < 1)
        throw DomainError("reversed_error needs n >= 1");
    return 0.5 * (1.0 - n / (6.0 * (n + 1.0)));
}

inline double reversed_error_limit() { return 0.5 * (1.0 - 1.0 / 6.0); }

// Optimal excess risk with unequal program loads.
inline double unequal_load_excess(double na, double nc) { return (1.0 / na + 1.0 / nc) / 6.0; }

namespace detail {

// Twirled states of training irreps (ja, jc) plus the data qubit, in the
// product basis A (x) B (x) C. Data qubit drawn from the A state (first) or
// the C state (second).
struct TwirledPair {
    ComplexMatrix first;
    ComplexMatrix second;
    ComplexMatrix stretched_ab; // projector onto ja + 1/2 of A (x) B, times 1_C
    ComplexMatrix stretched_bc; // 1_A times projector onto jc + 1/2 of B (x) C
};

inline RealMatrix stretched_projector(HalfInt j, bool qubit_first)
{
    const HalfInt half = HalfInt::from_twice(1);
    const HalfInt top = j + half;
    const std::size_t dj = j.twice() + 1, dim = 2 * dj;
    RealMatrix p(dim, dim);
    for (int tm = top.twice(); tm >= -top.twice(); tm -= 2) {
        std::vector<double> v(dim, 0.0);
        for (int im = 0; im <= j.twice(); ++im)
            for (int ib = 0; ib < 2; ++ib) {
                const HalfInt m = HalfInt::from_twice(j.twice() - 2 * im);
                const HalfInt mb = HalfInt::from_twice(ib == 0 ? 1 : -1);
                const double cg = qubit_first ? clebsch_gordan(half, mb, j, m, top, HalfInt::from_twice(tm))
                                              : clebsch_gordan(j, m, half, mb, top, HalfInt::from_twice(tm));
                const std::size_t idx = qubit_first ? ib * dj + im : im * 2 + ib;
                v[idx] += cg;
            }
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = 0; b < dim; ++b)
                p(a, b) += v[a] * v[b];
    }
    return p;
}

// Average over SU(2) of X on j (x) 1/2, which is multiplicity free.
inline RealMatrix twirl(const RealMatrix& x, const RealMatrix& p_top, HalfInt j)
{
    const std::size_t dim = x.rows();
    RealMatrix p_low = RealMatrix::identity(dim) - p_top;
    const double top = (p_top * x).trace() / (j.twice() + 2.0);
    const double low = j.twice() == 0 ? 0.0 : (p_low * x).trace() / j.twice();
    return top * p_top + low * p_low;
}

inline TwirledPair twirled_pair(double r, HalfInt ja, HalfInt jc)
{
    const std::size_t da = ja.twice() + 1, dc = jc.twice() + 1;
    auto irrep_state = [&](HalfInt j) {
        // weights ((1+r)/2)^(j+m) ((1-r)/2)^(j-m), normalized
        std::vector<double> w;
        double s = 0.0;
        for (int i = 0; i <= j.twice(); ++i) {
            const double v = std::pow((1.0 + r) / 2.0, j.twice() - i) * std::pow((1.0 - r) / 2.0, i);
            w.push_back(v);
            s += v;
        }
        for (double& v : w)
            v /= s;
        return RealMatrix::diagonal(w);
    };
    const std::vector<double> qubit_w{(1.0 + r) / 2.0, (1.0 - r) / 2.0};
    const RealMatrix qubit = RealMatrix::diagonal(qubit_w);
    const RealMatrix pab = stretched_projector(ja, false);
    const RealMatrix pbc = stretched_projector(jc, true);
    const RealMatrix ab = twirl(tensor_product(irrep_state(ja), qubit), pab, ja);
    const RealMatrix bc = twirl(tensor_product(qubit, irrep_state(jc)), pbc, jc);
    const RealMatrix id_a = RealMatrix::identity(da) * (1.0 / da);
    const RealMatrix id_c = RealMatrix::identity(dc) * (1.0 / dc);
    TwirledPair out;
    out.first = to_complex(tensor_product(ab, id_c));
    out.second = to_complex(tensor_product(id_a, bc));
    out.stretched_ab = to_complex(tensor_product(pab, RealMatrix::identity(dc)));
    out.stretched_bc = to_complex(tensor_product(RealMatrix::identity(da), pbc));
    return out;
}

} // namespace detail

// Largest entrywise departure, over irreps j <= 4 of n qubits, of the twirled
// block difference from a times the pure-state difference.
inline double block_identity_residual(int n, double r)
{
    if (n < 1)
        throw DomainError("block identity needs n >= 1");
    if (!(r > 0.0 && r <= 1.0))
        throw DomainError("block identity needs 0 < r <= 1");
    double worst = 0.0;
    for (HalfInt j : irreps(n)) {
        if (j.twice() == 0 || j.twice() > 8)
            continue;
        const auto pair = detail::twirled_pair(r, j, j);
        const double a = detail::shrink_factor(j, r);
        const double d = j.twice() + 1.0, up = j.twice() + 2.0;
        const ComplexMatrix lhs = pair.first - pair.second;
        const ComplexMatrix rhs = (a / (up * d)) * (pair.stretched_ab - pair.stretched_bc);
        worst = std::max(worst, (lhs - rhs).max_abs());
    }
    return worst;
}

struct RobustnessReport {
    double factor = 0.0;             // r (1 - (1-r)/(n r^2))
    double excess_prediction = 0.0;  // 1/(3 r n)
    double fluctuation_excess = 0.0; // loads n +- delta sqrt(n)
    double identity_residual = 0.0;
};

inline RobustnessReport robustness_factors(int n, double r, double delta)
{
    if (n < 1)
        throw DomainError("robustness_factors needs n >= 1");
    if (!(r > 0.0 && r <= 1.0))
        throw DomainError("robustness_factors needs 0 < r <= 1");
    RobustnessReport out;
    out.factor = r * (1.0 - (1.0 - r) / (n * r * r));
    out.excess_prediction = 1.0 / (3.0 * r * n);
    const double spread = delta * std::sqrt(static_cast<double>(n));
    if (spread >= n)
        throw DomainError("fluctuation exceeds the load");
    out.fluctuation_excess = unequal_load_excess(n + spread, n - spread);
    out.identity_residual = block_identity_residual(n, r);
    return out;
}

} // namespace qdl

// Acceptance report: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <qdl/learning.hpp>
#include <qdl/povm_json.hpp>
#include <qdl/programmable.hpp>
#include <qdl/reading.hpp>

#include "oracles.hpp"

using namespace qdl;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Verdict()> run;
};

std::string fmt(double x)
{
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

HalfInt h(int twice) { return HalfInt::from_twice(twice); }

Verdict pure_rates_one_one()
{
    const auto r = pure_rates(1, 1);
    const double pe = (1 - 1 / (2 * std::sqrt(3.0))) / 2;
    Verdict v;
    v.pass = r.q == 5.0 / 6.0 && std::abs(r.pe - pe) <= 1e-12;
    v.detail = "Q=" + fmt(r.q) + " |dPe|=" + fmt(std::abs(r.pe - pe));
    return v;
}

Verdict block_method_vs_dense()
{
    double worst = 0.0;
    int cases = 0;
    for (int n = 1; 2 * n + 1 <= 9; ++n)
        for (int np = 1; 2 * n + np <= 9; ++np)
            for (double r : {0.3, 0.7, 1.0}) {
                worst = std::max(worst, std::abs(mixed_error(n, np, r) - oracle::programmable_error({n, np, n}, r)));
                ++cases;
            }
    return {worst <= 1e-9, std::to_string(cases) + " cases, worst deviation " + fmt(worst)};
}

Verdict asymptotic_fit()
{
    double worst = 0.0;
    int at_n = 0;
    double at_r = 0.0;
    for (int n = 16; n <= 26; ++n)
        for (double r : {0.9, 1.0}) {
            const double pe = mixed_error(n, n, r);
            const double rel = std::abs(pe - 0.882 / (n * r * r)) / pe;
            if (rel > worst) {
                worst = rel;
                at_n = n;
                at_r = r;
            }
        }
    return {worst <= 0.07, "worst relative deviation " + fmt(worst) + " at n=" + std::to_string(at_n) + " r=" + fmt(at_r) +
                               " (bound 0.07)"};
}

Verdict mixed_asymptote_fit()
{
    double worst = 0.0;
    for (int k = 0; k <= 70; ++k) {
        const double r = 0.3 + 0.01 * k;
        worst = std::max(worst, std::abs(mixed_error(79, 1, r) - (0.5 - r / 3 + 1 / (3 * 79 * r))));
    }
    return {worst <= 2e-3, "worst |Pe - asymptote| over r in [0.3, 1]: " + fmt(worst)};
}

Verdict lm_equality()
{
    double worst = 0.0;
    for (int n = 1; n <= 50; ++n)
        worst = std::max(worst, std::abs(lm_error(n) - pure_rates(n, 1).pe));
    return {worst <= 1e-12, "worst deviation " + fmt(worst)};
}

Verdict excess_constants()
{
    const double lm = lm_error(1) - known_state_error(1.0) - (4 - std::sqrt(3.0)) / 12;
    const double eyd = eyd_qubit(1).excess_risk - (4 - std::sqrt(2.0)) / 12;
    const double rev = reversed_error_limit() - 5.0 / 12.0;
    const double worst = std::max({std::abs(lm), std::abs(eyd), std::abs(rev)});
    return {worst <= 1e-12, "worst deviation " + fmt(worst)};
}

Verdict seed_optimization()
{
    double worst_ratio = 0.0, worst_residual = 0.0, below = 0.0;
    int at_n = 0;
    double at_r = 0.0;
    for (int n = 1; n <= 3; ++n)
        for (int k = 1; k <= 9; ++k) {
            const double r = k / 10.0;
            const double known = known_state_error(r);
            const auto opt = lm_mixed_optimize(n, r);
            const double r_lm = opt.pe - known, r_opt = mixed_error(n, 1, r) - known;
            below = std::max(below, r_opt - r_lm);
            worst_residual = std::max(worst_residual, opt.residual);
            if (r_lm / r_opt > worst_ratio) {
                worst_ratio = r_lm / r_opt;
                at_n = n;
                at_r = r;
            }
        }
    Verdict v;
    v.pass = below <= 1e-10 && worst_ratio <= 1.01 && worst_residual <= 1e-8;
    v.detail = "worst R_LM/R_opt " + fmt(worst_ratio) + " at n=" + std::to_string(at_n) + " r=" + fmt(at_r) +
               " (bound 1.01), residual " + fmt(worst_residual) + ", max(R_opt - R_LM) " + fmt(below);
    return v;
}

Verdict margins()
{
    const auto weak0 = margin_success(9, 2, 0.0, MarginScheme::weak);
    const auto strong0 = margin_success(9, 2, 0.0, MarginScheme::strong);
    const double rc = weak0.critical;
    const auto weak_c = margin_success(9, 2, rc, MarginScheme::weak);
    const auto strong_c = margin_success(9, 2, rc, MarginScheme::strong);
    const double gap = std::max(std::abs(weak0.p_success - strong0.p_success), std::abs(weak_c.p_success - strong_c.p_success));
    return {std::abs(rc - 0.154) <= 1e-3 && gap <= 1e-10, "R_c=" + fmt(rc) + " weak/strong gap " + fmt(gap)};
}

Verdict reading()
{
    double worst_margin = 1e300, max_ratio = 0.0;
    for (int i = 0; i < 25; ++i) {
        const double a = 0.3 + 0.05 * i;
        const double opt = collective_excess_risk(a), eyd = eyd_minimum(a).excess_risk;
        worst_margin = std::min(worst_margin, eyd - opt);
        max_ratio = std::max(max_ratio, eyd / opt);
    }
    const auto res = finite_n_oracle({{1.0, 0.0}, 1.0, 64}, ReadingStrategy::collective);
    const double target = collective_excess_risk(1.0, 1.0);
    const double rel = std::abs(res.excess - target) / target;
    Verdict v;
    v.pass = worst_margin > 0.0 && max_ratio > 2.0 && rel <= 0.1;
    v.detail = "min(R_eyd - R_opt) " + fmt(worst_margin) + ", max ratio " + fmt(max_ratio) + ", oracle n=64 relative gap " +
               fmt(rel);
    return v;
}

double reconstruction_error(const Povm& p, const DecompositionResult& r)
{
    const auto rebuilt = reassemble(r, p.dim);
    double worst = 0.0;
    for (const auto& e : p.elements) {
        ComplexMatrix diff = e.op;
        if (const auto it = rebuilt.find(e.label); it != rebuilt.end())
            diff -= it->second;
        worst = std::max(worst, diff.max_abs());
    }
    return worst;
}

Verdict povm_decomposer()
{
    Verdict v;
    const auto bb = decompose(bb84_povm());
    const bool bb_ok = bb.terms.size() == 2 && std::abs(bb.terms[0].probability - 0.5) <= 1e-12 &&
                       std::abs(bb.terms[1].probability - 0.5) <= 1e-12;
    const auto pent = decompose(equatorial_povm(5));
    bool trines = pent.terms.size() == 3;
    for (const auto& t : pent.terms)
        trines = trines && t.extremal.elements.size() == 3;
    const double p1 = pent.terms.empty() ? 0.0 : pent.terms[0].probability;
    const bool pent_ok = trines && std::abs(p1 - 1 / std::sqrt(5.0)) <= 1e-10;

    std::mt19937_64 gen(7);
    double worst = 0.0;
    int over_count = 0;
    for (int it = 0; it < 200; ++it) {
        const int d = 2 + it % 3;
        const int count = 2 + (it * 7) % (3 * d * d - 1);
        const auto p = oracle::random_povm(d, count, gen);
        const auto r = decompose(p);
        worst = std::max(worst, reconstruction_error(p, r));
        const std::size_t expanded = rank1_expand(p).povm.elements.size();
        over_count += r.terms.size() > (expanded - 1) * d + 1;
    }
    v.pass = bb_ok && pent_ok && worst <= 1e-9 && over_count == 0;
    v.detail = std::string("BB84 ") + (bb_ok ? "ok" : "bad") + ", pentagon " + (pent_ok ? "ok" : "bad") + " p1=" +
               fmt(p1) + ", 200 random worst error " + fmt(worst) + ", term-count violations " +
               std::to_string(over_count);
    return v;
}

Verdict property_suites()
{
    int violations = 0, checks = 0;
    auto check = [&](bool ok) {
        ++checks;
        violations += !ok;
    };
    // Clebsch-Gordan orthogonality
    for (int t1 = 0; t1 <= 6; ++t1)
        for (int t2 = 0; t2 <= 5; ++t2)
            for (int tJ = std::abs(t1 - t2); tJ <= t1 + t2; tJ += 2)
                for (int tJp = std::abs(t1 - t2); tJp <= t1 + t2; tJp += 2)
                    for (int tM = -std::min(tJ, tJp); tM <= std::min(tJ, tJp); tM += 2) {
                        double s = 0.0;
                        for (int tm1 = -t1; tm1 <= t1; tm1 += 2)
                            if (std::abs(tM - tm1) <= t2)
                                s += clebsch_gordan(h(t1), h(tm1), h(t2), h(tM - tm1), h(tJ), h(tM)) *
                                     clebsch_gordan(h(t1), h(tm1), h(t2), h(tM - tm1), h(tJp), h(tM));
                        check(std::abs(s - (tJ == tJp)) <= 1e-12);
                    }
    // 6j tetrahedral symmetries
    for (int a = 0; a <= 4; ++a)
        for (int b = 0; b <= 4; ++b)
            for (int c = std::abs(a - b); c <= a + b; c += 2)
                for (int d = 0; d <= 4; ++d)
                    for (int e = 0; e <= 5; ++e)
                        for (int f = 0; f <= 5; ++f) {
                            const double v = wigner6j(h(a), h(b), h(c), h(d), h(e), h(f));
                            check(std::abs(v - wigner6j(h(b), h(a), h(c), h(e), h(d), h(f))) <= 1e-13);
                            check(std::abs(v - wigner6j(h(a), h(c), h(b), h(d), h(f), h(e))) <= 1e-13);
                            check(std::abs(v - wigner6j(h(d), h(e), h(c), h(a), h(b), h(f))) <= 1e-13);
                        }
    // multiplicity dimension identity
    for (int n = 1; n <= 20; ++n) {
        std::uint64_t total = 0;
        for (HalfInt j : irreps(n))
            total += multiplicity(n, j) * static_cast<std::uint64_t>(j.twice() + 1);
        check(total == std::uint64_t{1} << n);
    }
    // recoupling matrices are orthogonal
    for (int n = 1; n <= 4; ++n)
        for (HalfInt ja : irreps(n))
            for (HalfInt jb : irreps(n))
                for (HalfInt jc : irreps(n)) {
                    const int top = ja.twice() + jb.twice() + jc.twice();
                    for (int tJ = top % 2; tJ <= top; tJ += 2) {
                        if (recoupling_labels(ja, jb, jc, h(tJ)).jab.empty())
                            continue;
                        const auto lam = overlap_matrix(ja, jb, jc, h(tJ)).lambda;
                        check((lam * lam.adjoint() - RealMatrix::identity(lam.rows())).max_abs() <= 1e-10);
                    }
                }
    // trace norm equals the absolute eigenvalue sum
    std::mt19937_64 gen(5);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + trial % 7;
        ComplexMatrix m(d, d);
        for (int i = 0; i < d; ++i)
            for (int k = 0; k <= i; ++k) {
                const cplx z = i == k ? cplx(normal(gen), 0.0) : cplx(normal(gen), normal(gen));
                m(i, k) = z;
                m(k, i) = std::conj(z);
            }
        double abs_sum = 0.0;
        for (double ev : eigenvalues(m))
            abs_sum += std::abs(ev);
        check(std::abs(trace_norm(m) - abs_sum) <= 1e-12 * std::max(1.0, abs_sum));
    }
    return {violations == 0, std::to_string(checks) + " checks, " + std::to_string(violations) + " violations"};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "programmable pure rates (1,1)", 1e-3, pure_rates_one_one},
        {2, "block method vs dense oracle", 30, block_method_vs_dense},
        {3, "asymptotic fit 0.882/(n r^2)", 60, asymptotic_fit},
        {4, "mixed asymptote at n=79", 60, mixed_asymptote_fit},
        {5, "learning machine equals programmable bound", 5, lm_equality},
        {6, "excess-risk constants", 1, excess_constants},
        {7, "seed optimization", 600, seed_optimization},
        {8, "error margins (9,2)", 60, margins},
        {9, "quantum reading", 600, reading},
        {10, "POVM decomposer", 60, povm_decomposer},
        {11, "property suites", 600, property_suites},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_seconds;
        const bool pass = v.pass && in_time;
        failed += !pass;
        std::printf("%s %2d  %-44s %9.3fs  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs, v.detail.c_str(),
                    in_time ? "" : " [over time budget]");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace qdl {

struct PovmElement {
    std::string label;
    ComplexMatrix op;
};

struct Povm {
    int dim = 0;
    std::vector<PovmElement> elements;

    std::size_t size() const { return elements.size(); }
};

// Traceless Hermitian generators with tr(l_i l_j) = 2 delta_ij: symmetric
// off-diagonals, antisymmetric off-diagonals, then the diagonal ones.
inline std::vector<ComplexMatrix> gellmann_basis(int d)
{
    if (d < 2)
        throw DomainError("generator basis needs d >= 2");
    std::vector<ComplexMatrix> out;
    for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k) {
            ComplexMatrix m(d, d);
            m(j, k) = 1.0;
            m(k, j) = 1.0;
            out.push_back(std::move(m));
        }
    for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k) {
            ComplexMatrix m(d, d);
            m(j, k) = cplx(0.0, -1.0);
            m(k, j) = cplx(0.0, 1.0);
            out.push_back(std::move(m));
        }
    for (int l = 1; l < d; ++l) {
        ComplexMatrix m(d, d);
        const double c = std::sqrt(2.0 / (l * (l + 1.0)));
        for (int k = 0; k < l; ++k)
            m(k, k) = c;
        m(l, l) = -c * l;
        out.push_back(std::move(m));
    }
    return out;
}

// E = weight (1/d + v.l / 2)
struct BlochPoint {
    double weight = 0.0;
    std::vector<double> vec;
};

inline BlochPoint to_bloch(const ComplexMatrix& op, const std::vector<ComplexMatrix>& basis)
{
    BlochPoint p;
    p.weight = op.trace().real();
    if (!(p.weight > 0.0))
        throw DomainError("element with non-positive trace has no Bloch point");
    for (const auto& g : basis) {
        cplx t = 0.0;
        const std::size_t d = op.rows();
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k = 0; k < d; ++k)
                t += op(i, k) * g(k, i);
        p.vec.push_back(t.real() / p.weight);
    }
    return p;
}

inline ComplexMatrix from_bloch(const BlochPoint& p, const std::vector<ComplexMatrix>& basis, int d)
{
    ComplexMatrix m = ComplexMatrix::identity(d) * cplx(1.0 / d);
    for (std::size_t j = 0; j < basis.size(); ++j)
        m += basis[j] * cplx(0.5 * p.vec[j]);
    return m * cplx(p.weight);
}

struct PovmDiagnostics {
    double weight_residual = 0.0;   // |sum a_i - d|
    double bloch_residual = 0.0;    // |sum a_i v_i|
    double identity_residual = 0.0; // entrywise
    std::vector<double> min_eigenvalues;
    bool valid = false;
};

inline PovmDiagnostics validate_povm(const Povm& p)
{
    PovmDiagnostics out;
    if (p.dim < 1 || p.elements.empty())
        return out;
    ComplexMatrix sum(p.dim, p.dim);
    bool shapes = true, hermitian = true;
    for (const auto& e : p.elements) {
        if (e.op.rows() != static_cast<std::size_t>(p.dim) || e.op.cols() != static_cast<std::size_t>(p.dim)) {
            shapes = false;
            out.min_eigenvalues.push_back(-std::numeric_limits<double>::infinity());
            continue;
        }
        sum += e.op;
        if ((e.op - e.op.adjoint()).max_abs() > 1e-9) {
            hermitian = false;
            out.min_eigenvalues.push_back(-std::numeric_limits<double>::infinity());
            continue;
        }
        const auto ev = eigenvalues(0.5 * (e.op + e.op.adjoint()));
        out.min_eigenvalues.push_back(ev.back());
    }
    if (!shapes)
        return out;
    out.identity_residual = (sum - ComplexMatrix::identity(p.dim)).max_abs();
    out.weight_residual = std::abs(sum.trace().real() - p.dim);
    if (p.dim >= 2) {
        const auto basis = gellmann_basis(p.dim);
        double s2 = 0.0;
        for (const auto& g : basis) {
            cplx t = 0.0;
            for (int i = 0; i < p.dim; ++i)
                for (int k = 0; k < p.dim; ++k)
                    t += sum(i, k) * g(k, i);
            s2 += t.real() * t.real();
        }
        out.bloch_residual = std::sqrt(s2);
    }
    out.valid = hermitian && out.identity_residual <= 1e-9 &&
                std::all_of(out.min_eigenvalues.begin(), out.min_eigenvalues.end(), [](double x) { return x >= -1e-9; });
    return out;
}

inline void require_povm(const Povm& p)
{
    if (p.dim < 2)
        throw DomainError("POVM dimension must be at least 2");
    std::set<std::string> seen;
    for (const auto& e : p.elements)
        if (!seen.insert(e.label).second)
            throw DomainError("duplicate POVM label '" + e.label + "'");
    const auto diag = validate_povm(p);
    if (!diag.valid) {
        std::string why = "not a POVM: identity residual " + std::to_string(diag.identity_residual);
        for (std::size_t i = 0; i < diag.min_eigenvalues.size(); ++i)
            if (diag.min_eigenvalues[i] < -1e-9)
                why += ", element '" + p.elements[i].label + "' has eigenvalue " + std::to_string(diag.min_eigenvalues[i]);
        throw DomainError(why);
    }
}

struct Rank1Expansion {
    Povm povm;
    std::map<std::string, std::string> relabel; // new label -> original label
};

// Splits every element along its eigenbasis. Eigenvalues under 1e-10 tr(E) are dropped.
inline Rank1Expansion rank1_expand(const Povm& p)
{
    require_povm(p);
    Rank1Expansion out;
    out.povm.dim = p.dim;
    for (const auto& e : p.elements) {
        const double tr = e.op.trace().real();
        if (tr <= 1e-14)
            continue; // zero element, physically absent
        const auto es = herm_eig(e.op);
        std::vector<std::size_t> keep;
        for (std::size_t k = 0; k < es.values.size(); ++k)
            if (es.values[k] > 1e-10 * tr)
                keep.push_back(k);
        for (std::size_t n = 0; n < keep.size(); ++n) {
            const std::size_t k = keep[n];
            std::vector<cplx> ket(p.dim);
            for (int i = 0; i < p.dim; ++i)
                ket[i] = es.vectors(i, k);
            ComplexMatrix part = projector(ket) * cplx(es.values[k]);
            if (keep.size() == 1)
                part = e.op; // already rank one: keep it verbatim
            const std::string label = keep.size() == 1 ? e.label : e.label + "#" + std::to_string(n);
            out.povm.elements.push_back({label, std::move(part)});
            out.relabel[label] = e.label;
        }
    }
    return out;
}

namespace detail {

struct LpColumns {
    std::vector<std::vector<double>> cols; // each (v, 1)
    std::vector<double> rhs;               // (0, d)
};

inline LpColumns vertex_system(std::span<const BlochPoint> points, int d)
{
    LpColumns lp;
    const std::size_t m = static_cast<std::size_t>(d) * d;
    for (const auto& p : points) {
        if (p.vec.size() + 1 != m)
            throw DomainError("Bloch vector length does not match the dimension");
        auto c = p.vec;
        c.push_back(1.0);
        lp.cols.push_back(std::move(c));
    }
    lp.rhs.assign(m, 0.0);
    lp.rhs.back() = d;
    return lp;
}

struct PhaseOne {
    std::vector<double> x;
    std::vector<double> dual; // multipliers of the rows, original orientation
    double infeasibility = 0.0;
};

// Solves M z = rhs (or M^T z = rhs) by Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> m, std::vector<double> rhs, bool transpose)
{
    const std::size_t n = rhs.size();
    if (transpose)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                std::swap(m[i][j], m[j][i]);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c]))
                piv = r;
        if (std::abs(m[piv][c]) < 1e-14)
            throw InvariantViolation("simplex basis became singular");
        std::swap(m[c], m[piv]);
        std::swap(rhs[c], rhs[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = m[r][c] / m[c][c];
            if (f == 0.0)
                continue;
            for (std::size_t k = c; k < n; ++k)
                m[r][k] -= f * m[c][k];
            rhs[r] -= f * rhs[c];
        }
    }
    std::vector<double> z(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = rhs[i];
        for (std::size_t k = i + 1; k < n; ++k)
            acc -= m[i][k] * z[k];
        z[i] = acc / m[i][i];
    }
    return z;
}

// Phase-1 revised simplex on {x >= 0 : A x = b} with Bland's rule. The basis
// is re-solved from scratch every pivot, so errors never accumulate.
inline PhaseOne phase_one(const LpColumns& lp)
{
    const std::size_t m = lp.rhs.size(), n = lp.cols.size();
    std::vector<double> sign(m, 1.0), b(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (lp.rhs[i] < 0.0)
            sign[i] = -1.0;
        b[i] = sign[i] * lp.rhs[i];
    }
    auto column = [&](std::size_t j) {
        std::vector<double> c(m, 0.0);
        if (j < n)
            for (std::size_t i = 0; i < m; ++i)
                c[i] = sign[i] * lp.cols[j][i];
        else
            c[j - n] = 1.0;
        return c;
    };
    auto cost = [&](std::size_t j) { return j >= n ? 1.0 : 0.0; };
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i)
        basis[i] = n + i;
    auto basis_matrix = [&] {
        std::vector<std::vector<double>> bm(m, std::vector<double>(m));
        for (std::size_t k = 0; k < m; ++k) {
            const auto c = column(basis[k]);
            for (std::size_t i = 0; i < m; ++i)
                bm[i][k] = c[i];
        }
        return bm;
    };

    std::vector<double> xb, y;
    for (int iter = 0;; ++iter) {
        if (iter > 100000)
            throw ConvergenceError("simplex exceeded its pivot budget", 0.0);
        const auto bm = basis_matrix();
        xb = dense_solve(bm, b, false);
        std::vector<double> cb(m);
        for (std::size_t k = 0; k < m; ++k)
            cb[k] = cost(basis[k]);
        y = dense_solve(bm, cb, true);

        std::optional<std::size_t> enter;
        for (std::size_t j = 0; j < n + m && !enter; ++j) {
            if (std::find(basis.begin(), basis.end(), j) != basis.end())
                continue;
            const auto c = column(j);
            double r = cost(j);
            for (std::size_t i = 0; i < m; ++i)
                r -= y[i] * c[i];
            if (r < -1e-10)
                enter = j;
        }
        if (!enter)
            break;
        const auto dir = dense_solve(bm, column(*enter), false);
        std::optional<std::size_t> leave;
        double best = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            if (dir[k] <= 1e-9)
                continue;
            const double ratio = std::max(0.0, xb[k]) / dir[k];
            if (!leave || ratio < best - 1e-13 || (ratio <= best + 1e-13 && basis[k] < basis[*leave])) {
                leave = k;
                best = std::min(best, ratio);
                if (leave == k)
                    best = ratio;
            }
        }
        if (!leave)
            throw InvariantViolation("phase-one problem reported unbounded");
        basis[*leave] = *enter;
    }

    PhaseOne out;
    out.x.assign(n, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        const double v = std::max(0.0, xb[k]);
        if (basis[k] < n)
            out.x[basis[k]] = v;
        else
            out.infeasibility += v;
    }
    out.dual.assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k)
        out.dual[k] = y[k] * sign[k];
    return out;
}

inline double lp_residual(const LpColumns& lp, std::span<const double> x)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < lp.rhs.size(); ++i) {
        double s = -lp.rhs[i];
        for (std::size_t j = 0; j < x.size(); ++j)
            s += lp.cols[j][i] * x[j];
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

// Iterative refinement of A_S x_S = b on the support of x; the basis solve
// alone can leave a residual of order cond(B) * eps.
inline void refine_on_support(const LpColumns& lp, std::vector<double>& x)
{
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] > 0.0)
            support.push_back(j);
    const std::size_t m = lp.rhs.size(), k = support.size();
    if (k == 0 || k > m)
        return;
    std::vector<std::vector<double>> gram(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
            for (std::size_t i = 0; i < m; ++i)
                gram[a][b] += lp.cols[support[a]][i] * lp.cols[support[b]][i];
    for (int pass = 0; pass < 3; ++pass) {
        std::vector<double> res(lp.rhs);
        for (std::size_t j : support)
            for (std::size_t i = 0; i < m; ++i)
                res[i] -= lp.cols[j][i] * x[j];
        std::vector<double> rhs(k, 0.0);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t i = 0; i < m; ++i)
                rhs[a] += lp.cols[support[a]][i] * res[i];
        std::vector<double> step;
        try {
            step = dense_solve(gram, rhs, false);
        } catch (const InvariantViolation&) {
            return;
        }
        auto trial = x;
        for (std::size_t a = 0; a < k; ++a)
            trial[support[a]] += step[a];
        if (*std::min_element(trial.begin(), trial.end()) < 0.0 || lp_residual(lp, trial) >= lp_residual(lp, x))
            return;
        x = std::move(trial);
    }
}

} // namespace detail

// A vertex of {x >= 0 : sum x_i (v_i, 1) = (0, d)}; each vertex is an extremal
// rank-1 POVM built on the given directions.
inline std::vector<double> find_extremal_vertex(std::span<const BlochPoint> points, int d)
{
    if (d < 2)
        throw DomainError("dimension must be at least 2");
    const auto lp = detail::vertex_system(points, d);
    const auto sol = detail::phase_one(lp);
    if (sol.infeasibility > 1e-9) {
        // Farkas: the negated multipliers separate every Bloch vector from the origin
        const double w0 = -sol.dual.back();
        std::vector<double> nu(sol.dual.size() - 1);
        for (std::size_t j = 0; j < nu.size(); ++j)
            nu[j] = w0 != 0.0 ? -sol.dual[j] / w0 : -sol.dual[j];
        throw InfeasibleError("Bloch vectors lie in an open half-space: not a POVM", nu);
    }
    auto x = sol.x;
    for (double& v : x)
        if (v < 1e-12)
            v = 0.0;
    detail::refine_on_support(lp, x);
    if (detail::lp_residual(lp, x) > 1e-10)
        throw InvariantViolation("vertex violates the POVM condition");
    return x;
}

struct IsExtremalResult {
    bool extremal = false;
    std::vector<double> witness; // sum_i witness_i E_i = 0 when not extremal
};

namespace detail {

inline bool is_rank_one(const ComplexMatrix& op)
{
    const auto ev = eigenvalues(op);
    const double tr = op.trace().real();
    return ev.size() < 2 || ev[1] <= 1e-10 * std::max(tr, 1e-300);
}

// Real coordinates of a Hermitian operator.
inline std::vector<double> hermitian_coordinates(const ComplexMatrix& op)
{
    std::vector<double> out;
    for (std::size_t i = 0; i < op.rows(); ++i) {
        out.push_back(op(i, i).real());
        for (std::size_t k = i + 1; k < op.cols(); ++k) {
            out.push_back(op(i, k).real());
            out.push_back(op(i, k).imag());
        }
    }
    return out;
}

// Null vector of the columns, if any, by Gaussian elimination with partial pivoting.
inline std::optional<std::vector<double>> null_vector(const std::vector<std::vector<double>>& cols)
{
    const std::size_t n = cols.size();
    if (n == 0)
        return std::nullopt;
    const std::size_t m = cols[0].size();
    // independence does not care about scale, so every column gets unit norm
    std::vector<std::vector<double>> a(m, std::vector<double>(n));
    std::vector<double> norms(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (double v : cols[j])
            norms[j] += v * v;
        norms[j] = std::sqrt(norms[j]);
        for (std::size_t i = 0; i < m; ++i)
            a[i][j] = norms[j] > 0.0 ? cols[j][i] / norms[j] : 0.0;
    }
    const double tol = 1e-10;
    std::vector<std::size_t> pivot_col;
    std::size_t row = 0;
    std::optional<std::size_t> free_col;
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t best = row;
        for (std::size_t i = row; i < m; ++i)
            if (std::abs(a[i][j]) > std::abs(a[best][j]))
                best = i;
        if (row >= m || std::abs(a[best][j]) <= tol) {
            free_col = j;
            break;
        }
        std::swap(a[row], a[best]);
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row)
                continue;
            const double f = a[i][j] / a[row][j];
            for (std::size_t k = j; k < n; ++k)
                a[i][k] -= f * a[row][k];
        }
        pivot_col.push_back(j);
        ++row;
    }
    if (!free_col)
        return std::nullopt;
    std::vector<double> w(n, 0.0);
    w[*free_col] = 1.0;
    for (std::size_t r = 0; r < pivot_col.size(); ++r)
        w[pivot_col[r]] = -a[r][*free_col] / a[r][pivot_col[r]];
    for (std::size_t j = 0; j < n; ++j)
        if (norms[j] > 0.0)
            w[j] /= norms[j];
    return w;
}

} // namespace detail

// A rank-1 POVM is extremal iff its elements are linearly independent.
inline IsExtremalResult is_extremal(const Povm& p)
{
    require_povm(p);
    std::vector<std::vector<double>> cols;
    for (const auto& e : p.elements) {
        if (e.op.max_abs() == 0.0)
            continue;
        if (!detail::is_rank_one(e.op))
            throw DomainError("element '" + e.label + "' is not rank one; expand with rank1_expand first");
        cols.push_back(detail::hermitian_coordinates(e.op));
    }
    IsExtremalResult out;
    if (auto w = detail::null_vector(cols))
        out.witness = std::move(*w);
    else
        out.extremal = cols.size() <= static_cast<std::size_t>(p.dim) * p.dim;
    return out;
}

struct DecompositionTerm {
    double probability = 0.0;      // weight in the overall mixture
    double step_probability = 0.0; // extraction probability at this step
    Povm extremal;
};

struct DecompositionResult {
    std::vector<DecompositionTerm> terms;
    std::map<std::string, std::string> relabel; // extremal outcome label -> original label
};

enum class DecompositionOrder { any, fewest_outcomes };

namespace detail {

// Smallest-support vertex for qubits: antipodal pairs first, then triples.
inline std::optional<std::vector<double>> small_qubit_vertex(std::span<const BlochPoint> pts)
{
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double gap = 0.0;
            for (int k = 0; k < 3; ++k)
                gap = std::max(gap, std::abs(pts[i].vec[k] + pts[j].vec[k]));
            if (gap < 1e-9) {
                std::vector<double> x(n, 0.0);
                x[i] = x[j] = 1.0;
                return x;
            }
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                const BlochPoint sub[3] = {pts[i], pts[j], pts[k]};
                std::vector<double> x;
                try {
                    x = find_extremal_vertex(sub, 2);
                } catch (const InfeasibleError&) {
                    continue;
                }
                if (std::count_if(x.begin(), x.end(), [](double v) { return v > 0.0; }) != 3)
                    continue;
                std::vector<double> full(n, 0.0);
                full[i] = x[0];
                full[j] = x[1];
                full[k] = x[2];
                return full;
            }
    return std::nullopt;
}

} // namespace detail

// Convex decomposition into extremal rank-1 POVMs by repeated vertex extraction.
inline DecompositionResult decompose(const Povm& p, DecompositionOrder order = DecompositionOrder::any)
{
    if (order == DecompositionOrder::fewest_outcomes && p.dim != 2)
        throw UnsupportedCriterion("the fewest-outcomes ordering is only established for qubits");
    const auto expanded = rank1_expand(p);
    const int d = p.dim;
    const auto basis = gellmann_basis(d);
    const auto& elems = expanded.povm.elements;

    std::vector<ComplexMatrix> unit; // trace-one elements
    std::vector<BlochPoint> pts;
    for (const auto& e : elems) {
        pts.push_back(to_bloch(e.op, basis));
        unit.push_back(e.op * cplx(1.0 / pts.back().weight));
    }
    std::vector<std::size_t> live(elems.size());
    for (std::size_t i = 0; i < live.size(); ++i)
        live[i] = i;

    DecompositionResult out;
    out.relabel = expanded.relabel;
    double remaining = 1.0;
    while (!live.empty()) {
        std::vector<BlochPoint> sub;
        for (std::size_t i : live)
            sub.push_back(pts[i]);
        std::vector<double> x;
        if (order == DecompositionOrder::fewest_outcomes)
            if (auto v = detail::small_qubit_vertex(sub))
                x = std::move(*v);
        if (x.empty()) {
            try {
                x = find_extremal_vertex(sub, d);
            } catch (const InfeasibleError&) {
                // a remainder this small is cancellation noise, not a measurement
                double left = 0.0;
                for (const auto& q : sub)
                    left += q.weight;
                if (left > 1e-8 * d)
                    throw;
                break;
            }
        }

        // pts[i].weight holds the unnormalized remainder, so round-off is
        // never amplified by renormalization
        double extracted = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < live.size(); ++k)
            if (x[k] > 0.0)
                extracted = std::min(extracted, sub[k].weight / x[k]);
        if (!(extracted > 0.0) || !std::isfinite(extracted))
            throw InvariantViolation("extraction step is not a probability");
        double step = extracted / remaining;
        const bool last = step >= 1.0 - 1e-12;
        if (last)
            step = 1.0;

        DecompositionTerm term;
        term.step_probability = step;
        term.probability = last ? remaining : extracted;
        term.extremal.dim = d;
        for (std::size_t k = 0; k < live.size(); ++k)
            if (x[k] > 0.0)
                term.extremal.elements.push_back({elems[live[k]].label, unit[live[k]] * cplx(x[k])});
        out.terms.push_back(std::move(term));
        if (last)
            break;

        std::vector<std::size_t> next;
        for (std::size_t k = 0; k < live.size(); ++k) {
            const std::size_t i = live[k];
            // everything that hits zero leaves together
            if (x[k] > 0.0 && pts[i].weight / x[k] <= extracted * (1.0 + 1e-12))
                continue;
            const double a = pts[i].weight - extracted * x[k];
            if (a <= 1e-14 * d)
                continue; // round-off remnant
            pts[i].weight = a;
            next.push_back(i);
        }
        if (next.size() >= live.size())
            throw InvariantViolation("extraction did not remove any outcome");
        live = std::move(next);
        remaining -= extracted;
        double left = 0.0;
        for (std::size_t i : live)
            left += pts[i].weight;
        if (left <= 1e-10 * d)
            break;
    }
    // absorb the round-off remainder so the weights form a distribution
    double total = 0.0;
    for (const auto& t : out.terms)
        total += t.probability;
    for (auto& t : out.terms)
        t.probability /= total;
    return out;
}

inline DecompositionResult ordered_decompose(const Povm& p)
{
    return decompose(p, DecompositionOrder::fewest_outcomes);
}

// Sum over terms of probability times the extremal, folded back onto the
// original labels.
inline std::map<std::string, ComplexMatrix> reassemble(const DecompositionResult& r, int d)
{
    std::map<std::string, ComplexMatrix> out;
    for (const auto& t : r.terms)
        for (const auto& e : t.extremal.elements) {
            const auto it = r.relabel.find(e.label);
            const std::string& label = it == r.relabel.end() ? e.label : it->second;
            auto [slot, fresh] = out.try_emplace(label, ComplexMatrix(d, d));
            slot->second += e.op * cplx(t.probability);
        }
    return out;
}

// Example measurements.
inline Povm bb84_povm()
{
    Povm p{2, {}};
    const double h = 0.5;
    p.elements.push_back({"z+", ComplexMatrix{{h, 0.0}, {0.0, 0.0}}});
    p.elements.push_back({"z-", ComplexMatrix{{0.0, 0.0}, {0.0, h}}});
    p.elements.push_back({"x+", ComplexMatrix{{h / 2, h / 2}, {h / 2, h / 2}}});
    p.elements.push_back({"x-", ComplexMatrix{{h / 2, -h / 2}, {-h / 2, h / 2}}});
    return p;
}

// N equally spaced equatorial directions, weights 2/N.
inline Povm equatorial_povm(int count)
{
    if (count < 2)
        throw DomainError("need at least two directions");
    Povm p{2, {}};
    for (int k = 0; k < count; ++k) {
        const double phi = 2.0 * M_PI * k / count;
        const std::vector<cplx> ket{1.0 / std::sqrt(2.0), std::polar(1.0 / std::sqrt(2.0), phi)};
        p.elements.push_back({"e" + std::to_string(k), projector(ket) * cplx(2.0 / count)});
    }
    return p;
}

} // namespace qdl

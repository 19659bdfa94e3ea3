#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <algorithm>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace qdl {

// Neumaier compensated sum. Order of add() calls fixes the result bit for bit.
class CompensatedSum {
public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs)
{
    CompensatedSum s;
    for (double x : xs)
        s.add(x);
    return s.value();
}

inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

inline double log_binomial(int n, int k)
{
    if (k < 0 || k > n)
        return -std::numeric_limits<double>::infinity();
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

inline double binomial(int n, int k)
{
    if (k < 0 || k > n)
        return 0.0;
    if (n <= 60) {
        double c = 1.0;
        k = std::min(k, n - k);
        for (int i = 1; i <= k; ++i)
            c = c * (n - k + i) / i;
        return std::round(c);
    }
    return std::exp(log_binomial(n, k));
}

struct GoldenResult {
    double x;
    double value;
};

// Minimum of a unimodal function on [lo, hi]. Endpoints are compared too,
// since the minimum may sit on the boundary.
inline GoldenResult golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                                       double tol = 1e-10)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    GoldenResult best{(a + b) / 2, f((a + b) / 2)};
    for (double x : {lo, hi}) {
        const double fx = f(x);
        if (fx < best.value)
            best = {x, fx};
    }
    return best;
}

struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

inline Quadrature golub_welsch(std::span<const double> offdiag, double mu0)
{
    const std::size_t n = offdiag.size() + 1;
    RealMatrix jac(n, n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        jac(k, k + 1) = offdiag[k];
        jac(k + 1, k) = offdiag[k];
    }
    auto es = herm_eig(jac);
    Quadrature q;
    for (std::size_t i = n; i-- > 0;) {
        q.nodes.push_back(es.values[i]);
        q.weights.push_back(mu0 * es.vectors(0, i) * es.vectors(0, i));
    }
    return q;
}

} // namespace detail

// Nodes and weights for the integral of f(x) exp(-x^2) over the real line.
inline Quadrature gauss_hermite(int order)
{
    if (order < 1)
        throw DomainError("quadrature order must be positive");
    std::vector<double> off(order - 1);
    for (int k = 1; k < order; ++k)
        off[k - 1] = std::sqrt(k / 2.0);
    return detail::golub_welsch(off, std::sqrt(M_PI));
}

// Nodes and weights on [-1, 1] with unit weight.
inline Quadrature gauss_legendre(int order)
{
    if (order < 1)
        throw DomainError("quadrature order must be positive");
    std::vector<double> off(order - 1);
    for (int k = 1; k < order; ++k)
        off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    return detail::golub_welsch(off, 2.0);
}

// Worker count: QDL_THREADS if set and positive, else the hardware count.
inline unsigned thread_count()
{
    if (const char* env = std::getenv("QDL_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0)
            return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Evaluates fn(i) for i in [0, count) and returns results in index order.
// Threads only affect scheduling, never the values or their order.
template <class R, class F>
std::vector<R> parallel_map(std::size_t count, F&& fn)
{
    std::vector<R> out(count);
    const unsigned workers = std::min<std::size_t>(thread_count(), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            out[i] = fn(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers)
                    out[i] = fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

} // namespace qdl

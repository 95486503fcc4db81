#include "advreg/kernels.hpp"

#include <cmath>
#include <vector>

#include <omp.h>

namespace advreg::kernels {

namespace {
// Below this many multiply-adds the fork/join overhead dominates.
constexpr Index kParallelWork = 1 << 15;
constexpr Index kRowBlock = 64;
}  // namespace

int max_threads()
{
    return omp_get_max_threads();
}

namespace serial {

void gemv(const Matrix& X, const Vector& v, Vector& out)
{
    const Index n = X.rows();
    const Index p = X.cols();
    out.setZero(n);
    for (Index j = 0; j < p; ++j) {
        const double vj = v[j];
        const double* col = X.col(j).data();
        for (Index i = 0; i < n; ++i) out[i] += col[i] * vj;
    }
}

void gemv_t(const Matrix& X, const Vector& v, Vector& out)
{
    const Index n = X.rows();
    const Index p = X.cols();
    out.resize(p);
    for (Index j = 0; j < p; ++j) {
        const double* col = X.col(j).data();
        double acc = 0.0;
        for (Index i = 0; i < n; ++i) acc += col[i] * v[i];
        out[j] = acc;
    }
}

void residuals(const Matrix& X, const Vector& beta, const Vector& Y, Vector& out)
{
    gemv(X, beta, out);
    for (Index i = 0; i < out.size(); ++i) out[i] -= Y[i];
}

double adv_square_sum(const Vector& r, double a)
{
    double acc = 0.0;
    for (Index i = 0; i < r.size(); ++i) {
        const double t = std::abs(r[i]) + a;
        acc += t * t;
    }
    return acc;
}

}  // namespace serial

namespace parallel {

void gemv(const Matrix& X, const Vector& v, Vector& out)
{
    const Index n = X.rows();
    const Index p = X.cols();
    out.setZero(n);
    const Index blocks = (n + kRowBlock - 1) / kRowBlock;
    // Row blocks are independent; within a block columns are visited in
    // ascending order exactly like the serial kernel.
#pragma omp parallel for schedule(static) if (n * p >= kParallelWork)
    for (Index b = 0; b < blocks; ++b) {
        const Index lo = b * kRowBlock;
        const Index hi = std::min(n, lo + kRowBlock);
        for (Index j = 0; j < p; ++j) {
            const double vj = v[j];
            const double* col = X.col(j).data();
            for (Index i = lo; i < hi; ++i) out[i] += col[i] * vj;
        }
    }
}

void gemv_t(const Matrix& X, const Vector& v, Vector& out)
{
    const Index n = X.rows();
    const Index p = X.cols();
    out.resize(p);
#pragma omp parallel for schedule(static) if (n * p >= kParallelWork)
    for (Index j = 0; j < p; ++j) {
        const double* col = X.col(j).data();
        double acc = 0.0;
        for (Index i = 0; i < n; ++i) acc += col[i] * v[i];
        out[j] = acc;
    }
}

void residuals(const Matrix& X, const Vector& beta, const Vector& Y, Vector& out)
{
    gemv(X, beta, out);
    const Index n = out.size();
#pragma omp parallel for schedule(static) if (n >= kParallelWork)
    for (Index i = 0; i < n; ++i) out[i] -= Y[i];
}

double adv_square_sum(const Vector& r, double a)
{
    const Index n = r.size();
    std::vector<double> terms(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) if (n >= kParallelWork)
    for (Index i = 0; i < n; ++i) {
        const double t = std::abs(r[i]) + a;
        terms[static_cast<std::size_t>(i)] = t * t;
    }
    // Fixed-order reduction keeps runs reproducible across thread counts.
    double acc = 0.0;
    for (double t : terms) acc += t;
    return acc;
}

}  // namespace parallel

}  // namespace advreg::kernels

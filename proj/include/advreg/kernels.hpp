#pragma once

// Dense data-parallel kernels used by the objective and the solver.
//
// Every kernel exists twice: `serial` is the reference implementation kept
// for testing, `parallel` splits the outer loop across OpenMP threads. Both
// accumulate each output element in the same index order, so their results
// are bitwise identical for any thread count.

#include "advreg/types.hpp"

namespace advreg::kernels {

namespace serial {

/// out = X * v
void gemv(const Matrix& X, const Vector& v, Vector& out);
/// out = X^T * v
void gemv_t(const Matrix& X, const Vector& v, Vector& out);
/// out = X * beta - Y
void residuals(const Matrix& X, const Vector& beta, const Vector& Y, Vector& out);
/// sum_i (|r_i| + a)^2, summed in index order.
double adv_square_sum(const Vector& r, double a);

}  // namespace serial

namespace parallel {

void gemv(const Matrix& X, const Vector& v, Vector& out);
void gemv_t(const Matrix& X, const Vector& v, Vector& out);
void residuals(const Matrix& X, const Vector& beta, const Vector& Y, Vector& out);
double adv_square_sum(const Vector& r, double a);

}  // namespace parallel

// Entry points used by the library; they dispatch to the parallel versions.
inline void gemv(const Matrix& X, const Vector& v, Vector& out) { parallel::gemv(X, v, out); }
inline void gemv_t(const Matrix& X, const Vector& v, Vector& out) { parallel::gemv_t(X, v, out); }
inline void residuals(const Matrix& X, const Vector& beta, const Vector& Y, Vector& out)
{
    parallel::residuals(X, beta, Y, out);
}
inline double adv_square_sum(const Vector& r, double a) { return parallel::adv_square_sum(r, a); }

/// Number of OpenMP threads the parallel kernels will use.
int max_threads();

}  // namespace advreg::kernels

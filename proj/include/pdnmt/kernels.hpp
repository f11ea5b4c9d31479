// Dense math kernels used by the tensor engine. Every kernel exists twice:
// a serial reference implementation under kernels::ref and an OpenMP variant
// under kernels::omp. Both variants use the same summation order (parallelism
// is only over independent output elements, and reductions use fixed-size
// chunks combined in index order), so their results are bitwise identical
// regardless of thread count. The free functions dispatch on the active
// backend.
#pragma once

#include <cstdint>

namespace pdnmt::kernels {

enum class Backend { Serial, OpenMP };

Backend backend();
void set_backend(Backend b);

// Thread count for the OpenMP backend. 0 keeps the OpenMP runtime default.
void set_threads(int n);
int threads();

// Reduction chunk size. sum() adds each chunk left to right and combines the
// partial sums in chunk order, so the result does not depend on threading.
inline constexpr int64_t kSumChunk = 4096;

namespace ref {

// c[m x n] = a[m x k] * b[k x n]
void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n);
// c[m x n] = a[m x k] * b[n x k]^T
void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n);
// c[m x n] = a[k x m]^T * b[k x n]
void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n);
// y[m] = a[m x k] * x[k]
void gemv(const double* a, const double* x, double* y, int m, int k);
// y[k] = a[m x k]^T * x[m]
void gemv_t(const double* a, const double* x, double* y, int m, int k);
// c[m x n] = x[m] * y[n]^T
void outer(const double* x, const double* y, double* c, int m, int n);

void add(const double* a, const double* b, double* y, int64_t n);
void sub(const double* a, const double* b, double* y, int64_t n);
void mul(const double* a, const double* b, double* y, int64_t n);
// y = alpha * x + beta
void affine(const double* x, double* y, double alpha, double beta, int64_t n);
// y += x
void acc(const double* x, double* y, int64_t n);
// y += alpha * x
void acc_scaled(const double* x, double* y, double alpha, int64_t n);
// row-broadcast: y[r, :] = a[r, :] + v[:]
void add_rowvec(const double* a, const double* v, double* y, int rows, int cols);

void vtanh(const double* x, double* y, int64_t n);
void vsigmoid(const double* x, double* y, int64_t n);

double sum(const double* x, int64_t n);
// out[c] = sum_r g[r, c]
void colsum(const double* g, double* out, int rows, int cols);

// row-wise softmax with max subtraction
void softmax_rows(const double* x, double* y, int rows, int cols);
// log softmax of a single row
void log_softmax_row(const double* x, double* y, int cols);

// rows of e indexed by ids gathered into out[count x dim]
void gather_rows(const double* e, const int* ids, double* out, int count, int dim);
// grad scatter for gather_rows: ge[ids[i], :] += g[i, :]
void scatter_add_rows(double* ge, const int* ids, const double* g, int count, int dim);

}  // namespace ref

namespace omp {

void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n);
void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n);
void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n);
void gemv(const double* a, const double* x, double* y, int m, int k);
void gemv_t(const double* a, const double* x, double* y, int m, int k);
void outer(const double* x, const double* y, double* c, int m, int n);

void add(const double* a, const double* b, double* y, int64_t n);
void sub(const double* a, const double* b, double* y, int64_t n);
void mul(const double* a, const double* b, double* y, int64_t n);
void affine(const double* x, double* y, double alpha, double beta, int64_t n);
void acc(const double* x, double* y, int64_t n);
void acc_scaled(const double* x, double* y, double alpha, int64_t n);
void add_rowvec(const double* a, const double* v, double* y, int rows, int cols);

void vtanh(const double* x, double* y, int64_t n);
void vsigmoid(const double* x, double* y, int64_t n);

double sum(const double* x, int64_t n);
void colsum(const double* g, double* out, int rows, int cols);

void softmax_rows(const double* x, double* y, int rows, int cols);
void log_softmax_row(const double* x, double* y, int cols);

void gather_rows(const double* e, const int* ids, double* out, int count, int dim);
void scatter_add_rows(double* ge, const int* ids, const double* g, int count, int dim);

}  // namespace omp

// Backend-dispatching entry points.
void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n);
void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n);
void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n);
void gemv(const double* a, const double* x, double* y, int m, int k);
void gemv_t(const double* a, const double* x, double* y, int m, int k);
void outer(const double* x, const double* y, double* c, int m, int n);
void add(const double* a, const double* b, double* y, int64_t n);
void sub(const double* a, const double* b, double* y, int64_t n);
void mul(const double* a, const double* b, double* y, int64_t n);
void affine(const double* x, double* y, double alpha, double beta, int64_t n);
void acc(const double* x, double* y, int64_t n);
void acc_scaled(const double* x, double* y, double alpha, int64_t n);
void add_rowvec(const double* a, const double* v, double* y, int rows, int cols);
void vtanh(const double* x, double* y, int64_t n);
void vsigmoid(const double* x, double* y, int64_t n);
double sum(const double* x, int64_t n);
void colsum(const double* g, double* out, int rows, int cols);
void softmax_rows(const double* x, double* y, int rows, int cols);
void log_softmax_row(const double* x, double* y, int cols);
void gather_rows(const double* e, const int* ids, double* out, int count, int dim);
void scatter_add_rows(double* ge, const int* ids, const double* g, int count, int dim);

}  // namespace pdnmt::kernels

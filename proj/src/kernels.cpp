#include "pdnmt/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pdnmt::kernels {

namespace {
std::atomic<Backend> g_backend{Backend::OpenMP};
std::atomic<int> g_threads{0};

// Work below this many flops is not worth a parallel region.
constexpr int64_t kMinParallelWork = 16384;

inline int active_threads() {
#ifdef _OPENMP
  int t = g_threads.load(std::memory_order_relaxed);
  return t > 0 ? t : omp_get_max_threads();
#else
  return 1;
#endif
}
}  // namespace

Backend backend() { return g_backend.load(std::memory_order_relaxed); }
void set_backend(Backend b) { g_backend.store(b, std::memory_order_relaxed); }
void set_threads(int n) { g_threads.store(n, std::memory_order_relaxed); }
int threads() { return active_threads(); }

namespace ref {

void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<int64_t>(i) * n;
    std::fill(ci, ci + n, 0.0);
    const double* ai = a + static_cast<int64_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double av = ai[p];
      const double* bp = b + static_cast<int64_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<int64_t>(i) * k;
    double* ci = c + static_cast<int64_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<int64_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] = acc;
    }
  }
}

void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n) {
  // a is k x m, result m x n, c[i][j] = sum_p a[p][i] * b[p][j]
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<int64_t>(i) * n;
    std::fill(ci, ci + n, 0.0);
    for (int p = 0; p < k; ++p) {
      const double av = a[static_cast<int64_t>(p) * m + i];
      const double* bp = b + static_cast<int64_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void gemv(const double* a, const double* x, double* y, int m, int k) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<int64_t>(i) * k;
    double acc = 0.0;
    for (int p = 0; p < k; ++p) acc += ai[p] * x[p];
    y[i] = acc;
  }
}

void gemv_t(const double* a, const double* x, double* y, int m, int k) {
  // y[j] = sum_i a[i][j] * x[i]; column-wise serial accumulation per output
  for (int j = 0; j < k; ++j) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += a[static_cast<int64_t>(i) * k + j] * x[i];
    y[j] = acc;
  }
}

void outer(const double* x, const double* y, double* c, int m, int n) {
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<int64_t>(i) * n;
    const double xi = x[i];
    for (int j = 0; j < n; ++j) ci[j] = xi * y[j];
  }
}

void add(const double* a, const double* b, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void affine(const double* x, double* y, double alpha, double beta, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = alpha * x[i] + beta;
}

void acc(const double* x, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] += x[i];
}

void acc_scaled(const double* x, double* y, double alpha, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_rowvec(const double* a, const double* v, double* y, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* ar = a + static_cast<int64_t>(r) * cols;
    double* yr = y + static_cast<int64_t>(r) * cols;
    for (int c = 0; c < cols; ++c) yr[c] = ar[c] + v[c];
  }
}

void vtanh(const double* x, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void vsigmoid(const double* x, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

double sum(const double* x, int64_t n) {
  const int64_t chunks = (n + kSumChunk - 1) / kSumChunk;
  double total = 0.0;
  for (int64_t c = 0; c < chunks; ++c) {
    const int64_t lo = c * kSumChunk;
    const int64_t hi = std::min(lo + kSumChunk, n);
    double part = 0.0;
    for (int64_t i = lo; i < hi; ++i) part += x[i];
    total += part;
  }
  return total;
}

void colsum(const double* g, double* out, int rows, int cols) {
  for (int c = 0; c < cols; ++c) {
    double acc = 0.0;
    for (int r = 0; r < rows; ++r) acc += g[static_cast<int64_t>(r) * cols + c];
    out[c] = acc;
  }
}

void softmax_rows(const double* x, double* y, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<int64_t>(r) * cols;
    double* yr = y + static_cast<int64_t>(r) * cols;
    double mx = xr[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, xr[c]);
    double z = 0.0;
    for (int c = 0; c < cols; ++c) {
      yr[c] = std::exp(xr[c] - mx);
      z += yr[c];
    }
    const double inv = 1.0 / z;
    for (int c = 0; c < cols; ++c) yr[c] *= inv;
  }
}

void log_softmax_row(const double* x, double* y, int cols) {
  double mx = x[0];
  for (int c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
  double z = 0.0;
  for (int c = 0; c < cols; ++c) z += std::exp(x[c] - mx);
  const double lz = std::log(z) + mx;
  for (int c = 0; c < cols; ++c) y[c] = x[c] - lz;
}

void gather_rows(const double* e, const int* ids, double* out, int count, int dim) {
  for (int i = 0; i < count; ++i) {
    const double* src = e + static_cast<int64_t>(ids[i]) * dim;
    double* dst = out + static_cast<int64_t>(i) * dim;
    std::copy(src, src + dim, dst);
  }
}

void scatter_add_rows(double* ge, const int* ids, const double* g, int count, int dim) {
  // Serial over rows: repeated ids accumulate in row order.
  for (int i = 0; i < count; ++i) {
    double* dst = ge + static_cast<int64_t>(ids[i]) * dim;
    const double* src = g + static_cast<int64_t>(i) * dim;
    for (int d = 0; d < dim; ++d) dst[d] += src[d];
  }
}

}  // namespace ref

namespace omp {

// Each OpenMP kernel parallelizes only over outputs that are computed
// independently, with the inner accumulation loop identical to ref. That
// keeps results bitwise equal to the serial reference for any thread count.

void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n) {
  const int64_t work = static_cast<int64_t>(m) * k * n;
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (work >= kMinParallelWork)
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<int64_t>(i) * n;
    std::fill(ci, ci + n, 0.0);
    const double* ai = a + static_cast<int64_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double av = ai[p];
      const double* bp = b + static_cast<int64_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n) {
  const int64_t work = static_cast<int64_t>(m) * k * n;
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (work >= kMinParallelWork)
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<int64_t>(i) * k;
    double* ci = c + static_cast<int64_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<int64_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] = acc;
    }
  }
}

void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n) {
  const int64_t work = static_cast<int64_t>(m) * k * n;
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (work >= kMinParallelWork)
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<int64_t>(i) * n;
    std::fill(ci, ci + n, 0.0);
    for (int p = 0; p < k; ++p) {
      const double av = a[static_cast<int64_t>(p) * m + i];
      const double* bp = b + static_cast<int64_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void gemv(const double* a, const double* x, double* y, int m, int k) {
  const int64_t work = static_cast<int64_t>(m) * k;
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (work >= kMinParallelWork)
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<int64_t>(i) * k;
    double acc = 0.0;
    for (int p = 0; p < k; ++p) acc += ai[p] * x[p];
    y[i] = acc;
  }
}

void gemv_t(const double* a, const double* x, double* y, int m, int k) {
  const int64_t work = static_cast<int64_t>(m) * k;
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (work >= kMinParallelWork)
  for (int j = 0; j < k; ++j) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += a[static_cast<int64_t>(i) * k + j] * x[i];
    y[j] = acc;
  }
}

void outer(const double* x, const double* y, double* c, int m, int n) {
  const int64_t work = static_cast<int64_t>(m) * n;
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (work >= kMinParallelWork)
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<int64_t>(i) * n;
    const double xi = x[i];
    for (int j = 0; j < n; ++j) ci[j] = xi * y[j];
  }
}

void add(const double* a, const double* b, double* y, int64_t n) {
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (n >= kMinParallelWork)
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* y, int64_t n) {
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (n >= kMinParallelWork)
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* y, int64_t n) {
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (n >= kMinParallelWork)
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void affine(const double* x, double* y, double alpha, double beta, int64_t n) {
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (n >= kMinParallelWork)
  for (int64_t i = 0; i < n; ++i) y[i] = alpha * x[i] + beta;
}

void acc(const double* x, double* y, int64_t n) {
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (n >= kMinParallelWork)
  for (int64_t i = 0; i < n; ++i) y[i] += x[i];
}

void acc_scaled(const double* x, double* y, double alpha, int64_t n) {
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (n >= kMinParallelWork)
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_rowvec(const double* a, const double* v, double* y, int rows, int cols) {
  const int64_t work = static_cast<int64_t>(rows) * cols;
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (work >= kMinParallelWork)
  for (int r = 0; r < rows; ++r) {
    const double* ar = a + static_cast<int64_t>(r) * cols;
    double* yr = y + static_cast<int64_t>(r) * cols;
    for (int c = 0; c < cols; ++c) yr[c] = ar[c] + v[c];
  }
}

void vtanh(const double* x, double* y, int64_t n) {
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (n >= kMinParallelWork / 8)
  for (int64_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void vsigmoid(const double* x, double* y, int64_t n) {
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (n >= kMinParallelWork / 8)
  for (int64_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

double sum(const double* x, int64_t n) {
  const int64_t chunks = (n + kSumChunk - 1) / kSumChunk;
  if (chunks == 1) return ref::sum(x, n);
  std::vector<double> parts(static_cast<size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static) num_threads(active_threads())
  for (int64_t c = 0; c < chunks; ++c) {
    const int64_t lo = c * kSumChunk;
    const int64_t hi = std::min(lo + kSumChunk, n);
    double part = 0.0;
    for (int64_t i = lo; i < hi; ++i) part += x[i];
    parts[static_cast<size_t>(c)] = part;
  }
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

void colsum(const double* g, double* out, int rows, int cols) {
  const int64_t work = static_cast<int64_t>(rows) * cols;
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (work >= kMinParallelWork)
  for (int c = 0; c < cols; ++c) {
    double acc = 0.0;
    for (int r = 0; r < rows; ++r) acc += g[static_cast<int64_t>(r) * cols + c];
    out[c] = acc;
  }
}

void softmax_rows(const double* x, double* y, int rows, int cols) {
  const int64_t work = static_cast<int64_t>(rows) * cols;
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (work >= kMinParallelWork / 4)
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<int64_t>(r) * cols;
    double* yr = y + static_cast<int64_t>(r) * cols;
    double mx = xr[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, xr[c]);
    double z = 0.0;
    for (int c = 0; c < cols; ++c) {
      yr[c] = std::exp(xr[c] - mx);
      z += yr[c];
    }
    const double inv = 1.0 / z;
    for (int c = 0; c < cols; ++c) yr[c] *= inv;
  }
}

void log_softmax_row(const double* x, double* y, int cols) {
  ref::log_softmax_row(x, y, cols);
}

void gather_rows(const double* e, const int* ids, double* out, int count, int dim) {
  const int64_t work = static_cast<int64_t>(count) * dim;
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (work >= kMinParallelWork)
  for (int i = 0; i < count; ++i) {
    const double* src = e + static_cast<int64_t>(ids[i]) * dim;
    double* dst = out + static_cast<int64_t>(i) * dim;
    std::copy(src, src + dim, dst);
  }
}

void scatter_add_rows(double* ge, const int* ids, const double* g, int count, int dim) {
  // Parallel over columns: for a fixed column, repeated ids accumulate in
  // the same row order as ref, so the result is bitwise identical.
  const int64_t work = static_cast<int64_t>(count) * dim;
#pragma omp parallel for schedule(static) num_threads(active_threads()) \
    if (work >= kMinParallelWork)
  for (int d = 0; d < dim; ++d) {
    for (int i = 0; i < count; ++i) {
      ge[static_cast<int64_t>(ids[i]) * dim + d] += g[static_cast<int64_t>(i) * dim + d];
    }
  }
}

}  // namespace omp

#define PDNMT_DISPATCH(fn, ...)                 \
  do {                                          \
    if (backend() == Backend::OpenMP)           \
      return omp::fn(__VA_ARGS__);              \
    return ref::fn(__VA_ARGS__);                \
  } while (0)

void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n) {
  PDNMT_DISPATCH(gemm_nn, a, b, c, m, k, n);
}
void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n) {
  PDNMT_DISPATCH(gemm_nt, a, b, c, m, k, n);
}
void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n) {
  PDNMT_DISPATCH(gemm_tn, a, b, c, m, k, n);
}
void gemv(const double* a, const double* x, double* y, int m, int k) {
  PDNMT_DISPATCH(gemv, a, x, y, m, k);
}
void gemv_t(const double* a, const double* x, double* y, int m, int k) {
  PDNMT_DISPATCH(gemv_t, a, x, y, m, k);
}
void outer(const double* x, const double* y, double* c, int m, int n) {
  PDNMT_DISPATCH(outer, x, y, c, m, n);
}
void add(const double* a, const double* b, double* y, int64_t n) {
  PDNMT_DISPATCH(add, a, b, y, n);
}
void sub(const double* a, const double* b, double* y, int64_t n) {
  PDNMT_DISPATCH(sub, a, b, y, n);
}
void mul(const double* a, const double* b, double* y, int64_t n) {
  PDNMT_DISPATCH(mul, a, b, y, n);
}
void affine(const double* x, double* y, double alpha, double beta, int64_t n) {
  PDNMT_DISPATCH(affine, x, y, alpha, beta, n);
}
void acc(const double* x, double* y, int64_t n) { PDNMT_DISPATCH(acc, x, y, n); }
void acc_scaled(const double* x, double* y, double alpha, int64_t n) {
  PDNMT_DISPATCH(acc_scaled, x, y, alpha, n);
}
void add_rowvec(const double* a, const double* v, double* y, int rows, int cols) {
  PDNMT_DISPATCH(add_rowvec, a, v, y, rows, cols);
}
void vtanh(const double* x, double* y, int64_t n) { PDNMT_DISPATCH(vtanh, x, y, n); }
void vsigmoid(const double* x, double* y, int64_t n) { PDNMT_DISPATCH(vsigmoid, x, y, n); }
double sum(const double* x, int64_t n) {
  if (backend() == Backend::OpenMP) return omp::sum(x, n);
  return ref::sum(x, n);
}
void colsum(const double* g, double* out, int rows, int cols) {
  PDNMT_DISPATCH(colsum, g, out, rows, cols);
}
void softmax_rows(const double* x, double* y, int rows, int cols) {
  PDNMT_DISPATCH(softmax_rows, x, y, rows, cols);
}
void log_softmax_row(const double* x, double* y, int cols) {
  PDNMT_DISPATCH(log_softmax_row, x, y, cols);
}
void gather_rows(const double* e, const int* ids, double* out, int count, int dim) {
  PDNMT_DISPATCH(gather_rows, e, ids, out, count, dim);
}
void scatter_add_rows(double* ge, const int* ids, const double* g, int count, int dim) {
  PDNMT_DISPATCH(scatter_add_rows, ge, ids, g, count, dim);
}

#undef PDNMT_DISPATCH

}  // namespace pdnmt::kernels

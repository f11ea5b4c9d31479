// Timing comparison of the serial reference kernels against the OpenMP
// variants across a size sweep, plus a bitwise equality check on every run.
//
//   bench_kernels [--threads N] [--repeats N]
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "pdnmt/kernels.hpp"
#include "pdnmt/rng.hpp"

using namespace pdnmt;

namespace {

std::vector<double> random_vec(int64_t n, uint64_t stream) {
  Rng rng(42, stream);
  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

template <typename F>
double time_ms(int repeats, F&& fn) {
  // One warmup, then best-of-repeats.
  fn();
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
  int threads = 0;
  int repeats = 5;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--threads" && i + 1 < argc) threads = std::atoi(argv[++i]);
    else if (std::string(argv[i]) == "--repeats" && i + 1 < argc) repeats = std::atoi(argv[++i]);
  }
  kernels::set_threads(threads);

  std::printf("%-10s %8s %12s %12s %8s %8s\n", "kernel", "size", "serial(ms)", "openmp(ms)", "speedup",
              "equal");
  bool all_equal = true;

  for (int n : {64, 128, 256, 512, 1024}) {
    const auto a = random_vec(static_cast<int64_t>(n) * n, 1);
    const auto b = random_vec(static_cast<int64_t>(n) * n, 2);
    std::vector<double> c_ref(static_cast<size_t>(n) * n), c_omp(c_ref.size());
    const double t_ref = time_ms(repeats, [&] { kernels::ref::gemm_nn(a.data(), b.data(), c_ref.data(), n, n, n); });
    const double t_omp = time_ms(repeats, [&] { kernels::omp::gemm_nn(a.data(), b.data(), c_omp.data(), n, n, n); });
    const bool eq = bitwise_equal(c_ref, c_omp);
    all_equal = all_equal && eq;
    std::printf("%-10s %8d %12.3f %12.3f %8.2f %8s\n", "gemm_nn", n, t_ref, t_omp, t_ref / t_omp,
                eq ? "yes" : "NO");
  }

  for (int rows : {256, 1024, 4096}) {
    const int cols = 256;
    const auto x = random_vec(static_cast<int64_t>(rows) * cols, 3);
    std::vector<double> y_ref(static_cast<size_t>(rows) * cols), y_omp(y_ref.size());
    const double t_ref = time_ms(repeats, [&] { kernels::ref::softmax_rows(x.data(), y_ref.data(), rows, cols); });
    const double t_omp = time_ms(repeats, [&] { kernels::omp::softmax_rows(x.data(), y_omp.data(), rows, cols); });
    const bool eq = bitwise_equal(y_ref, y_omp);
    all_equal = all_equal && eq;
    std::printf("%-10s %8d %12.3f %12.3f %8.2f %8s\n", "softmax", rows, t_ref, t_omp, t_ref / t_omp,
                eq ? "yes" : "NO");
  }

  for (int64_t n : {int64_t(1) << 16, int64_t(1) << 20, int64_t(1) << 23}) {
    const auto x = random_vec(n, 4);
    std::vector<double> y_ref(static_cast<size_t>(n)), y_omp(y_ref.size());
    const double t_ref = time_ms(repeats, [&] { kernels::ref::vtanh(x.data(), y_ref.data(), n); });
    const double t_omp = time_ms(repeats, [&] { kernels::omp::vtanh(x.data(), y_omp.data(), n); });
    const bool eq = bitwise_equal(y_ref, y_omp);
    all_equal = all_equal && eq;
    std::printf("%-10s %8lld %12.3f %12.3f %8.2f %8s\n", "tanh", static_cast<long long>(n), t_ref,
                t_omp, t_ref / t_omp, eq ? "yes" : "NO");
  }

  for (int64_t n : {int64_t(1) << 16, int64_t(1) << 22}) {
    const auto x = random_vec(n, 5);
    double s_ref = 0.0, s_omp = 0.0;
    const double t_ref = time_ms(repeats, [&] { s_ref = kernels::ref::sum(x.data(), n); });
    const double t_omp = time_ms(repeats, [&] { s_omp = kernels::omp::sum(x.data(), n); });
    const bool eq = std::memcmp(&s_ref, &s_omp, sizeof(double)) == 0;
    all_equal = all_equal && eq;
    std::printf("%-10s %8lld %12.3f %12.3f %8.2f %8s\n", "sum", static_cast<long long>(n), t_ref, t_omp,
                t_ref / t_omp, eq ? "yes" : "NO");
  }

  std::printf("threads: %d, all results bitwise equal: %s\n", kernels::threads(),
              all_equal ? "yes" : "NO");
  return all_equal ? 0 : 1;
}

// Compares the OpenMP kernels against their serial reference twins: Gram
// assembly, argmax scans, and the chunked sums behind the MMD terms. Also
// verifies that both paths agree bitwise.
#include <chrono>
#include <cstdio>

#include "kmc/gram.hpp"

using namespace kmc;

namespace {

double now() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

PointSet synth(long n, long dim, uint64_t seed) {
  Rng rng(seed);
  Matrix pts(n, dim);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < dim; ++j) pts(i, j) = rng.normal();
  return make_pointset(std::move(pts));
}

}  // namespace

int main(int argc, char** argv) {
  long n = argc > 1 ? std::atol(argv[1]) : 1500;
  std::printf("threads: %d, n: %ld\n", max_threads(), n);

  PointSet ps = synth(n, 4, 7);
  Kernel k = poly_no_const_kernel(3);
  Kernel klin = linear_kernel();

  double t0 = now();
  GramMatrix gp = gram(klin, ps);
  double t1 = now();
  GramMatrix gs = gram_serial(klin, ps);
  double t2 = now();
  bool same = (gp.entries.array() == gs.entries.array()).all();
  std::printf("gram   parallel %.3fs  serial %.3fs  bitwise-equal %s\n", t1 - t0, t2 - t1,
              same ? "yes" : "NO");

  Rng rng(3);
  Vector v(n);
  for (long i = 0; i < n; ++i) v[i] = rng.normal();
  long reps = 2000;
  t0 = now();
  long ap = 0;
  for (long r = 0; r < reps; ++r) ap ^= det_argmax(n, [&](long i) { return v[i] + double(r % 3); });
  t1 = now();
  long as = 0;
  for (long r = 0; r < reps; ++r)
    as ^= det_argmax_serial(n, [&](long i) { return v[i] + double(r % 3); });
  t2 = now();
  std::printf("argmax parallel %.3fs  serial %.3fs  equal %s\n", t1 - t0, t2 - t1,
              ap == as ? "yes" : "NO");

  t0 = now();
  double sp = det_sum(n * n, [&](long idx) { return gp.entries(idx / n, idx % n); });
  t1 = now();
  double ss = det_sum_serial(n * n, [&](long idx) { return gs.entries(idx / n, idx % n); });
  t2 = now();
  std::printf("sum    parallel %.3fs  serial %.3fs  bitwise-equal %s\n", t1 - t0, t2 - t1,
              sp == ss ? "yes" : "NO");
  (void)k;
  return same && ap == as && sp == ss ? 0 : 1;
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kmc {

// Thrown for bad user input / unmet preconditions (CLI exit code 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a numerical routine fails or does not converge (CLI exit code 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a stated invariant is violated at runtime (CLI exit code 4).
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

// splitmix64 / xoshiro256** . Self-contained so that seeded runs are
// bit-identical across platforms; std:: distributions are not.
struct Rng {
  uint64_t s[4];

  explicit Rng(uint64_t seed = 0) {
    uint64_t x = seed + 0x9e3779b97f4a7c15ULL;
    for (auto& si : s) {
      uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      si = z ^ (z >> 31);
    }
  }

  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t next() {
    uint64_t result = rotl(s[1] * 5, 7) * 9;
    uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }

  // uniform in [0,1)
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  uint64_t uniform_int(uint64_t n) { return next() % n; }

  // Box-Muller, one value per call (the unused sine partner is dropped to
  // keep the state sequence simple and reproducible).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }
};

namespace detail {
constexpr int kSumChunk = 1024;
}

// Chunked sum with a fixed chunking scheme: chunk partials are accumulated
// serially and then combined in chunk order, so the result is bitwise
// identical whether the chunk loop runs on one thread or many.
template <class F>
double det_sum(long n, F&& term) {
  if (n <= 0) return 0.0;
  long nchunks = (n + detail::kSumChunk - 1) / detail::kSumChunk;
  std::vector<double> partial(size_t(nchunks), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long c = 0; c < nchunks; ++c) {
    long lo = c * detail::kSumChunk;
    long hi = std::min(n, lo + detail::kSumChunk);
    double acc = 0.0;
    for (long i = lo; i < hi; ++i) acc += term(i);
    partial[size_t(c)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

template <class F>
double det_sum_serial(long n, F&& term) {
  if (n <= 0) return 0.0;
  long nchunks = (n + detail::kSumChunk - 1) / detail::kSumChunk;
  double total = 0.0;
  for (long c = 0; c < nchunks; ++c) {
    long lo = c * detail::kSumChunk;
    long hi = std::min(n, lo + detail::kSumChunk);
    double acc = 0.0;
    for (long i = lo; i < hi; ++i) acc += term(i);
    total += acc;
  }
  return total;
}

// Argmax with deterministic tie handling: strictly larger value wins, equal
// values go to the smaller index. Thread-local bests are merged in block
// order so scheduling cannot change the winner.
template <class F>
long det_argmax(long n, F&& value) {
  if (n <= 0) throw UsageError("det_argmax: empty candidate set");
  long nblocks = std::min<long>(n, 4 * std::max(1, max_threads()));
  std::vector<long> bidx(static_cast<size_t>(nblocks));
  std::vector<double> bval(static_cast<size_t>(nblocks));
  long per = (n + nblocks - 1) / nblocks;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long b = 0; b < nblocks; ++b) {
    long lo = b * per, hi = std::min(n, lo + per);
    long best = lo;
    double bv = lo < hi ? value(lo) : -std::numeric_limits<double>::infinity();
    for (long i = lo + 1; i < hi; ++i) {
      double v = value(i);
      if (v > bv) {
        bv = v;
        best = i;
      }
    }
    bidx[size_t(b)] = best;
    bval[size_t(b)] = bv;
  }
  long best = bidx[0];
  double bv = bval[0];
  for (long b = 1; b < nblocks; ++b) {
    if (bval[size_t(b)] > bv) {
      bv = bval[size_t(b)];
      best = bidx[size_t(b)];
    }
  }
  return best;
}

template <class F>
long det_argmax_serial(long n, F&& value) {
  if (n <= 0) throw UsageError("det_argmax: empty candidate set");
  long best = 0;
  double bv = value(0);
  for (long i = 1; i < n; ++i) {
    double v = value(i);
    if (v > bv) {
      bv = v;
      best = i;
    }
  }
  return best;
}

}  // namespace kmc

#include <doctest.h>

#include "kmc/gram.hpp"

using namespace kmc;

namespace {

PointSet random_points(Rng& rng, long n, long dim) {
  Matrix m(n, dim);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < dim; ++j) m(i, j) = rng.normal();
  return make_pointset(std::move(m));
}

}  // namespace

TEST_CASE("parallel gram equals the serial reference bitwise at any thread count") {
  Rng rng(7);
  PointSet ps = random_points(rng, 200, 3);
  Kernel k = linear_kernel();
  GramMatrix serial = gram_serial(k, ps);
  for (int threads : {1, 2, 4}) {
    set_threads(threads);
    GramMatrix par = gram(k, ps);
    CHECK((par.entries.array() == serial.entries.array()).all());
  }
  set_threads(0);
}

TEST_CASE("det_sum is bitwise stable across thread counts") {
  Rng rng(9);
  long n = 100000;
  std::vector<double> v(static_cast<size_t>(n));
  for (auto& x : v) x = rng.normal();
  double serial = det_sum_serial(n, [&](long i) { return v[size_t(i)]; });
  for (int threads : {1, 2, 4}) {
    set_threads(threads);
    CHECK(det_sum(n, [&](long i) { return v[size_t(i)]; }) == serial);
  }
  set_threads(0);
}

TEST_CASE("det_argmax picks the smallest index among ties on every schedule") {
  long n = 5000;
  std::vector<double> v(size_t(n), 1.0);
  v[1234] = 2.0;
  v[4321] = 2.0;
  for (int threads : {1, 2, 4}) {
    set_threads(threads);
    CHECK(det_argmax(n, [&](long i) { return v[size_t(i)]; }) == 1234);
  }
  set_threads(0);
  CHECK(det_argmax_serial(n, [&](long i) { return v[size_t(i)]; }) == 1234);
}

TEST_CASE("gram validation flags asymmetric and indefinite matrices") {
  GramMatrix ok{Matrix::Identity(3, 3), "id"};
  CHECK_NOTHROW(ok.validate());
  Matrix bad = Matrix::Identity(3, 3);
  bad(0, 1) = 0.5;  // asymmetric
  CHECK_THROWS_AS((GramMatrix{bad, "asym"}).validate(), InvariantError);
  Matrix indef = Matrix::Identity(2, 2);
  indef(0, 0) = -1.0;
  CHECK_THROWS_AS((GramMatrix{indef, "indef"}).validate(), InvariantError);
}

TEST_CASE("pivoted cholesky finds the numerical rank and spans it") {
  Rng rng(3);
  long n = 30;
  Matrix a(2, 1);
  a << 1.0, -0.5;
  Kernel k = feature_map_kernel(a);  // rank-2 features over scalars... rank 1 in x
  PointSet ps = random_points(rng, n, 1);
  GramMatrix g = gram(k, ps);
  auto order = pivoted_cholesky_order(g.entries, n);
  CHECK(order.size() == 1);  // phi(x) = x * (1,-0.5): one direction

  GramMatrix g2 = gram(poly_no_const_kernel(3), ps);
  auto order2 = pivoted_cholesky_order(g2.entries, n);
  CHECK(order2.size() == 3);
}

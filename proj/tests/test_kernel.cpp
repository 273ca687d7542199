#include <doctest.h>

#include <Eigen/Dense>

#include "kmc/gram.hpp"

using namespace kmc;

namespace {

PointSet pts1d(std::initializer_list<double> xs) {
  Matrix m(long(xs.size()), 1);
  long i = 0;
  for (double x : xs) m(i++, 0) = x;
  return make_pointset(std::move(m));
}

PointSet random_points(Rng& rng, long n, long dim) {
  Matrix m(n, dim);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < dim; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return make_pointset(std::move(m));
}

double min_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("gram on the delta kernel is the identity") {
  PointSet ps = pts1d({1.0, 2.0, 3.0});
  GramMatrix g = gram(delta_kernel(), ps);
  CHECK((g.entries - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gram of a rank-two explicit-feature kernel is diag(1, r^2)") {
  double r = 0.7;
  // phi(x) = (h(x), f(x)) with h(0)=1,h(1)=0 and f(0)=0,f(1)=r.
  Kernel k = feature_map_kernel(
      [r](const Eigen::RowVectorXd& x) {
        Vector v(2);
        v << (x[0] == 0.0 ? 1.0 : 0.0), (x[0] == 1.0 ? r : 0.0);
        return v;
      },
      "hf_pair");
  GramMatrix g = gram(k, pts1d({0.0, 1.0}));
  CHECK(g.entries(0, 0) == doctest::Approx(1.0));
  CHECK(g.entries(1, 1) == doctest::Approx(r * r));
  CHECK(g.entries(0, 1) == 0.0);
}

TEST_CASE("poly kernel evaluates directly") {
  Kernel k2 = poly_no_const_kernel(2);
  Eigen::RowVectorXd one(1);
  one << 1.0;
  CHECK(k2(one, one) == doctest::Approx(2.0));
  Eigen::RowVectorXd x(1), y(1);
  x << 2.0;
  y << 3.0;
  CHECK(squared(linear_kernel())(x, y) == doctest::Approx(36.0));
}

TEST_CASE("plus_constant adds one everywhere") {
  Kernel k0 = zero_kernel();
  Kernel kp = plus_constant(k0);
  Eigen::RowVectorXd a(1), b(1);
  a << 0.3;
  b << -0.8;
  CHECK(kp(a, b) == 1.0);

  Kernel k1p = plus_constant(poly_no_const_kernel(1));
  Eigen::RowVectorXd x(1), y(1);
  x << 1.0;
  y << -1.0;
  CHECK(k1p(x, y) == doctest::Approx(0.0));

  Rng rng(11);
  PointSet ps = random_points(rng, 6, 1);
  GramMatrix g = gram(poly_no_const_kernel(2), ps);
  GramMatrix gp = gram(plus_constant(poly_no_const_kernel(2)), ps);
  CHECK((gp.entries - g.entries - Matrix::Ones(6, 6)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("minus_constant on the delta kernel with c_sq from the const-norm estimate") {
  PointSet grid = pts1d({0.0, 1.0});
  double norm_sq = estimate_const_norm(delta_kernel(), grid);
  CHECK(norm_sq == doctest::Approx(2.0));  // 1^T I^-1 1
  Kernel km = minus_constant(delta_kernel(), 1.0 / norm_sq);
  Eigen::RowVectorXd a(1), b(1);
  a << 0.0;
  b << 1.0;
  CHECK(km(a, a) == doctest::Approx(0.5));
  CHECK(km(a, b) == doctest::Approx(-0.5));
  CHECK(min_eig(gram(km, grid).entries) >= -1e-12);
}

TEST_CASE("minus_constant rejects an oversized c_sq on a validation grid") {
  PointSet grid = pts1d({0.0, 1.0, 2.0});
  // For the delta kernel 1/||1||^2 = 1/3 here; anything larger breaks PSD.
  CHECK_NOTHROW(minus_constant(delta_kernel(), 1.0 / 3.0, grid));
  CHECK_THROWS_AS(minus_constant(delta_kernel(), 0.9, grid), NumericalError);
}

TEST_CASE("minus_constant with c_sq = 0 is the same kernel, constant kernel collapses") {
  Kernel k = poly_no_const_kernel(2);
  Kernel same = minus_constant(k, 0.0);
  Eigen::RowVectorXd x(1), y(1);
  x << 0.4;
  y << 0.9;
  CHECK(same(x, y) == k(x, y));
  Kernel z = minus_constant(constant_kernel(1.0), 1.0);
  CHECK(z(x, y) == 0.0);
}

TEST_CASE("estimate_const_norm: constant-1 kernel has unit norm; poly lacks constants") {
  PointSet grid = pts1d({-1.0, -0.5, 0.0, 0.5, 1.0});
  CHECK(estimate_const_norm(constant_kernel(1.0), grid) == doctest::Approx(1.0));
  CHECK_THROWS_AS(estimate_const_norm(poly_no_const_kernel(4), grid), NumericalError);
}

TEST_CASE("squared kernel leaves the delta kernel fixed and squares the Gram") {
  PointSet ps = pts1d({0.0, 1.0, 2.0});
  GramMatrix gd = gram(delta_kernel(), ps);
  GramMatrix gds = gram(squared(delta_kernel()), ps);
  CHECK((gd.entries - gds.entries).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(5);
  PointSet q = random_points(rng, 7, 2);
  GramMatrix g = gram(linear_kernel(), q);
  GramMatrix gs = gram(squared(linear_kernel()), q);
  CHECK((gs.entries - g.entries.cwiseProduct(g.entries)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("y_weighted kernel on augmented points") {
  Kernel ky = y_weighted(delta_kernel());
  Eigen::RowVectorXd a(2), b(2);
  a << 1.0, 0.5;
  b << 1.0, 0.5;
  CHECK(ky(a, b) == doctest::Approx(1.0));  // y1=y2=1 reduces to k
  a << 0.0, 0.5;
  CHECK(ky(a, b) == 0.0);  // y1=0 kills everything
  a << 2.0, 0.5;
  b << 3.0, 0.5;
  CHECK(ky(a, b) == doctest::Approx(6.0));
}

TEST_CASE("y_weighted Gram equals D gram(k) D") {
  Rng rng(17);
  long n = 8;
  Matrix aug(n, 3);
  for (long i = 0; i < n; ++i) {
    aug(i, 0) = rng.normal();  // y
    aug(i, 1) = rng.uniform(-1, 1);
    aug(i, 2) = rng.uniform(-1, 1);
  }
  PointSet augset = make_pointset(aug);
  PointSet xonly = make_pointset(aug.rightCols(2));
  Matrix d = aug.col(0).asDiagonal();
  Matrix lhs = gram(y_weighted(linear_kernel()), augset).entries;
  Matrix rhs = d * gram(linear_kernel(), xonly).entries * d;
  // Equality up to multiplication-order rounding (the mirrored triangle and
  // D*G*D associate the three factors differently).
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-15 * rhs.cwiseAbs().maxCoeff());
}

TEST_CASE("extended kernel ignores y and squares") {
  Kernel ke = extended(linear_kernel());
  Eigen::RowVectorXd a(2), b(2);
  a << 42.0, 2.0;
  b << -3.0, 3.0;
  CHECK(ke(a, b) == doctest::Approx(36.0));
}

TEST_CASE("sum kernel: identities and gram additivity") {
  Kernel k = poly_no_const_kernel(2);
  Kernel s = sum(k, zero_kernel());
  Eigen::RowVectorXd x(1), y(1);
  x << 0.2;
  y << -0.9;
  CHECK(s(x, y) == k(x, y));

  // sum(extended, y_weighted) at y=1 is k^2 + k.
  Kernel both = sum(extended(linear_kernel()), y_weighted(linear_kernel()));
  Eigen::RowVectorXd a(2), b(2);
  a << 1.0, 0.5;
  b << 1.0, 0.25;
  double kv = 0.5 * 0.25;
  CHECK(both(a, b) == doctest::Approx(kv * kv + kv));

  Rng rng(23);
  PointSet ps = random_points(rng, 6, 1);
  Matrix g1 = gram(poly_no_const_kernel(1), ps).entries;
  Matrix g2 = gram(poly_no_const_kernel(3), ps).entries;
  Matrix gs = gram(sum(poly_no_const_kernel(1), poly_no_const_kernel(3)), ps).entries;
  CHECK((gs - g1 - g2).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("plus/minus round trip restores the Gram") {
  Rng rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    PointSet ps = random_points(rng, 6, 1);
    Kernel k = poly_no_const_kernel(2 + int(rng.uniform_int(3)));
    Matrix g = gram(k, ps).entries;
    Matrix round = gram(minus_constant(plus_constant(k), 1.0), ps).entries;
    CHECK((g - round).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("symmetry and PSD across built-in and derived kernels") {
  Rng rng(1234);
  std::vector<Kernel> kernels;
  kernels.push_back(linear_kernel());
  kernels.push_back(poly_no_const_kernel(3));
  kernels.push_back(delta_kernel());
  Matrix a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  kernels.push_back(feature_map_kernel(a));
  kernels.push_back(plus_constant(poly_no_const_kernel(2)));
  kernels.push_back(squared(linear_kernel()));
  kernels.push_back(sum(linear_kernel(), squared(linear_kernel())));
  // Augmented-domain kernels; points are (y, x).
  kernels.push_back(y_weighted(linear_kernel()));
  kernels.push_back(extended(linear_kernel()));
  kernels.push_back(sum(extended(linear_kernel()), y_weighted(linear_kernel())));

  for (int trial = 0; trial < 100; ++trial) {
    size_t which = size_t(trial) % kernels.size();
    const Kernel& k = kernels[which];
    long dim = (which == 1 || which == 4) ? 1 : 2;  // polynomial kernels are scalar
    PointSet ps = random_points(rng, 2 + long(rng.uniform_int(19)), dim);
    GramMatrix g = gram(k, ps);
    CHECK((g.entries - g.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(min_eig(g.entries) >= -psd_tolerance(g.entries));
  }
}

TEST_CASE("gram reports non-finite kernel evaluations with indices") {
  Kernel bad = feature_map_kernel(
      [](const Eigen::RowVectorXd& x) {
        Vector v(1);
        v << (x[0] > 0.5 ? std::numeric_limits<double>::infinity() : 1.0);
        return v;
      },
      "bad");
  PointSet ps = pts1d({0.0, 1.0});
  CHECK_THROWS_AS(gram(bad, ps), NumericalError);
}

TEST_CASE("kernel JSON config round trips") {
  Kernel k = kernel_from_json_string(R"({"kind":"poly_no_const","params":{"degree":3}})");
  Eigen::RowVectorXd x(1), y(1);
  x << 0.5;
  y << 0.5;
  CHECK(k(x, y) == doctest::Approx(0.25 + 0.0625 + 0.015625));
  CHECK_THROWS_AS(kernel_from_json_string("{\"kind\":\"nope\"}"), UsageError);
  Kernel fm = kernel_from_json_string(
      R"({"kind":"feature_map","params":{"matrix":[[1,0],[0,1]],"offset":[0,0]}})");
  Eigen::RowVectorXd u(2), v(2);
  u << 1.0, 2.0;
  v << 3.0, 4.0;
  CHECK(fm(u, v) == doctest::Approx(11.0));
}

TEST_CASE("CSV round trip preserves points and labels exactly") {
  Rng rng(77);
  Matrix pts(5, 2);
  for (long i = 0; i < 5; ++i)
    for (long j = 0; j < 2; ++j) pts(i, j) = rng.normal();
  Vector y(5);
  for (long i = 0; i < 5; ++i) y[i] = rng.normal();
  PointSet ps = make_pointset(pts, y);
  std::string path = "/tmp/kmc_test_roundtrip.csv";
  write_pointset_csv(path, ps);
  PointSet back = read_pointset_csv(path);
  CHECK((back.points - ps.points).cwiseAbs().maxCoeff() == 0.0);
  CHECK((*back.labels - *ps.labels).cwiseAbs().maxCoeff() == 0.0);
}

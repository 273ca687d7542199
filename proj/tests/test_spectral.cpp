#include <doctest.h>

#include <Eigen/Dense>

#include "kmc/spectral.hpp"

using namespace kmc;

namespace {

PointSet pts1d(std::initializer_list<double> xs) {
  Matrix m(long(xs.size()), 1);
  long i = 0;
  for (double x : xs) m(i++, 0) = x;
  return make_pointset(std::move(m));
}

GramMatrix as_gram(Matrix m) { return GramMatrix{std::move(m), "test"}; }

// Brute-force diameter oracle for explicit-feature kernels: the infimum over
// random unit directions of (sup - inf) over a grid.
double brute_force_diam(const std::function<Vector(double)>& phi, long feat_dim,
                        long n_dirs, long grid, uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> feats;
  feats.reserve(size_t(grid + 1));
  for (long i = 0; i <= grid; ++i) feats.push_back(phi(-1.0 + 2.0 * double(i) / double(grid)));
  double best = std::numeric_limits<double>::infinity();
  for (long d = 0; d < n_dirs; ++d) {
    Vector u(feat_dim);
    for (long j = 0; j < feat_dim; ++j) u[j] = rng.normal();
    u.normalize();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& f : feats) {
      double v = u.dot(f);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    best = std::min(best, hi - lo);
  }
  return best;
}

}  // namespace

TEST_CASE("smallest_eig: identity and diag(1, r^2)") {
  CHECK(smallest_eig(as_gram(Matrix::Identity(3, 3))) == doctest::Approx(1.0));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 0.25;
  CHECK(smallest_eig(as_gram(d)) == doctest::Approx(0.25));
}

TEST_CASE("smallest_eig matches the dense eigensolver on random SPD matrices") {
  Rng rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    long n = 2 + long(rng.uniform_int(30));
    Matrix raw(n, n);
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) raw(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(raw);
    Matrix q = qr.householderQ();
    Vector ev(n);
    for (long i = 0; i < n; ++i) ev[i] = rng.uniform(0.05, 2.0);
    Matrix k = q * ev.asDiagonal() * q.transpose();
    k = 0.5 * (k + k.transpose()).eval();
    double mine = smallest_eig(as_gram(k), 1e-13, 400000);
    Eigen::SelfAdjointEigenSolver<Matrix> es(k, Eigen::EigenvaluesOnly);
    CHECK(mine == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-8));
  }
}

TEST_CASE("smallest_eig: non-convergence raises with the last Rayleigh quotient") {
  Matrix m = Matrix::Identity(4, 4);
  m(0, 0) = 2.0;
  CHECK_THROWS_AS(smallest_eig(as_gram(m), 1e-18, 3), NumericalError);
}

TEST_CASE("sup_ratio_bound") {
  CHECK(sup_ratio_bound(as_gram(Matrix::Identity(4, 4))) == doctest::Approx(0.5));
  CHECK(sup_ratio_bound(as_gram(Matrix::Identity(1, 1))) == doctest::Approx(1.0));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 0.25;
  CHECK(sup_ratio_bound(as_gram(d)) == doctest::Approx(std::sqrt(0.125)));
  Matrix rank_def = Matrix::Ones(3, 3);
  CHECK_THROWS_AS(sup_ratio_bound(as_gram(rank_def)), NumericalError);
}

TEST_CASE("diam_lower_kplus: linear kernel on (-1,1) gives exactly 1/2") {
  SpectralReport rep = diam_lower_kplus(poly_no_const_kernel(1), pts1d({-1.0, 1.0}));
  CHECK(rep.lambda_min == doctest::Approx(2.0));
  CHECK(rep.diam_lower == doctest::Approx(0.5));
  CHECK(rep.bound_variant == BoundVariant::KPlus);
  // The direction h(x)=x has diameter 2 - 0 ... sup - inf = 2; the bound is
  // a valid lower bound on the infimum over directions (which is 1 here).
  CHECK(rep.diam_lower <= 1.0);
}

TEST_CASE("diam_lower_kplus rejects the zero kernel") {
  CHECK_THROWS_AS(diam_lower_kplus(zero_kernel(), pts1d({0.0, 1.0})), NumericalError);
}

TEST_CASE("diam_lower_kplus is below the brute-force diameter for k_2") {
  SpectralReport rep = diam_lower_kplus(poly_no_const_kernel(2), pts1d({-1.0, 0.0, 1.0}));
  // The bound quantifies over unit directions of the original space, whose
  // features are (x, x^2); the constant direction is excluded.
  double bf = brute_force_diam(
      [](double x) {
        Vector v(2);
        v << x, x * x;
        return v;
      },
      2, 10000, 1000, 99);
  CHECK(rep.diam_lower <= bf + 1e-12);
}

TEST_CASE("diam_lower_kminus on the two-point delta kernel") {
  SpectralReport rep = diam_lower_kminus(delta_kernel(), pts1d({0.0, 1.0}), 0.5);
  CHECK(rep.lambda_min == doctest::Approx(1.0));
  CHECK(rep.diam_lower == doctest::Approx(0.5 * std::sqrt(0.5)));
  // The unit direction of H^- reaches sqrt(2): the bound stays below it.
  CHECK(rep.diam_lower <= std::sqrt(2.0));
}

TEST_CASE("diam_lower_kminus rejects dimension-1 and rank-deficient inputs") {
  CHECK_THROWS_AS(diam_lower_kminus(constant_kernel(1.0), pts1d({0.3}), 1.0), UsageError);
  CHECK_THROWS_AS(diam_lower_kminus(constant_kernel(1.0), pts1d({0.3, 0.7}), 0.0),
                  NumericalError);
  // An oversized c_sq breaks PSD of k - c_sq on the points.
  CHECK_THROWS_AS(diam_lower_kminus(delta_kernel(), pts1d({0.0, 1.0}), 0.9), NumericalError);
}

TEST_CASE("diam_lower_mercer") {
  CHECK(diam_lower_mercer(4.0, false).diam_lower == doctest::Approx(1.0));
  CHECK(diam_lower_mercer(0.01, true).diam_lower == doctest::Approx(0.05));
  CHECK_THROWS_AS(diam_lower_mercer(4.5, false), NumericalError);
  CHECK_THROWS_AS(diam_lower_mercer(0.0, false), UsageError);
}

TEST_CASE("mercer_estimate: orthonormal features on their own grid give 1/m") {
  long m = 6;
  Matrix id = Matrix::Identity(m, m);
  Kernel k = feature_map_kernel(id);  // phi(e_i) = e_i
  PointSet grid = make_pointset(id);
  CHECK(mercer_estimate(k, grid) == doctest::Approx(1.0 / double(m)));
  CHECK_THROWS_AS(mercer_estimate(zero_kernel(), grid), NumericalError);
}

TEST_CASE("mercer_estimate stabilizes under grid refinement for k_2") {
  auto grid_of = [](long m) {
    Matrix g(m, 1);
    for (long i = 0; i < m; ++i) g(i, 0) = -1.0 + 2.0 * double(i) / double(m - 1);
    return make_pointset(std::move(g));
  };
  double a = mercer_estimate(poly_no_const_kernel(2), grid_of(64));
  double b = mercer_estimate(poly_no_const_kernel(2), grid_of(128));
  double c = mercer_estimate(poly_no_const_kernel(2), grid_of(256));
  CHECK(std::abs(b - c) <= std::abs(a - c) + 1e-12);
  // The estimated bound stays below the brute-force diameter.
  SpectralReport rep = diam_lower_mercer(c, false, true);
  double bf = brute_force_diam(
      [](double x) {
        Vector v(2);
        v << x, x * x;
        return v;
      },
      2, 10000, 1000, 7);
  CHECK(rep.diam_lower <= bf + 1e-9);
}

TEST_CASE("k_functional: value c at t = sup-root, upper bound 1, monotone in t") {
  // Unit-sup kernel: phi(x) = (x, sqrt(1-x^2)) has k(x,x) = 1.
  Kernel k = feature_map_kernel(
      [](const Eigen::RowVectorXd& x) {
        Vector v(2);
        double c = std::clamp(x[0], -1.0, 1.0);
        v << c, std::sqrt(std::max(0.0, 1.0 - c * c));
        return v;
      },
      "arc");
  Matrix g(33, 1);
  for (long i = 0; i < 33; ++i) g(i, 0) = -1.0 + 2.0 * double(i) / 32.0;
  PointSet grid = make_pointset(std::move(g));

  KFunctionalResult at_one = k_functional(k, grid, 1.0, 16);
  CHECK(at_one.value >= 1.0 - 1e-3);
  CHECK(at_one.value <= 1.0 + 1e-12);

  Rng rng(13);
  for (int rep = 0; rep < 10; ++rep) {
    double t1 = rng.uniform(0.05, 2.0);
    double t2 = rng.uniform(0.05, 2.0);
    if (t1 > t2) std::swap(t1, t2);
    double v1 = k_functional(k, grid, t1, 16).value;
    double v2 = k_functional(k, grid, t2, 16).value;
    CHECK(v1 <= v2 + 1e-6);
    CHECK(v1 >= 0.0);
    CHECK(v1 <= 1.0 + 1e-12);
    CHECK(v2 <= 1.0 + 1e-12);
  }
}

TEST_CASE("counter_mass formula") {
  CHECK(counter_mass(1.0, 1.0, 1.0, 1) == doctest::Approx(0.5));
  CHECK(counter_mass(1e-9, 1.0, 1.0, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(counter_mass(1.0, 1.0, 2.0, 1) == doctest::Approx(0.25));  // doubling L halves it
  CHECK_THROWS_AS(counter_mass(2.0, 1.0, 1.0, 1), UsageError);
}

TEST_CASE("ball_radius formula and cap at b/2") {
  CHECK(ball_radius(2.0, 1.0, 1.0, 1) == doctest::Approx(0.5));
  CHECK(ball_radius(1e-8, 1.0, 1.0, 1) <= 0.5e-8);
  CHECK(ball_radius(2.0, 2.0, 1.0, 1) >= ball_radius(2.0, 1.0, 1.0, 1));
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    double b = rng.uniform(0.01, 3.0);
    CHECK(ball_radius(b, rng.uniform(0.1, 2.0), rng.uniform(0.2, 3.0), 1 + int(rng.uniform_int(4))) <=
          0.5 * b + 1e-15);
  }
}

TEST_CASE("sample_threshold equals an independent transcription and is monotone") {
  auto oracle = [](double delta, double q, double c, double L, int l, double sup_k) {
    double beta_l = std::exp(0.5 * l * std::log(M_PI) - std::lgamma(0.5 * l + 1.0));
    double t1 = (std::sqrt(2.0 * std::log(1.0 / q)) + 96.0 * std::sqrt(sup_k) / delta) /
                (c * beta_l * std::pow(delta / (8.0 * L), l));
    double t2 = (4.0 * std::sqrt(sup_k) + 3.0 * std::sqrt(2.0 * std::log(1.0 / q))) /
                (delta / 4.0);
    return long(std::ceil(std::max(t1 * t1, t2 * t2)));
  };
  CHECK(sample_threshold(0.5, 0.1, 1.0, 1.0, 1, 1.0) == oracle(0.5, 0.1, 1.0, 1.0, 1, 1.0));
  CHECK(sample_threshold(1.0, 0.1, 1.0, 1.0, 1, 1.0) <
        sample_threshold(0.5, 0.1, 1.0, 1.0, 1, 1.0));
  // q -> 1 removes the log terms.
  long near_one = sample_threshold(0.5, 0.999999, 1.0, 1.0, 1, 1.0);
  long mid = sample_threshold(0.5, 0.5, 1.0, 1.0, 1, 1.0);
  CHECK(near_one <= mid);
}

TEST_CASE("vc_uniform_bound shape") {
  // x = 0 keeps only the entropy term.
  double j1 = 8.0;  // ceil(sqrt(log(2e21))) = 8 dominates sqrt(9) = 3 at d=2
  CHECK(vc_uniform_bound(2, 100, 0.0) == doctest::Approx(12.0 * j1 / 10.0));
  CHECK(vc_uniform_bound(2, 1000, 1.0) < vc_uniform_bound(2, 999, 1.0));
  CHECK(vc_uniform_bound(2, 52000, std::log(10.0)) <= 1.0 - std::acos(-0.2) / M_PI);
}

TEST_CASE("rademacher_bound shape") {
  CHECK(rademacher_bound(1.0, 0.999999, 100, 1.0) ==
        doctest::Approx(24.0 / 10.0).epsilon(1e-3));
  CHECK(rademacher_bound(2.0, 0.5, 100, 1.0) ==
        doctest::Approx((std::sqrt(2.0 * std::log(2.0)) + 12.0) / 10.0));
  CHECK(rademacher_bound(1.0, 0.9, 400, 1.0) < rademacher_bound(1.0, 0.9, 399, 1.0));
}

TEST_CASE("circle crossovers sit near the worked values") {
  long nvc = circle_vc_crossover(0.2, 0.9);
  CHECK(std::llabs(nvc - 52000) <= 2600);
  long nr = circle_rademacher_crossover(0.2, 0.9);
  CHECK(std::llabs(nr - 5000) <= 250);
}

TEST_CASE("direct_sum_diam_lower") {
  CHECK(direct_sum_diam_lower(0.0, 1.0, 1.0, 1.0, 2.0, 0.0) == doctest::Approx(2.0));
  CHECK(direct_sum_diam_lower(0.0, 1.0, 0.0, 0.0, 2.0, 5.0) == doctest::Approx(0.0));
  CHECK(direct_sum_diam_lower(1.0, 0.0, 1.0, 1.0, 2.0, 0.7) == doctest::Approx(0.7));
  CHECK_THROWS_AS(direct_sum_diam_lower(0.5, 0.6, 1.0, 1.0, 1.0, 1.0), UsageError);
}

TEST_CASE("ball_report stays consistent") {
  BallReport rep = ball_report(2.0, 0.1, 1.0, 1.0, 1, 1.0);
  CHECK(rep.delta == doctest::Approx(0.5));
  CHECK(rep.delta <= rep.b / 2.0 + 1e-15);
  CHECK(rep.n_threshold >= 1);
}

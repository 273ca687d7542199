#include "kmc/spectral.hpp"

#include <Eigen/Dense>

namespace kmc {

std::string to_string(BoundVariant v) {
  switch (v) {
    case BoundVariant::KPlus: return "KPlus";
    case BoundVariant::KMinus: return "KMinus";
    case BoundVariant::MercerSupplied: return "MercerSupplied";
    case BoundVariant::MercerEstimated: return "MercerEstimated";
    case BoundVariant::KFunctional: return "KFunctional";
  }
  return "?";
}

namespace {

// Dominant eigenvalue of a symmetric PSD matrix by power iteration with a
// deterministic start. Convergence is declared when the Rayleigh quotient
// stagnates (relative change <= tol) for a window of iterations; a fixed-seed
// restart kicks in when the iterate collapses.
double power_dominant_from(const Matrix& m, Vector v, double tol, long max_iter,
                           double* last_rq) {
  Rng rng(0x9E3779B97F4A7C15ULL);
  double rq = v.dot(m * v);
  int stable = 0;
  const int window = 25;
  for (long it = 0; it < max_iter; ++it) {
    Vector w = m * v;
    double norm = w.norm();
    if (norm <= 1e-300) {
      // The start vector is (numerically) in the kernel of m; restart from a
      // seeded random direction unless the matrix itself is zero.
      if (m.cwiseAbs().maxCoeff() <= 1e-300) {
        if (last_rq) *last_rq = 0.0;
        return 0.0;
      }
      for (long i = 0; i < v.size(); ++i) v[i] = rng.normal();
      v.normalize();
      continue;
    }
    v = w / norm;
    double rq_new = v.dot(m * v);
    double denom = std::max({std::abs(rq_new), std::abs(rq), 1e-300});
    if (std::abs(rq_new - rq) <= tol * denom) {
      if (++stable >= window) {
        if (last_rq) *last_rq = rq_new;
        return rq_new;
      }
    } else {
      stable = 0;
    }
    rq = rq_new;
  }
  if (last_rq) *last_rq = rq;
  throw NumericalError("power iteration did not converge within max_iter (last Rayleigh quotient " +
                       format_double(rq) + ")");
}

// Two deterministic starts (all-ones and a fixed-seed random vector); the
// larger Rayleigh limit wins. Guards against a start that is nearly
// orthogonal to the dominant eigenvector.
double power_dominant(const Matrix& m, double tol, long max_iter, double* last_rq) {
  long n = m.rows();
  Vector ones = Vector::Ones(n) / std::sqrt(double(n));
  double a = power_dominant_from(m, ones, tol, max_iter, last_rq);
  Rng rng(0xD1B54A32D192ED03ULL);
  Vector r(n);
  for (long i = 0; i < n; ++i) r[i] = rng.normal();
  r.normalize();
  double b = power_dominant_from(m, r, tol, max_iter, last_rq);
  return std::max(a, b);
}

}  // namespace

double smallest_eig(const GramMatrix& gram, double tol, long max_iter) {
  if (tol <= 0) throw UsageError("smallest_eig: tol must be > 0");
  const Matrix& k = gram.entries;
  if (k.rows() != k.cols()) throw UsageError("smallest_eig: matrix not square");
  if (k.rows() == 1) return std::max(k(0, 0), 0.0);
  double rq = 0.0;
  double lambda1 = power_dominant(k, tol, max_iter, &rq);
  // B = lambda_1 I - K is PSD with dominant eigenvalue lambda_1 - lambda_d.
  Matrix b = Matrix::Identity(k.rows(), k.cols()) * lambda1 - k;
  double spread = power_dominant(b, tol, max_iter, &rq);
  double lambda_d = lambda1 - spread;
  return std::max(lambda_d, 0.0);
}

double sup_ratio_bound(const GramMatrix& gram) {
  long d = gram.n();
  double lambda_d = smallest_eig(gram);
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram.entries, Eigen::EigenvaluesOnly);
  double lambda_1 = es.eigenvalues().maxCoeff();
  if (lambda_d <= 1e-10 * std::max(lambda_1, 1e-300))
    throw NumericalError(
        "Gram matrix is numerically rank deficient; choose points whose kernel "
        "sections are linearly independent");
  return std::sqrt(lambda_d / double(d));
}

SpectralReport diam_lower_kplus(const Kernel& k, const PointSet& points) {
  points.validate();
  if (points.n() < 2) throw UsageError("diam_lower_kplus: need at least 2 points (d+1 rows)");
  Kernel kp = plus_constant(k);
  GramMatrix g = gram(kp, points);
  long dp1 = points.n();
  double lambda = smallest_eig(g);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g.entries, Eigen::EigenvaluesOnly);
  if (lambda <= 1e-10 * std::max(es.eigenvalues().maxCoeff(), 1e-300))
    throw NumericalError("K+ is numerically rank deficient on the supplied points");
  SpectralReport rep;
  rep.lambda_min = lambda;
  rep.d_used = int(dp1);
  rep.diam_lower = 0.5 * std::sqrt(lambda / double(dp1));
  rep.bound_variant = BoundVariant::KPlus;
  rep.notes = "kernel-matrix bound from K+ on " + std::to_string(dp1) + " points";
  return rep;
}

SpectralReport diam_lower_kminus(const Kernel& k, const PointSet& points, double c_sq) {
  points.validate();
  if (points.n() < 2)
    throw UsageError("diam_lower_kminus: the space must have dimension >= 2");
  GramMatrix g = gram(k, points);
  long d = points.n();
  double lambda = smallest_eig(g);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g.entries, Eigen::EigenvaluesOnly);
  if (lambda <= 1e-10 * std::max(es.eigenvalues().maxCoeff(), 1e-300))
    throw NumericalError("kernel matrix is numerically rank deficient on the supplied points");
  if (c_sq > 0) {
    // Consistency check on the caller's claim that 1 is in the space: k - c^2
    // must stay PSD on these points.
    GramMatrix gm = gram(minus_constant(k, c_sq), points);
    Eigen::SelfAdjointEigenSolver<Matrix> esm(gm.entries, Eigen::EigenvaluesOnly);
    if (esm.eigenvalues().minCoeff() < -psd_tolerance(gm.entries))
      throw NumericalError("k - c_sq violates PSD on the supplied points; c_sq too large");
  }
  SpectralReport rep;
  rep.lambda_min = lambda;
  rep.d_used = int(d);
  rep.diam_lower = 0.5 * std::sqrt(lambda / double(d));
  rep.bound_variant = BoundVariant::KMinus;
  rep.notes = "kernel-matrix bound on " + std::to_string(d) + " points, directions in H-";
  return rep;
}

SpectralReport diam_lower_mercer(double lambda_tilde, bool contains_const, bool estimated) {
  if (!(lambda_tilde > 0)) throw UsageError("diam_lower_mercer: lambda_tilde must be > 0");
  if (lambda_tilde > 4)
    throw NumericalError("diam_lower_mercer: lambda_tilde > 4 is outside the bound's regime");
  SpectralReport rep;
  rep.lambda_min = lambda_tilde;
  rep.d_used = 0;
  rep.diam_lower = 0.5 * std::sqrt(lambda_tilde);
  rep.bound_variant = estimated ? BoundVariant::MercerEstimated : BoundVariant::MercerSupplied;
  rep.estimated = estimated;
  rep.notes = contains_const ? "directions in H- (constants already in the space)"
                             : "directions in H (constants added via k+)";
  return rep;
}

double mercer_estimate(const Kernel& k, const PointSet& grid) {
  grid.validate();
  GramMatrix g = gram(k, grid);
  long m = grid.n();
  Eigen::SelfAdjointEigenSolver<Matrix> es(g.entries / double(m), Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  double top = ev.cwiseAbs().maxCoeff();
  double thresh = 1e-10 * std::max(top, 1e-300);
  double smallest = -1.0;
  for (long i = 0; i < ev.size(); ++i)
    if (ev[i] > thresh && (smallest < 0 || ev[i] < smallest)) smallest = ev[i];
  if (smallest < 0)
    throw NumericalError("mercer_estimate: kernel is numerically degenerate on this grid");
  return smallest;
}

KFunctionalResult k_functional(const Kernel& k, const PointSet& grid, double t,
                               long basis_size) {
  if (!(t > 0)) throw UsageError("k_functional: t must be > 0");
  grid.validate();
  GramMatrix g = gram(k, grid);
  auto order = pivoted_cholesky_order(g.entries, basis_size);
  if (order.empty()) throw NumericalError("k_functional: kernel vanishes on the grid");
  long p = long(order.size());
  long m = grid.n();
  Matrix gz(m, p);  // gz(i,s) = k(x_i, z_s)
  for (long s = 0; s < p; ++s) gz.col(s) = g.entries.col(order[size_t(s)]);
  Matrix kz(p, p);
  for (long a = 0; a < p; ++a)
    for (long b = 0; b < p; ++b) kz(a, b) = g.entries(order[size_t(a)], order[size_t(b)]);

  auto objective = [&](const Vector& alpha, double* sup_out, double* norm_out) {
    Vector vals = gz * alpha;
    double sup = 0.0;
    for (long i = 0; i < m; ++i) sup = std::max(sup, std::abs(1.0 - vals[i]));
    double nsq = alpha.dot(kz * alpha);
    double norm = std::sqrt(std::max(nsq, 0.0));
    if (sup_out) *sup_out = sup;
    if (norm_out) *norm_out = norm;
    return sup + t * norm;
  };

  // t-independent starting points: zero plus a ladder of regularized
  // least-squares fits of the constant function.
  std::vector<Vector> starts;
  starts.push_back(Vector::Zero(p));
  Matrix gtg = gz.transpose() * gz;
  Vector gt1 = gz.transpose() * Vector::Ones(m);
  for (double mu : {1e-8, 1e-4, 1e-2, 1.0}) {
    Matrix reg = gtg + mu * gtg.trace() / double(p) * Matrix::Identity(p, p);
    starts.push_back(reg.ldlt().solve(gt1));
  }

  KFunctionalResult best;
  best.value = std::numeric_limits<double>::infinity();
  double improvement_last = 0.0;
  for (const Vector& start : starts) {
    Vector alpha = start;
    double sup, norm;
    double f = objective(alpha, &sup, &norm);
    if (f < best.value) best = {f, sup, norm, 0.0};
    Vector cur = alpha;
    double local_best = f;
    const long iters = 400;
    const double eta0 = 0.1;
    double scale = std::max(1.0, cur.cwiseAbs().maxCoeff());
    for (long it = 1; it <= iters; ++it) {
      Vector vals = gz * cur;
      long worst = 0;
      double w = -1.0;
      for (long i = 0; i < m; ++i) {
        double a = std::abs(1.0 - vals[i]);
        if (a > w) {
          w = a;
          worst = i;
        }
      }
      Vector sub = -((1.0 - vals[worst]) >= 0 ? 1.0 : -1.0) * gz.row(worst).transpose();
      double nsq = cur.dot(kz * cur);
      if (nsq > 1e-300) sub += t * (kz * cur) / std::sqrt(nsq);
      double gn = sub.norm();
      if (gn <= 1e-300) break;
      cur -= (eta0 * scale / std::sqrt(double(it))) * sub / gn;
      double fs, fn, fv = objective(cur, &fs, &fn);
      if (fv < local_best) {
        improvement_last = local_best - fv;
        local_best = fv;
        if (fv < best.value) best = {fv, fs, fn, 0.0};
      }
    }
  }
  best.residual = improvement_last;
  return best;
}

double unit_ball_volume(int d) {
  if (d < 0) throw UsageError("unit_ball_volume: d must be >= 0");
  if (d == 0) return 1.0;
  return std::exp(0.5 * d * std::log(M_PI) - std::lgamma(0.5 * d + 1.0));
}

double counter_mass(double gamma, double c, double L, int d) {
  if (!(gamma > 0) || !(c > 0) || !(L > 0) || d < 1)
    throw UsageError("counter_mass: gamma, c, L must be > 0 and d >= 1");
  if (gamma / L > 1.0 + 1e-12)
    throw UsageError("counter_mass: requires gamma/L <= 1");
  return c * std::pow(gamma, d + 1) * unit_ball_volume(d) /
         (double(d + 1) * std::pow(2.0 * L, d));
}

double ball_radius(double b, double c, double L, int l) {
  if (!(b > 0) || !(c > 0) || !(L > 0) || l < 1)
    throw UsageError("ball_radius: all inputs must be positive");
  double half = 0.5 * b;
  double mass = c * std::pow(half, l + 1) * unit_ball_volume(l) /
                (double(l + 1) * std::pow(2.0 * L, l));
  return std::min(half, mass);
}

long sample_threshold(double delta, double q, double c, double L, int l, double sup_k) {
  if (!(delta > 0) || !(c > 0) || !(L > 0) || !(sup_k > 0) || l < 1)
    throw UsageError("sample_threshold: inputs must be positive");
  if (!(q > 0 && q < 1)) throw UsageError("sample_threshold: q must be in (0,1)");
  double root_k = std::sqrt(sup_k);
  double log_term = std::sqrt(2.0 * std::log(1.0 / q));
  double n1 = (log_term + 96.0 * root_k / delta) /
              (c * unit_ball_volume(l) * std::pow(delta / (8.0 * L), l));
  double n2 = (4.0 * root_k + 3.0 * log_term) / (delta / 4.0);
  double n = std::max(n1 * n1, n2 * n2);
  return long(std::ceil(n));
}

BallReport ball_report(double b, double q, double c, double L, int l, double sup_k,
                       bool estimated) {
  BallReport rep;
  rep.b = b;
  rep.delta = ball_radius(b, c, L, l);
  rep.n_threshold = sample_threshold(rep.delta, q, c, L, l, sup_k);
  rep.q = q;
  rep.c_density = c;
  rep.L = L;
  rep.l_dim = l;
  rep.estimated = estimated;
  return rep;
}

static double vc_j1(int d, double c_tilde) {
  double a = std::ceil(std::sqrt(std::log(2.0 * c_tilde)));
  double b = std::sqrt(1.0 + 2.0 * double(d + 2));
  return std::max(a, b);
}

double vc_uniform_bound(int d, long n, double x, double c_tilde) {
  if (n < 1) throw UsageError("vc_uniform_bound: n must be >= 1");
  if (x < 0) throw UsageError("vc_uniform_bound: x must be >= 0");
  double j1 = vc_j1(d, c_tilde);
  double rn = 1.0 / std::sqrt(double(n));
  return 12.0 * j1 * rn + rn * std::sqrt(2.0 * x * (24.0 * j1 * rn + 1.0)) +
         x / (3.0 * double(n));
}

double rademacher_bound(double gamma, double p, long n, double sup_k_root) {
  if (!(gamma > 0)) throw UsageError("rademacher_bound: gamma must be > 0");
  if (n < 1) throw UsageError("rademacher_bound: n must be >= 1");
  if (!(p > 0 && p < 1)) throw UsageError("rademacher_bound: p must be in (0,1)");
  return (std::sqrt(2.0 * std::log(1.0 / p)) + 24.0 * sup_k_root / gamma) /
         std::sqrt(double(n));
}

double direct_sum_diam_lower(double norm_g, double norm_h, double b_up, double b_down,
                             double diam_C, double diam_Codot) {
  if (std::abs(norm_g * norm_g + norm_h * norm_h - 1.0) > 1e-9)
    throw UsageError("direct_sum_diam_lower: (norm_g, norm_h) must lie on the unit sphere");
  if (b_up + b_down < 0) throw UsageError("direct_sum_diam_lower: b_up + b_down must be >= 0");
  double via_h = 0.5 * norm_h * (b_up + b_down) * diam_C;
  double via_g = norm_g * diam_Codot;
  return std::max(via_h, via_g);
}

namespace {

// Smallest n such that bound(n) fits under the threshold; the bounds are
// decreasing in n so a doubling search plus bisection is exact.
long crossover_search(const std::function<double(long)>& bound, double threshold) {
  long lo = 1, hi = 1;
  while (bound(hi) > threshold) {
    hi *= 2;
    if (hi > (1L << 50)) throw NumericalError("crossover search diverged");
  }
  while (lo < hi) {
    long mid = lo + (hi - lo) / 2;
    if (bound(mid) > threshold)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace

long circle_vc_crossover(double radius, double prob) {
  if (!(radius > 0 && radius < 1)) throw UsageError("circle crossover: radius in (0,1)");
  if (!(prob > 0 && prob < 1)) throw UsageError("circle crossover: prob in (0,1)");
  // Mass of the cap {<u,x> <= -radius} on the uniform circle.
  double threshold = 1.0 - std::acos(-radius) / M_PI;
  double x = std::log(1.0 / (1.0 - prob));
  return crossover_search([&](long n) { return vc_uniform_bound(2, n, x); }, threshold);
}

long circle_rademacher_crossover(double radius, double prob) {
  if (!(radius > 0 && radius < 1)) throw UsageError("circle crossover: radius in (0,1)");
  if (!(prob > 0 && prob < 1)) throw UsageError("circle crossover: prob in (0,1)");
  // Worked-example constants: gamma = 1, deviation (sqrt(2 log(1/p)) + 12) /
  // sqrt(n), threshold -r (1 - acos(r)/pi) + sqrt(1-r^2)/pi.
  double r = radius;
  double threshold = -r * (1.0 - std::acos(r) / M_PI) + std::sqrt(1.0 - r * r) / M_PI;
  double dev_const = std::sqrt(2.0 * std::log(1.0 / (1.0 - prob))) + 12.0;
  return crossover_search([&](long n) { return dev_const / std::sqrt(double(n)); }, threshold);
}

}  // namespace kmc

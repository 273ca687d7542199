#include "kmc/gram.hpp"

#include <Eigen/Dense>

namespace kmc {

double psd_tolerance(const Matrix& gram) { return 1e-8 * std::max(gram.trace(), 0.0); }

void GramMatrix::validate() const {
  long m = entries.rows();
  if (m != entries.cols()) throw InvariantError("Gram matrix is not square");
  double scale = entries.cwiseAbs().maxCoeff();
  for (long i = 0; i < m; ++i)
    for (long j = i + 1; j < m; ++j)
      if (std::abs(entries(i, j) - entries(j, i)) > 1e-12 * std::max(1.0, scale))
        throw InvariantError("Gram matrix is not symmetric at (" + std::to_string(i) +
                             "," + std::to_string(j) + ")");
  Eigen::SelfAdjointEigenSolver<Matrix> es(entries, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -psd_tolerance(entries))
    throw InvariantError("Gram matrix is not PSD within tolerance (min eig " +
                         format_double(es.eigenvalues().minCoeff()) + ")");
}

template <bool Parallel>
static GramMatrix gram_impl(const Kernel& k, const PointSet& points) {
  points.validate();
  long n = points.n();
  long dim = points.dim();
  GramMatrix g;
  g.entries.resize(n, n);
  g.source = k.describe();
  const double* base = points.points.data();
  // Eigen stores column-major; copy rows out once for contiguous access.
  Matrix rows = points.points.transpose();  // dim x n, column i = point i
  const double* rb = rows.data();
  long bad_i = -1, bad_j = -1;
  std::string bad_what;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) if (Parallel)
#endif
  for (long i = 0; i < n; ++i) {
    for (long j = i; j < n; ++j) {
      double v;
      try {
        v = k.eval_raw(rb + i * dim, rb + j * dim, dim);
      } catch (const std::exception& e) {
        // Exceptions must not unwind out of the worker region.
        v = std::numeric_limits<double>::quiet_NaN();
#ifdef _OPENMP
#pragma omp critical
#endif
        if (bad_what.empty()) bad_what = e.what();
      }
      if (!std::isfinite(v)) {
#ifdef _OPENMP
#pragma omp critical
#endif
        {
          if (bad_i < 0) {
            bad_i = i;
            bad_j = j;
          }
        }
        v = std::numeric_limits<double>::quiet_NaN();
      }
      g.entries(i, j) = v;
      g.entries(j, i) = v;
    }
  }
  (void)base;
  if (!bad_what.empty()) throw UsageError("kernel evaluation failed: " + bad_what);
  if (bad_i >= 0)
    throw NumericalError("kernel evaluation produced a non-finite value at (" +
                         std::to_string(bad_i) + "," + std::to_string(bad_j) + ")");
  return g;
}

GramMatrix gram(const Kernel& k, const PointSet& points) {
  return gram_impl<true>(k, points);
}

GramMatrix gram_serial(const Kernel& k, const PointSet& points) {
  return gram_impl<false>(k, points);
}

Matrix cross_gram(const Kernel& k, const PointSet& a, const PointSet& b) {
  if (a.dim() != b.dim()) throw UsageError("cross_gram: point dimensions differ");
  long na = a.n(), nb = b.n(), dim = a.dim();
  Matrix out(na, nb);
  Matrix ra = a.points.transpose();
  Matrix rbm = b.points.transpose();
  const double* pa = ra.data();
  const double* pb = rbm.data();
  std::string bad_what;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long i = 0; i < na; ++i)
    for (long j = 0; j < nb; ++j) {
      double v;
      try {
        v = k.eval_raw(pa + i * dim, pb + j * dim, dim);
      } catch (const std::exception& e) {
        v = std::numeric_limits<double>::quiet_NaN();
#ifdef _OPENMP
#pragma omp critical
#endif
        if (bad_what.empty()) bad_what = e.what();
      }
      out(i, j) = v;
    }
  if (!bad_what.empty()) throw UsageError("kernel evaluation failed: " + bad_what);
  if (!out.allFinite())
    throw NumericalError("kernel evaluation produced a non-finite value");
  return out;
}

std::vector<long> pivoted_cholesky_order(const Matrix& gram, long max_pivots, double tol) {
  long n = gram.rows();
  max_pivots = std::min(max_pivots, n);
  Vector d = gram.diagonal();
  double trace0 = std::max(d.sum(), 0.0);
  Matrix l(n, max_pivots);
  std::vector<long> order;
  order.reserve(size_t(max_pivots));
  std::vector<bool> used(size_t(n), false);
  for (long m = 0; m < max_pivots; ++m) {
    long p = -1;
    double best = tol * std::max(trace0, 1e-300);
    for (long i = 0; i < n; ++i)
      if (!used[size_t(i)] && d[i] > best) {
        best = d[i];
        p = i;
      }
    if (p < 0) break;
    used[size_t(p)] = true;
    double piv = std::sqrt(d[p]);
    for (long i = 0; i < n; ++i) {
      double v = gram(i, p);
      for (long s = 0; s < m; ++s) v -= l(i, s) * l(p, s);
      l(i, m) = v / piv;
    }
    for (long i = 0; i < n; ++i) d[i] -= l(i, m) * l(i, m);
    order.push_back(p);
  }
  return order;
}

PointSet select_rows(const PointSet& ps, const std::vector<long>& rows) {
  Matrix pts(long(rows.size()), ps.dim());
  std::optional<Vector> labels;
  if (ps.labels) labels = Vector(long(rows.size()));
  for (long i = 0; i < long(rows.size()); ++i) {
    long r = rows[size_t(i)];
    if (r < 0 || r >= ps.n()) throw UsageError("row selection out of range");
    pts.row(i) = ps.points.row(r);
    if (labels) (*labels)[i] = (*ps.labels)[r];
  }
  PointSet out;
  out.points = std::move(pts);
  out.labels = std::move(labels);
  out.domain_box = ps.domain_box;
  return out;
}

}  // namespace kmc

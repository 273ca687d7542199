#include "kmc/compress.hpp"

#include <fstream>
#include <map>

namespace kmc {

void Coreset::validate() const {
  if (weights.empty()) throw InvariantError("coreset is empty");
  if (!atoms && indices.size() != weights.size())
    throw InvariantError("coreset index/weight length mismatch");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0)) throw InvariantError("coreset weight is negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvariantError("coreset weights do not sum to 1");
  for (long idx : indices)
    if (idx < 0 || idx >= n_source) throw InvariantError("coreset index out of range");
}

namespace {

// Access to Gram rows either through a cached matrix or by recomputing rows
// on demand (O(n) memory streaming mode).
class GramAccess {
 public:
  GramAccess(const Kernel& k, const PointSet& points, bool streaming)
      : kernel_(k), rows_t_(points.points.transpose()), n_(points.n()), dim_(points.dim()) {
    if (!streaming) {
      cached_ = gram(k, points).entries;
    } else {
      row_buf_.resize(n_);
    }
    diag_.resize(n_);
    if (cached_.size()) {
      diag_ = cached_.diagonal();
    } else {
      kernel_.eval_raw(ptr(0), ptr(0), dim_);  // surface argument errors serially
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
      for (long i = 0; i < n_; ++i)
        diag_[i] = kernel_.eval_raw(ptr(i), ptr(i), dim_);
    }
  }

  long n() const { return n_; }
  double diag(long i) const { return diag_[i]; }

  // q = K w for a dense weight vector; deterministic chunked accumulation.
  Vector times(const Vector& w) const {
    Vector out(n_);
    if (cached_.size()) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
      for (long i = 0; i < n_; ++i)
        out[i] = det_sum_serial(n_, [&](long j) { return cached_(i, j) * w[j]; });
    } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
      for (long i = 0; i < n_; ++i) {
        const double* xi = ptr(i);
        out[i] = det_sum_serial(
            n_, [&](long j) { return kernel_.eval_raw(xi, ptr(j), dim_) * w[j]; });
      }
    }
    return out;
  }

  // Row i of the Gram matrix.
  const Vector& row(long i) const {
    if (cached_.size()) {
      row_cache_ = cached_.col(i);
      return row_cache_;
    }
    const double* xi = ptr(i);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long j = 0; j < n_; ++j) row_buf_[j] = kernel_.eval_raw(xi, ptr(j), dim_);
    return row_buf_;
  }

 private:
  const double* ptr(long i) const { return rows_t_.data() + i * dim_; }

  Kernel kernel_;
  Matrix cached_;
  Matrix rows_t_;
  mutable Vector row_buf_;
  mutable Vector row_cache_;
  Vector diag_;
  long n_, dim_;
};

double dot_det(const Vector& a, const Vector& b) {
  return det_sum_serial(a.size(), [&](long i) { return a[i] * b[i]; });
}

}  // namespace

CompressResult herd(const Kernel& k, const PointSet& points, long T, long init_index,
                    const CompressOptions& opts_in) {
  points.validate();
  if (T < 1) throw UsageError("herd: T must be >= 1");
  long n = points.n();
  if (init_index < 0 || init_index >= n) throw UsageError("herd: init_index out of range");
  CompressOptions opts = opts_in;
  GramAccess ga(k, points, opts.streaming);

  // q_i = <m_n, k(X_i,.)>, qbar = ||m_n||^2.
  Vector uniform = Vector::Constant(n, 1.0 / double(n));
  Vector q = ga.times(uniform);
  double qbar = det_sum_serial(n, [&](long i) { return q[i]; }) / double(n);

  // s_i = <w, k(X_i,.)>. The initial element only seeds the first argmax;
  // afterwards w_t = t m_n - sum_{s<=t} k(x_s,.) exactly, so that
  // ||w_t|| = t ||m_n - m_hat_t|| holds step by step.
  Vector s = ga.row(init_index);
  double w_norm_sq = 0.0;
  double w_dot_mn = 0.0;  // <w_t, m_n>

  CompressResult res;
  res.trace.rows.reserve(size_t(T));
  std::vector<long> chosen;
  chosen.reserve(size_t(T));

  for (long t = 1; t <= T; ++t) {
    long x = det_argmax(n, [&](long i) { return s[i]; });
    chosen.push_back(x);
    const Vector& row = ga.row(x);
    double step_norm_sq = qbar - 2.0 * q[x] + ga.diag(x);  // ||m_n - k(x,.)||^2
    if (t == 1) {
      w_norm_sq = std::max(step_norm_sq, 0.0);
      for (long i = 0; i < n; ++i) s[i] = q[i] - row[i];
    } else {
      double w_dot_dir = w_dot_mn - s[x];  // <w_{t-1}, m_n - k(x,.)>
      w_norm_sq += 2.0 * w_dot_dir + step_norm_sq;
      for (long i = 0; i < n; ++i) s[i] += q[i] - row[i];
    }
    w_dot_mn = det_sum_serial(n, [&](long i) { return s[i]; }) / double(n);
    double err = w_norm_sq / (double(t) * double(t));
    TraceRow rowrec;
    rowrec.t = t;
    rowrec.chosen_index = x;
    rowrec.step = 1.0 / double(t);
    rowrec.clipped = err < 0;
    rowrec.error_sq = std::max(err, 0.0);
    res.trace.rows.push_back(rowrec);
  }

  res.coreset.indices = chosen;
  res.coreset.weights.assign(size_t(T), 1.0 / double(T));
  res.coreset.n_source = n;
  res.coreset.validate();
  return res;
}

CompressResult frank_wolfe_target(const Kernel& k, const PointSet& points,
                                  const Vector& target_w, long T,
                                  const CompressOptions& opts) {
  points.validate();
  if (T < 1) throw UsageError("frank_wolfe: T must be >= 1");
  long n = points.n();
  if (target_w.size() != n) throw UsageError("frank_wolfe: target weight length mismatch");
  GramAccess ga(k, points, opts.streaming);

  Vector q = ga.times(target_w);  // K mu

  // Start from the single best vertex.
  long j0 = det_argmax(n, [&](long i) { return q[i]; });
  Vector w = Vector::Zero(n);
  w[j0] = 1.0;
  Vector kw = ga.row(j0);

  // ||m_hat - target||^2 = (w - mu)^T (Kw - Kmu); the difference form keeps
  // cancellation noise quadratic in the residual.
  auto current_err = [&]() {
    return det_sum_serial(n, [&](long i) { return (w[i] - target_w[i]) * (kw[i] - q[i]); });
  };

  CompressResult res;
  res.trace.rows.reserve(size_t(T));
  double prev_err = std::numeric_limits<double>::infinity();

  for (long t = 1; t <= T; ++t) {
    // Vertex minimizing the linearized objective <m_hat - target, k(X_i,.)>.
    long j = det_argmax(n, [&](long i) { return q[i] - kw[i]; });
    double num = dot_det(kw, w) - kw[j] - dot_det(q, w) + q[j];
    double den = dot_det(kw, w) - 2.0 * kw[j] + ga.diag(j);
    TraceRow row;
    row.t = t;
    row.chosen_index = j;
    if (den <= 1e-300) {
      // m_hat coincides with the chosen vertex: exact fit.
      w.setZero();
      w[j] = 1.0;
      kw = ga.row(j);
      row.step = 1.0;
      double err = current_err();
      row.clipped = err < 0;
      row.error_sq = std::max(err, 0.0);
      res.trace.rows.push_back(row);
      res.trace.exact_fit = true;
      break;
    }
    double gamma = std::clamp(num / den, 0.0, 1.0);
    row.step = gamma;
    w *= (1.0 - gamma);
    w[j] += gamma;
    kw = (1.0 - gamma) * kw + gamma * ga.row(j);
    double err = current_err();
    row.clipped = err < 0;
    row.error_sq = std::max(err, 0.0);
    if (row.error_sq > prev_err + 1e-12 * std::max(1.0, prev_err))
      throw InvariantError("frank_wolfe: error increased at t=" + std::to_string(t));
    prev_err = row.error_sq;
    res.trace.rows.push_back(row);
  }

  // Simplex repair against drift.
  double sum = det_sum_serial(n, [&](long i) { return w[i]; });
  if (std::abs(sum - 1.0) > 1e-12) w /= sum;

  for (long i = 0; i < n; ++i)
    if (w[i] > 0) {
      res.coreset.indices.push_back(i);
      res.coreset.weights.push_back(w[i]);
    }
  res.coreset.n_source = n;
  res.coreset.validate();
  return res;
}

CompressResult frank_wolfe(const Kernel& k, const PointSet& points, long T,
                           const CompressOptions& opts) {
  Vector uniform = Vector::Constant(points.n(), 1.0 / double(points.n()));
  return frank_wolfe_target(k, points, uniform, T, opts);
}

EpsNetResult epsnet_compress(const PointSet& points, double eps, const Kernel& k) {
  points.validate();
  if (!(eps > 0)) throw UsageError("epsnet: eps must be > 0");
  if (!points.domain_box) throw UsageError("epsnet: point set has no domain box");
  (void)k;
  const auto& [lo, hi] = *points.domain_box;
  long d = points.dim();
  if (lo.size() != d || hi.size() != d) throw UsageError("epsnet: domain box dimension mismatch");

  std::vector<long> m(static_cast<size_t>(d));
  double total = 1.0;
  double vol = 1.0;
  for (long j = 0; j < d; ++j) {
    double side = hi[j] - lo[j];
    if (side < 0) throw UsageError("epsnet: domain box has negative side");
    vol *= std::max(side, 0.0);
    long mj = std::max<long>(1, long(std::ceil(std::sqrt(double(d)) * side / eps)));
    m[size_t(j)] = mj;
    total *= double(mj);
    if (total > 1e8)
      throw NumericalError("epsnet: net would need more than 1e8 centers; increase eps");
  }
  long n_grid = long(total);
  double n_formula = std::ceil(std::pow(double(d), 0.5 * double(d)) * vol / std::pow(eps, d));

  // Snap samples to cells; only occupied centers are returned.
  std::map<std::vector<long>, long> counts;
  for (long i = 0; i < points.n(); ++i) {
    std::vector<long> cell(static_cast<size_t>(d));
    for (long j = 0; j < d; ++j) {
      double side = hi[j] - lo[j];
      long mj = m[size_t(j)];
      long c = side > 0 ? long(std::floor((points.points(i, j) - lo[j]) / side * double(mj)))
                        : 0;
      cell[size_t(j)] = std::clamp<long>(c, 0, mj - 1);
    }
    counts[cell] += 1;
  }

  EpsNetResult res;
  Matrix centers(long(counts.size()), d);
  long r = 0;
  for (const auto& [cell, cnt] : counts) {
    for (long j = 0; j < d; ++j) {
      double side = hi[j] - lo[j];
      centers(r, j) = lo[j] + (side > 0 ? (double(cell[size_t(j)]) + 0.5) * side /
                                              double(m[size_t(j)])
                                        : 0.0);
    }
    res.coreset.weights.push_back(double(cnt) / double(points.n()));
    ++r;
  }
  PointSet atom_ps;
  atom_ps.points = std::move(centers);
  atom_ps.domain_box = points.domain_box;
  res.coreset.atoms = std::move(atom_ps);
  res.coreset.n_source = points.n();
  res.n_centers = r;
  res.n_grid = n_grid;
  res.n_formula = n_formula;
  res.coreset.validate();
  return res;
}

double error_sq_target(const Kernel& k, const Coreset& coreset, const PointSet& points,
                       const Vector& target_w) {
  coreset.validate();
  if (target_w.size() != points.n())
    throw UsageError("error_sq: target weight length mismatch");
  long n = points.n();
  if (!coreset.atoms) {
    // Signed difference v = coreset - target over the shared sample, then
    // v^T K v; differences first keep the result accurate near zero.
    Vector v = -target_w;
    for (long i = 0; i < coreset.size(); ++i)
      v[coreset.indices[size_t(i)]] += coreset.weights[size_t(i)];
    GramMatrix g = gram(k, points);
    Vector kv(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long i = 0; i < n; ++i)
      kv[i] = det_sum_serial(n, [&](long j) { return g.entries(i, j) * v[j]; });
    double err = det_sum_serial(n, [&](long i) { return v[i] * kv[i]; });
    return std::max(err, 0.0);
  }

  long l = coreset.size();
  const PointSet& support = *coreset.atoms;
  Matrix kaa = cross_gram(k, support, support);
  Matrix kas = cross_gram(k, support, points);
  Eigen::Map<const Vector> w(coreset.weights.data(), l);

  double term_aa = det_sum_serial(l * l, [&](long idx) {
    long i = idx / l, j = idx % l;
    return w[i] * w[j] * kaa(i, j);
  });
  double term_as = det_sum_serial(l * n, [&](long idx) {
    long i = idx / n, j = idx % n;
    return w[i] * target_w[j] * kas(i, j);
  });
  GramMatrix gss = gram(k, points);
  double term_ss = det_sum_serial(n * n, [&](long idx) {
    long i = idx / n, j = idx % n;
    return target_w[i] * target_w[j] * gss.entries(i, j);
  });
  double err = term_aa - 2.0 * term_as + term_ss;
  return std::max(err, 0.0);
}

double error_sq(const Kernel& k, const Coreset& coreset, const PointSet& points) {
  Vector uniform = Vector::Constant(points.n(), 1.0 / double(points.n()));
  return error_sq_target(k, coreset, points, uniform);
}

std::vector<long> near_mean_extremes(const Kernel& k, const PointSet& points, double eps) {
  points.validate();
  if (!(eps > 0)) throw UsageError("near_mean_extremes: eps must be > 0");
  GramMatrix g = gram(k, points);
  long n = points.n();
  for (long i = 0; i < n; ++i)
    if (std::abs(g.entries(i, i) - 1.0) > 1e-9)
      throw UsageError("near_mean_extremes: kernel is not normalized (k(x,x)=1) on the sample");
  Vector q(n);
  for (long i = 0; i < n; ++i)
    q[i] = det_sum_serial(n, [&](long j) { return g.entries(i, j); }) / double(n);
  double qbar = det_sum_serial(n, [&](long i) { return q[i]; }) / double(n);
  std::vector<long> out;
  for (long i = 0; i < n; ++i) {
    double dist_sq = g.entries(i, i) - 2.0 * q[i] + qbar;
    if (dist_sq < eps * eps) out.push_back(i);
  }
  double floor_val = 1.0 - 2.0 * eps * eps;
  for (size_t a = 0; a < out.size(); ++a)
    for (size_t b = a + 1; b < out.size(); ++b)
      if (g.entries(out[a], out[b]) < floor_val - 1e-9)
        throw InvariantError("near_mean_extremes: pairwise similarity bound violated");
  return out;
}

void write_trace_csv(const std::string& path, const CompressionTrace& trace) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write trace CSV: " + path);
  out << "t,chosen_index,step,error_sq\n";
  for (const auto& r : trace.rows)
    out << r.t << ',' << r.chosen_index << ',' << format_double(r.step) << ','
        << format_double(r.error_sq) << '\n';
}

}  // namespace kmc

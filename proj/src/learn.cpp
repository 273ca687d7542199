#include "kmc/learn.hpp"

#include <Eigen/Dense>

namespace kmc {

namespace {

// Pseudo-inverse application B^dagger y with the 1e-10 * sigma_max cutoff.
Vector pinv_apply(const Matrix& b, const Vector& y) {
  Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  double thresh = 1e-10 * (sv.size() ? sv[0] : 0.0);
  Vector uy = svd.matrixU().transpose() * y;
  for (long i = 0; i < sv.size(); ++i) uy[i] = sv[i] > thresh ? uy[i] / sv[i] : 0.0;
  return svd.matrixV() * uy;
}

}  // namespace

Regressor krr_fit(const Kernel& k, const Coreset& coreset, const PointSet& points,
                  const Vector& y, double lambda, KrrMode mode, KrrRegularizer reg) {
  coreset.validate();
  if (!(lambda > 0)) throw UsageError("krr_fit: lambda must be > 0");
  if (coreset.atoms)
    throw UsageError("krr_fit: coreset must reference sample indices (labels are needed)");
  if (y.size() != points.n()) throw UsageError("krr_fit: label vector length mismatch");

  // Drop zero-weight atoms before forming W^{-1}.
  std::vector<long> idx;
  std::vector<double> w;
  for (long i = 0; i < coreset.size(); ++i)
    if (coreset.weights[size_t(i)] > 1e-14) {
      idx.push_back(coreset.indices[size_t(i)]);
      w.push_back(coreset.weights[size_t(i)]);
    }
  if (idx.empty()) throw UsageError("krr_fit: no strictly positive coreset weights left");
  long l = long(idx.size());

  PointSet support = select_rows(points, idx);
  Matrix kl = gram(k, support).entries;
  Vector yl(l);
  for (long i = 0; i < l; ++i) yl[i] = y[idx[size_t(i)]];
  Vector wv = Eigen::Map<const Vector>(w.data(), l);

  Matrix a = kl;
  if (reg == KrrRegularizer::WeightedInverse) {
    for (long i = 0; i < l; ++i) a(i, i) += lambda / wv[i];
  } else {
    for (long i = 0; i < l; ++i) a(i, i) += lambda;
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericalError("krr_fit: regularized system is not positive definite");

  Matrix klw = kl * wv.asDiagonal();
  Vector rhs;
  Vector alpha;
  if (mode == KrrMode::Suboptimal) {
    alpha = llt.solve(yl);
  } else {
    rhs = pinv_apply(klw, klw * yl);
    alpha = llt.solve(rhs);
  }
  if (!alpha.allFinite()) throw NumericalError("krr_fit: solve produced non-finite coefficients");

  Regressor regr;
  regr.alpha = alpha;
  regr.support_points = support.points;
  regr.kernel = k;
  regr.lambda = lambda;
  regr.mode = mode;
  regr.reg = reg;

  if (reg == KrrRegularizer::WeightedInverse) {
    // Both modes must satisfy K_l W ((K_l + lambda W^-1) alpha - (K_l W)^+ K_l W y) = 0.
    Vector target = pinv_apply(klw, klw * yl);
    Vector resid = klw * (a * alpha - target);
    regr.normal_eq_residual = resid.norm();
    double ynorm = yl.norm();
    if (regr.normal_eq_residual > 1e-8 * std::max(ynorm, 1e-300))
      throw NumericalError("krr_fit: normal-equation residual " +
                           format_double(regr.normal_eq_residual) + " exceeds tolerance");
  }
  return regr;
}

double krr_predict(const Regressor& reg, const Eigen::RowVectorXd& x) {
  double out = 0.0;
  for (long i = 0; i < reg.alpha.size(); ++i)
    out += reg.alpha[i] * reg.kernel(reg.support_points.row(i), x);
  return out;
}

Vector krr_predict(const Regressor& reg, const PointSet& xs) {
  Vector out(xs.n());
  for (long i = 0; i < xs.n(); ++i) out[i] = krr_predict(reg, xs.points.row(i));
  return out;
}

PointSet augment_with_labels(const PointSet& points) {
  points.validate();
  if (!points.labels) throw UsageError("simultaneous compression needs labels");
  Matrix aug(points.n(), points.dim() + 1);
  aug.col(0) = *points.labels;
  aug.rightCols(points.dim()) = points.points;
  PointSet out;
  out.points = std::move(aug);
  return out;
}

CompressResult simultaneous_coreset(const Kernel& k, const PointSet& points, long T,
                                    CompressAlgo algo, bool with_ysq) {
  PointSet aug = augment_with_labels(points);
  Kernel direct = sum(extended(k), y_weighted(k));
  if (with_ysq) direct = sum(direct, y_square_kernel());
  CompressResult res = algo == CompressAlgo::Herd ? herd(direct, aug, T, 0)
                                                  : frank_wolfe(direct, aug, T);
  return res;
}

namespace {

double mmd_terms(const Kernel& k, const PointSet& a, const Vector& wa, const PointSet& b,
                 const Vector& wb) {
  Matrix kab = cross_gram(k, a, b);
  long na = a.n(), nb = b.n();
  return det_sum_serial(na * nb, [&](long idx) {
    long i = idx / nb, j = idx % nb;
    return wa[i] * wb[j] * kab(i, j);
  });
}

}  // namespace

MMDResult mmd_sq(const Kernel& k, const PointSet& a, const PointSet& b) {
  a.validate();
  b.validate();
  Vector wa = Vector::Constant(a.n(), 1.0 / double(a.n()));
  Vector wb = Vector::Constant(b.n(), 1.0 / double(b.n()));
  double v = mmd_terms(k, a, wa, a, wa) - 2.0 * mmd_terms(k, a, wa, b, wb) +
             mmd_terms(k, b, wb, b, wb);
  MMDResult res;
  res.clipped = v < 0;
  res.mmd_sq = std::max(v, 0.0);
  res.mode = MmdMode::Exact;
  return res;
}

namespace {

PointSet coreset_support(const Coreset& c, const PointSet& ps) {
  if (c.atoms) return *c.atoms;
  return select_rows(ps, c.indices);
}

}  // namespace

MMDResult mmd_sq_compressed(const Kernel& k, const Coreset& ca, const PointSet& a,
                            const Coreset& cb, const PointSet& b) {
  ca.validate();
  cb.validate();
  PointSet sa = coreset_support(ca, a);
  PointSet sb = coreset_support(cb, b);
  Eigen::Map<const Vector> wa(ca.weights.data(), ca.size());
  Eigen::Map<const Vector> wb(cb.weights.data(), cb.size());
  double v = mmd_terms(k, sa, Vector(wa), sa, Vector(wa)) -
             2.0 * mmd_terms(k, sa, Vector(wa), sb, Vector(wb)) +
             mmd_terms(k, sb, Vector(wb), sb, Vector(wb));
  MMDResult res;
  res.clipped = v < 0;
  res.mmd_sq = std::max(v, 0.0);
  res.mode = MmdMode::Compressed;
  res.error_budget = std::sqrt(error_sq(k, ca, a)) + std::sqrt(error_sq(k, cb, b));
  return res;
}

HierarchicalResult hierarchical_compress(const Kernel& k, const PointSet& points,
                                         long batch_size, long per_batch_T, long final_T) {
  points.validate();
  long n = points.n();
  if (batch_size <= 0) batch_size = long(std::ceil(std::sqrt(double(n))));
  if (per_batch_T <= 0) per_batch_T = std::max<long>(1, long(std::ceil(std::log2(double(n)))));
  if (final_T < 1) throw UsageError("hierarchical_compress: final_T must be >= 1");

  long n_batches = (n + batch_size - 1) / batch_size;
  if (n_batches == 1) {
    // A single batch degenerates to one-stage compression.
    CompressResult cr = frank_wolfe(k, points, final_T);
    HierarchicalResult res;
    res.coreset = std::move(cr.coreset);
    res.stage_budget = std::sqrt(error_sq(k, res.coreset, points));
    return res;
  }
  std::vector<long> merged_idx;
  std::vector<double> merged_w;
  double budget = 0.0;
  for (long bidx = 0; bidx < n_batches; ++bidx) {
    long lo = bidx * batch_size;
    long hi = std::min(n, lo + batch_size);
    std::vector<long> rows(size_t(hi - lo));
    for (long i = lo; i < hi; ++i) rows[size_t(i - lo)] = i;
    PointSet batch = select_rows(points, rows);
    CompressResult cr = frank_wolfe(k, batch, per_batch_T);
    double w_batch = double(hi - lo) / double(n);
    budget += w_batch * std::sqrt(error_sq(k, cr.coreset, batch));
    for (long i = 0; i < cr.coreset.size(); ++i) {
      merged_idx.push_back(lo + cr.coreset.indices[size_t(i)]);
      merged_w.push_back(w_batch * cr.coreset.weights[size_t(i)]);
    }
  }

  // Stage 2: compress the merged weighted atom set against its own mean.
  PointSet merged = select_rows(points, merged_idx);
  Vector target = Eigen::Map<const Vector>(merged_w.data(), long(merged_w.size()));
  CompressResult final_cr = frank_wolfe_target(k, merged, target, final_T);
  budget += std::sqrt(error_sq_target(k, final_cr.coreset, merged, target));

  HierarchicalResult res;
  res.stage_budget = budget;
  res.coreset.n_source = n;
  res.coreset.weights = final_cr.coreset.weights;
  for (long i : final_cr.coreset.indices)
    res.coreset.indices.push_back(merged_idx[size_t(i)]);
  res.coreset.validate();
  return res;
}

}  // namespace kmc

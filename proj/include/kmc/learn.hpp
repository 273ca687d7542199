#pragma once

#include "kmc/compress.hpp"

namespace kmc {

enum class KrrMode { Suboptimal, MinimalNorm };
// WeightedInverse is the lambda*W^-1 regularizer of the weighted Tikhonov
// equations; PlainIdentity is an ordinary lambda*I ridge on the coreset
// points, offered for comparison.
enum class KrrRegularizer { WeightedInverse, PlainIdentity };

struct Regressor {
  Vector alpha;
  Matrix support_points;  // l x dim
  Kernel kernel;
  double lambda = 0.0;
  KrrMode mode = KrrMode::Suboptimal;
  KrrRegularizer reg = KrrRegularizer::WeightedInverse;
  double normal_eq_residual = 0.0;
};

enum class MmdMode { Exact, Compressed, Hierarchical };

struct MMDResult {
  double mmd_sq = 0.0;
  MmdMode mode = MmdMode::Exact;
  std::optional<double> error_budget;  // triangle-inequality budget on |mmd|
  bool clipped = false;
};

// Weighted Tikhonov fit on the coreset support. y holds the sample labels
// (length n_source); support labels are taken at the coreset indices.
Regressor krr_fit(const Kernel& k, const Coreset& coreset, const PointSet& points,
                  const Vector& y, double lambda, KrrMode mode,
                  KrrRegularizer reg = KrrRegularizer::WeightedInverse);

double krr_predict(const Regressor& reg, const Eigen::RowVectorXd& x);
Vector krr_predict(const Regressor& reg, const PointSet& xs);

enum class CompressAlgo { Herd, FrankWolfe };

// Compresses the direct-sum target (covariance part + y-weighted part) by
// running the chosen algorithm with the kernel extended(k) + y_weighted(k)
// on augmented points (y_i, x_i). with_ysq adds the y1*y2 summand so the
// mean of y^2 survives compression too.
CompressResult simultaneous_coreset(const Kernel& k, const PointSet& points, long T,
                                    CompressAlgo algo, bool with_ysq = false);

// Builds the augmented (y, x) point set and the direct-sum kernel used by
// simultaneous_coreset; exposed for the decomposition checks.
PointSet augment_with_labels(const PointSet& points);

MMDResult mmd_sq(const Kernel& k, const PointSet& a, const PointSet& b);
MMDResult mmd_sq_compressed(const Kernel& k, const Coreset& ca, const PointSet& a,
                            const Coreset& cb, const PointSet& b);

struct HierarchicalOptions {
  long batch_size = 0;   // 0: ceil(sqrt(n))
  long per_batch_T = 0;  // 0: ceil(log2 n)
};

struct HierarchicalResult {
  Coreset coreset;
  double stage_budget = 0.0;  // sum of per-batch and final-stage error norms
};

HierarchicalResult hierarchical_compress(const Kernel& k, const PointSet& points,
                                         long batch_size, long per_batch_T, long final_T);

}  // namespace kmc

#pragma once

#include "kmc/gram.hpp"

namespace kmc {

// Index selection plus simplex weights against a source sample. Herding
// emits duplicated indices with uniform weights. Eps-net compression emits
// explicit atom points instead of indices.
struct Coreset {
  std::vector<long> indices;
  std::vector<double> weights;
  std::optional<PointSet> atoms;  // set when atoms are not sample points
  long n_source = 0;

  long size() const { return long(weights.size()); }
  void validate() const;  // weights >= 0, sum 1 to 1e-12, indices in range
};

struct TraceRow {
  long t = 0;
  long chosen_index = -1;
  double step = 0.0;      // gamma_t in [0,1]
  double error_sq = 0.0;  // ||m_hat_t - m_n||^2, clipped at 0
  bool clipped = false;
};

struct CompressionTrace {
  std::vector<TraceRow> rows;
  bool exact_fit = false;  // line search denominator hit zero
};

struct CompressOptions {
  bool streaming = false;  // O(n) memory, recompute Gram rows per iteration
  long init_index = 0;     // herding start element
};

struct CompressResult {
  Coreset coreset;
  CompressionTrace trace;
};

// Greedy uniform-weight compression of m_n = (1/n) sum k(X_i,.), candidates
// restricted to the sample.
CompressResult herd(const Kernel& k, const PointSet& points, long T, long init_index = 0,
                    const CompressOptions& opts = {});

// Conditional gradient with exact line search over the simplex.
CompressResult frank_wolfe(const Kernel& k, const PointSet& points, long T,
                           const CompressOptions& opts = {});

// Same, but against the target sum_i target_w[i] k(X_i,.) (a convex
// combination of the candidates). Used by the hierarchical pipeline.
CompressResult frank_wolfe_target(const Kernel& k, const PointSet& points,
                                  const Vector& target_w, long T,
                                  const CompressOptions& opts = {});

struct EpsNetResult {
  Coreset coreset;
  long n_centers = 0;       // occupied centers returned
  long n_grid = 0;          // full net size
  double n_formula = 0.0;   // ceil(d^(d/2) vol / eps^d)
};

// Equispaced eps-net over the domain box; samples snap to their nearest
// center. Refuses nets above 1e8 centers.
EpsNetResult epsnet_compress(const PointSet& points, double eps, const Kernel& k);

// Squared RKHS distance between the coreset embedding and m_n, clipped at 0.
double error_sq(const Kernel& k, const Coreset& coreset, const PointSet& points);
// Same against the weighted target sum_i target_w[i] k(X_i,.).
double error_sq_target(const Kernel& k, const Coreset& coreset, const PointSet& points,
                       const Vector& target_w);

// Indices with ||k(X_i,.) - m_n|| < eps, for kernels with k(x,x)=1 on the
// sample; verifies the pairwise similarity bound k(X_i,X_j) >= 1 - 2 eps^2.
std::vector<long> near_mean_extremes(const Kernel& k, const PointSet& points, double eps);

void write_trace_csv(const std::string& path, const CompressionTrace& trace);

}  // namespace kmc

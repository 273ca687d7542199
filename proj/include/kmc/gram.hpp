#pragma once

#include "kmc/kernel.hpp"

namespace kmc {

// Symmetric Gram matrix together with a provenance tag.
struct GramMatrix {
  Matrix entries;
  std::string source;

  long n() const { return entries.rows(); }

  // symmetric to 1e-12 relative, PSD to eps_psd = 1e-8 * trace.
  void validate() const;
};

double psd_tolerance(const Matrix& gram);

// Upper triangle computed once, mirrored; rows parallelized. Entry values do
// not depend on the thread count. Throws NumericalError naming (i,j) on a
// non-finite kernel value.
GramMatrix gram(const Kernel& k, const PointSet& points);
// Serial reference used by tests and the benchmark.
GramMatrix gram_serial(const Kernel& k, const PointSet& points);

// Cross-Gram: entries[i][j] = k(a_i, b_j).
Matrix cross_gram(const Kernel& k, const PointSet& a, const PointSet& b);

// Greedy pivoted Cholesky on gram(grid); returns pivot row indices in
// selection order. Stops at max_pivots or when the residual diagonal falls
// below tol * initial trace.
std::vector<long> pivoted_cholesky_order(const Matrix& gram, long max_pivots,
                                         double tol = 1e-12);

PointSet select_rows(const PointSet& ps, const std::vector<long>& rows);

}  // namespace kmc

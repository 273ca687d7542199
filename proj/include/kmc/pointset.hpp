#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>

#include "kmc/common.hpp"

namespace kmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// n sample points in R^l, one per row, with optional labels and an optional
// axis-aligned domain box.
struct PointSet {
  Matrix points;                                   // n x l
  std::optional<Vector> labels;                    // length n
  std::optional<std::pair<Vector, Vector>> domain_box;  // (lo, hi)

  long n() const { return points.rows(); }
  long dim() const { return points.cols(); }

  Eigen::RowVectorXd row(long i) const { return points.row(i); }

  void validate() const;
};

PointSet make_pointset(Matrix pts, std::optional<Vector> labels = std::nullopt);

// CSV: header row `x1,...,xl[,y]`, IEEE-754 round-trippable decimals.
PointSet read_pointset_csv(const std::string& path);
void write_pointset_csv(const std::string& path, const PointSet& ps);

// %.17g formatting, round-trippable.
std::string format_double(double v);

}  // namespace kmc

#pragma once

#include <memory>
#include <optional>
#include <string>

#include "kmc/pointset.hpp"

namespace kmc {

// Advisory metadata. Operations never trust dim_rkhs for correctness-critical
// branches; it feeds reports and point-selection defaults only.
struct KernelMeta {
  std::optional<int> dim_rkhs;
  std::optional<double> sup_bound;  // ||k||_inf^(1/2) bound on |phi(x)|
  std::optional<double> lipschitz;
};

class KernelImpl {
 public:
  virtual ~KernelImpl() = default;
  virtual double eval(const double* x, const double* y, long dim) const = 0;
  virtual std::string describe() const = 0;
  // Explicit feature map, when one exists. Used by tests and brute-force
  // oracles; absent for derived kernels where it is not cheaply available.
  virtual bool has_features() const { return false; }
  virtual Vector features(const double* x, long dim) const {
    (void)x;
    (void)dim;
    throw NumericalError("kernel has no explicit feature map");
  }
  KernelMeta meta;
};

// Immutable, shareable kernel handle.
class Kernel {
 public:
  Kernel() = default;
  explicit Kernel(std::shared_ptr<const KernelImpl> impl) : impl_(std::move(impl)) {}

  double operator()(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) const {
    if (x.size() != y.size()) throw UsageError("kernel: point dimensions differ");
    return impl_->eval(x.data(), y.data(), x.size());
  }
  double eval_raw(const double* x, const double* y, long dim) const {
    return impl_->eval(x, y, dim);
  }
  const KernelMeta& meta() const { return impl_->meta; }
  std::string describe() const { return impl_->describe(); }
  bool has_features() const { return impl_->has_features(); }
  Vector features(const Eigen::RowVectorXd& x) const { return impl_->features(x.data(), x.size()); }
  bool valid() const { return impl_ != nullptr; }

 private:
  std::shared_ptr<const KernelImpl> impl_;
};

// Built-in kernels.
Kernel linear_kernel();
// k_d(x,y) = sum_{u=1..d} x^u y^u on scalar inputs.
Kernel poly_no_const_kernel(int degree);
// 1 if the points coincide, else 0.
Kernel delta_kernel();
// k(x,y) = <phi(x), phi(y)> with phi(x) = A x + offset.
Kernel feature_map_kernel(Matrix a, Vector offset = Vector());
Kernel feature_map_kernel(std::function<Vector(const Eigen::RowVectorXd&)> phi,
                          std::string name, KernelMeta meta = {});
Kernel zero_kernel();
Kernel constant_kernel(double value);

// Kernel calculus from the adding/removing-constants construction and the
// related compression targets.
Kernel plus_constant(const Kernel& k, bool one_not_in_space = true);
// With a validation grid the resulting kernel's Gram is checked for PSD;
// failure means the supplied c_sq exceeds 1/||1||^2.
Kernel minus_constant(const Kernel& k, double c_sq);
Kernel minus_constant(const Kernel& k, double c_sq, const PointSet& validation_grid);
Kernel squared(const Kernel& k);
// On augmented points (y, x): y1*y2*k(x1,x2).
Kernel y_weighted(const Kernel& k);
// On augmented points (y, x): k(x1,x2)^2, ignoring y.
Kernel extended(const Kernel& k);
// On augmented points (y, x): y1*y2. Carries the mean of y^2 through a coreset.
Kernel y_square_kernel();
Kernel sum(const Kernel& k1, const Kernel& k2);

// ||1||_H^2 estimated as 1^T K^dagger 1 over the grid (minimal-norm
// interpolant of the constant function). Exact when 1 is in the span of the
// k(x_i,.). Throws NumericalError when the constant is not representable.
double estimate_const_norm(const Kernel& k, const PointSet& grid);

// Kernel config JSON: {"kind": "poly_no_const"|"linear"|"delta"|"feature_map",
// "params": {...}}.
Kernel kernel_from_json_string(const std::string& json_text);
Kernel kernel_from_json_file(const std::string& path);
std::string kernel_to_json_string(const Kernel& k);

}  // namespace kmc

#include "kmc/kernel.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "kmc/gram.hpp"

namespace kmc {

namespace {

using nlohmann::json;

struct LinearKernel final : KernelImpl {
  LinearKernel() = default;
  double eval(const double* x, const double* y, long dim) const override {
    double s = 0.0;
    for (long j = 0; j < dim; ++j) s += x[j] * y[j];
    return s;
  }
  std::string describe() const override { return "linear"; }
  bool has_features() const override { return true; }
  Vector features(const double* x, long dim) const override {
    return Eigen::Map<const Vector>(x, dim);
  }
};

struct PolyNoConstKernel final : KernelImpl {
  int degree;
  explicit PolyNoConstKernel(int d) : degree(d) {
    meta.dim_rkhs = d;
    meta.sup_bound = std::sqrt(double(d));
    double lip_sq = 0.0;
    for (int u = 1; u <= d; ++u) lip_sq += double(u) * double(u);
    meta.lipschitz = std::sqrt(lip_sq);
  }
  double eval(const double* x, const double* y, long dim) const override {
    if (dim != 1) throw UsageError("poly_no_const kernel expects scalar inputs");
    double p = x[0] * y[0];
    double s = 0.0, term = 1.0;
    for (int u = 1; u <= degree; ++u) {
      term *= p;
      s += term;
    }
    return s;
  }
  std::string describe() const override {
    return "poly_no_const(" + std::to_string(degree) + ")";
  }
  bool has_features() const override { return true; }
  Vector features(const double* x, long dim) const override {
    if (dim != 1) throw UsageError("poly_no_const kernel expects scalar inputs");
    Vector f(degree);
    double term = 1.0;
    for (int u = 0; u < degree; ++u) {
      term *= x[0];
      f[u] = term;
    }
    return f;
  }
};

struct DeltaKernel final : KernelImpl {
  double eval(const double* x, const double* y, long dim) const override {
    for (long j = 0; j < dim; ++j)
      if (x[j] != y[j]) return 0.0;
    return 1.0;
  }
  std::string describe() const override { return "delta"; }
};

struct FeatureMapKernel final : KernelImpl {
  std::function<Vector(const Eigen::RowVectorXd&)> phi;
  std::string name;
  FeatureMapKernel(std::function<Vector(const Eigen::RowVectorXd&)> f, std::string n,
                   KernelMeta m)
      : phi(std::move(f)), name(std::move(n)) {
    meta = m;
  }
  double eval(const double* x, const double* y, long dim) const override {
    Eigen::Map<const Eigen::RowVectorXd> xv(x, dim), yv(y, dim);
    return phi(xv).dot(phi(yv));
  }
  std::string describe() const override { return name; }
  bool has_features() const override { return true; }
  Vector features(const double* x, long dim) const override {
    Eigen::Map<const Eigen::RowVectorXd> xv(x, dim);
    return phi(xv);
  }
};

struct ConstantKernel final : KernelImpl {
  double value;
  explicit ConstantKernel(double v) : value(v) {
    if (v > 0) meta.dim_rkhs = 1;
    meta.sup_bound = std::sqrt(std::abs(v));
    meta.lipschitz = 0.0;
  }
  double eval(const double*, const double*, long) const override { return value; }
  std::string describe() const override {
    return value == 0.0 ? "zero" : "constant(" + format_double(value) + ")";
  }
};

struct ShiftedKernel final : KernelImpl {
  Kernel base;
  double shift;
  ShiftedKernel(Kernel b, double s, bool one_not_in_space) : base(std::move(b)), shift(s) {
    const auto& m = base.meta();
    if (m.dim_rkhs) {
      if (s > 0 && one_not_in_space) meta.dim_rkhs = *m.dim_rkhs + 1;
      if (s < 0) meta.dim_rkhs = *m.dim_rkhs - 1;
    }
    if (m.sup_bound) meta.sup_bound = std::sqrt(m.sup_bound.value() * m.sup_bound.value() +
                                                std::abs(s));
    meta.lipschitz = m.lipschitz;
  }
  double eval(const double* x, const double* y, long dim) const override {
    return base.eval_raw(x, y, dim) + shift;
  }
  std::string describe() const override {
    return (shift >= 0 ? "plus_const(" : "minus_const(") + base.describe() + "," +
           format_double(std::abs(shift)) + ")";
  }
};

struct SquaredKernel final : KernelImpl {
  Kernel base;
  explicit SquaredKernel(Kernel b) : base(std::move(b)) {
    if (base.meta().sup_bound)
      meta.sup_bound = base.meta().sup_bound.value() * base.meta().sup_bound.value();
  }
  double eval(const double* x, const double* y, long dim) const override {
    double v = base.eval_raw(x, y, dim);
    return v * v;
  }
  std::string describe() const override { return "squared(" + base.describe() + ")"; }
};

// Augmented-domain kernels live on points (y, x1, ..., xl).
struct YWeightedKernel final : KernelImpl {
  Kernel base;
  explicit YWeightedKernel(Kernel b) : base(std::move(b)) {}
  double eval(const double* x, const double* y, long dim) const override {
    if (dim < 2) throw UsageError("y-weighted kernel expects augmented points (y, x)");
    // Multiplication order matches D * G * D so the Gram identity is exact.
    return base.eval_raw(x + 1, y + 1, dim - 1) * x[0] * y[0];
  }
  std::string describe() const override { return "y_weighted(" + base.describe() + ")"; }
};

struct ExtendedKernel final : KernelImpl {
  Kernel base;  // already squared
  explicit ExtendedKernel(Kernel b) : base(std::move(b)) {
    meta.sup_bound = base.meta().sup_bound;
  }
  double eval(const double* x, const double* y, long dim) const override {
    if (dim < 2) throw UsageError("extended kernel expects augmented points (y, x)");
    return base.eval_raw(x + 1, y + 1, dim - 1);
  }
  std::string describe() const override { return "extended(" + base.describe() + ")"; }
};

struct YSquareKernel final : KernelImpl {
  double eval(const double* x, const double* y, long dim) const override {
    if (dim < 2) throw UsageError("y-square kernel expects augmented points (y, x)");
    return x[0] * y[0];
  }
  std::string describe() const override { return "y_square"; }
};

struct SumKernel final : KernelImpl {
  Kernel k1, k2;
  SumKernel(Kernel a, Kernel b) : k1(std::move(a)), k2(std::move(b)) {
    if (k1.meta().sup_bound && k2.meta().sup_bound) {
      double s1 = *k1.meta().sup_bound, s2 = *k2.meta().sup_bound;
      meta.sup_bound = std::sqrt(s1 * s1 + s2 * s2);
    }
  }
  double eval(const double* x, const double* y, long dim) const override {
    return k1.eval_raw(x, y, dim) + k2.eval_raw(x, y, dim);
  }
  std::string describe() const override {
    return "sum(" + k1.describe() + "," + k2.describe() + ")";
  }
};

}  // namespace

Kernel linear_kernel() { return Kernel(std::make_shared<LinearKernel>()); }

Kernel poly_no_const_kernel(int degree) {
  if (degree < 1) throw UsageError("poly_no_const degree must be >= 1");
  return Kernel(std::make_shared<PolyNoConstKernel>(degree));
}

Kernel delta_kernel() { return Kernel(std::make_shared<DeltaKernel>()); }

Kernel feature_map_kernel(Matrix a, Vector offset) {
  if (offset.size() == 0) offset = Vector::Zero(a.rows());
  if (offset.size() != a.rows())
    throw UsageError("feature_map: offset length must match matrix rows");
  KernelMeta meta;
  meta.dim_rkhs = int(a.rows());
  auto phi = [a = std::move(a), offset = std::move(offset)](const Eigen::RowVectorXd& x) {
    if (x.size() != a.cols()) throw UsageError("feature_map: point dimension mismatch");
    return Vector(a * x.transpose() + offset);
  };
  return Kernel(std::make_shared<FeatureMapKernel>(std::move(phi), "feature_map", meta));
}

Kernel feature_map_kernel(std::function<Vector(const Eigen::RowVectorXd&)> phi,
                          std::string name, KernelMeta meta) {
  return Kernel(std::make_shared<FeatureMapKernel>(std::move(phi), std::move(name), meta));
}

Kernel zero_kernel() { return Kernel(std::make_shared<ConstantKernel>(0.0)); }
Kernel constant_kernel(double v) { return Kernel(std::make_shared<ConstantKernel>(v)); }

Kernel plus_constant(const Kernel& k, bool one_not_in_space) {
  return Kernel(std::make_shared<ShiftedKernel>(k, 1.0, one_not_in_space));
}

Kernel minus_constant(const Kernel& k, double c_sq) {
  if (c_sq < 0) throw UsageError("minus_constant: c_sq must be >= 0");
  if (c_sq == 0.0) return k;
  return Kernel(std::make_shared<ShiftedKernel>(k, -c_sq, false));
}

Kernel minus_constant(const Kernel& k, double c_sq, const PointSet& validation_grid) {
  Kernel km = minus_constant(k, c_sq);
  GramMatrix g = gram(km, validation_grid);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g.entries, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -psd_tolerance(g.entries))
    throw NumericalError("minus_constant: k - c_sq fails PSD on the validation grid (c_sq " +
                         format_double(c_sq) + " too large)");
  return km;
}

Kernel squared(const Kernel& k) { return Kernel(std::make_shared<SquaredKernel>(k)); }
Kernel y_weighted(const Kernel& k) { return Kernel(std::make_shared<YWeightedKernel>(k)); }
Kernel extended(const Kernel& k) {
  return Kernel(std::make_shared<ExtendedKernel>(squared(k)));
}
Kernel y_square_kernel() { return Kernel(std::make_shared<YSquareKernel>()); }
Kernel sum(const Kernel& k1, const Kernel& k2) {
  return Kernel(std::make_shared<SumKernel>(k1, k2));
}

double estimate_const_norm(const Kernel& k, const PointSet& grid) {
  GramMatrix g = gram(k, grid);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g.entries);
  if (es.info() != Eigen::Success)
    throw NumericalError("estimate_const_norm: eigendecomposition failed");
  const Vector& ev = es.eigenvalues();
  double thresh = 1e-10 * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
  Vector ones = Vector::Ones(grid.n());
  Vector proj = es.eigenvectors().transpose() * ones;
  Vector scaled = proj;
  for (long j = 0; j < ev.size(); ++j) scaled[j] = ev[j] > thresh ? proj[j] / ev[j] : 0.0;
  Vector pinv_ones = es.eigenvectors() * scaled;
  double residual = (g.entries * pinv_ones - ones).cwiseAbs().maxCoeff();
  if (residual > 1e-6)
    throw NumericalError(
        "constant function is not representable on this grid (interpolation residual " +
        format_double(residual) + ")");
  return ones.dot(pinv_ones);
}

namespace {

Kernel kernel_from_json(const json& j) {
  if (!j.contains("kind")) throw UsageError("kernel config: missing \"kind\"");
  std::string kind = j.at("kind").get<std::string>();
  json params = j.value("params", json::object());
  if (kind == "linear") return linear_kernel();
  if (kind == "delta") return delta_kernel();
  if (kind == "poly_no_const") {
    int d = params.value("degree", 0);
    if (d < 1) throw UsageError("kernel config: poly_no_const needs params.degree >= 1");
    return poly_no_const_kernel(d);
  }
  if (kind == "feature_map") {
    if (!params.contains("matrix"))
      throw UsageError("kernel config: feature_map needs params.matrix");
    auto rows = params.at("matrix");
    long r = long(rows.size());
    if (r == 0) throw UsageError("kernel config: feature_map matrix is empty");
    long c = long(rows.at(0).size());
    Matrix a(r, c);
    for (long i = 0; i < r; ++i) {
      if (long(rows.at(size_t(i)).size()) != c)
        throw UsageError("kernel config: feature_map matrix rows differ in length");
      for (long jj = 0; jj < c; ++jj) a(i, jj) = rows.at(size_t(i)).at(size_t(jj)).get<double>();
    }
    Vector off = Vector::Zero(r);
    if (params.contains("offset")) {
      auto ov = params.at("offset");
      if (long(ov.size()) != r)
        throw UsageError("kernel config: feature_map offset length mismatch");
      for (long i = 0; i < r; ++i) off[i] = ov.at(size_t(i)).get<double>();
    }
    return feature_map_kernel(std::move(a), std::move(off));
  }
  throw UsageError("kernel config: unknown kind '" + kind + "'");
}

}  // namespace

Kernel kernel_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw UsageError(std::string("kernel config is not valid JSON: ") + e.what());
  }
  return kernel_from_json(j);
}

Kernel kernel_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open kernel config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return kernel_from_json_string(ss.str());
}

std::string kernel_to_json_string(const Kernel& k) {
  json j;
  j["kind"] = k.describe();
  return j.dump();
}

}  // namespace kmc

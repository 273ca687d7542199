#include "kmc/pointset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace kmc {

void PointSet::validate() const {
  if (points.rows() < 1) throw UsageError("point set must contain at least one point");
  if (!points.allFinite()) throw UsageError("point set contains non-finite coordinates");
  if (labels && labels->size() != points.rows())
    throw UsageError("label vector length does not match point count");
}

PointSet make_pointset(Matrix pts, std::optional<Vector> labels) {
  PointSet ps;
  ps.points = std::move(pts);
  ps.labels = std::move(labels);
  ps.validate();
  return ps;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

static std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

PointSet read_pointset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open point-set CSV: " + path);
  std::string header;
  if (!std::getline(in, header)) throw UsageError("empty CSV: " + path);
  auto cols = split_csv_line(header);
  bool has_y = !cols.empty() && cols.back() == "y";
  long l = long(cols.size()) - (has_y ? 1 : 0);
  if (l < 1) throw UsageError("CSV header must list coordinates x1,...,xl: " + path);
  for (long j = 0; j < l; ++j) {
    std::string expect = "x" + std::to_string(j + 1);
    if (cols[size_t(j)] != expect)
      throw UsageError("CSV header column " + std::to_string(j + 1) + " is '" +
                       cols[size_t(j)] + "', expected '" + expect + "': " + path);
  }

  std::vector<double> values;
  std::vector<double> ys;
  std::string line;
  long n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (long(fields.size()) != l + (has_y ? 1 : 0))
      throw UsageError("CSV row " + std::to_string(n + 2) + " has " +
                       std::to_string(fields.size()) + " fields: " + path);
    for (long j = 0; j < l; ++j) {
      size_t pos = 0;
      double v = std::stod(fields[size_t(j)], &pos);
      values.push_back(v);
    }
    if (has_y) ys.push_back(std::stod(fields.back()));
    ++n;
  }
  if (n == 0) throw UsageError("CSV has no data rows: " + path);

  Matrix pts(n, l);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < l; ++j) pts(i, j) = values[size_t(i * l + j)];
  std::optional<Vector> labels;
  if (has_y) {
    Vector y(n);
    for (long i = 0; i < n; ++i) y[i] = ys[size_t(i)];
    labels = y;
  }
  return make_pointset(std::move(pts), std::move(labels));
}

void write_pointset_csv(const std::string& path, const PointSet& ps) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write CSV: " + path);
  for (long j = 0; j < ps.dim(); ++j) {
    if (j) out << ',';
    out << 'x' << (j + 1);
  }
  if (ps.labels) out << ",y";
  out << '\n';
  for (long i = 0; i < ps.n(); ++i) {
    for (long j = 0; j < ps.dim(); ++j) {
      if (j) out << ',';
      out << format_double(ps.points(i, j));
    }
    if (ps.labels) out << ',' << format_double((*ps.labels)[i]);
    out << '\n';
  }
}

}  // namespace kmc

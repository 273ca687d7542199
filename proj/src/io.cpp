#include "kmc/io.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace kmc {

using nlohmann::json;

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open file for checksum: " + path);
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= uint8_t(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", (unsigned long long)h);
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write file: " + path);
  out << text;
}

std::string coreset_to_json(const Coreset& c, const std::string& kernel_config) {
  json j;
  j["indices"] = c.indices;
  j["weights"] = c.weights;
  if (!kernel_config.empty())
    j["kernel"] = json::parse(kernel_config);
  else
    j["kernel"] = json::object();
  j["n_source"] = c.n_source;
  if (c.atoms) {
    std::vector<std::vector<double>> centers;
    for (long i = 0; i < c.atoms->n(); ++i) {
      std::vector<double> row(size_t(c.atoms->dim()));
      for (long d = 0; d < c.atoms->dim(); ++d) row[size_t(d)] = c.atoms->points(i, d);
      centers.push_back(std::move(row));
    }
    j["centers"] = centers;
  }
  return j.dump(2) + "\n";
}

Coreset coreset_from_json(const std::string& text, std::string* kernel_config_out) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw UsageError(std::string("coreset JSON parse error: ") + e.what());
  }
  Coreset c;
  c.weights = j.at("weights").get<std::vector<double>>();
  c.indices = j.at("indices").get<std::vector<long>>();
  c.n_source = j.at("n_source").get<long>();
  if (j.contains("centers") && !j.at("centers").empty()) {
    auto rows = j.at("centers").get<std::vector<std::vector<double>>>();
    Matrix pts(long(rows.size()), long(rows.at(0).size()));
    for (long i = 0; i < pts.rows(); ++i)
      for (long d = 0; d < pts.cols(); ++d) pts(i, d) = rows[size_t(i)][size_t(d)];
    PointSet ps;
    ps.points = std::move(pts);
    c.atoms = std::move(ps);
  }
  if (kernel_config_out && j.contains("kernel")) *kernel_config_out = j.at("kernel").dump();
  c.validate();
  return c;
}

std::string spectral_report_to_json(const SpectralReport& rep) {
  json j;
  j["lambda_min"] = rep.lambda_min;
  j["d_used"] = rep.d_used;
  j["diam_lower"] = rep.diam_lower;
  j["bound_variant"] = to_string(rep.bound_variant);
  j["estimated"] = rep.estimated;
  j["notes"] = rep.notes;
  return j.dump(2) + "\n";
}

std::string ball_report_to_json(const BallReport& rep) {
  json j;
  j["b"] = rep.b;
  j["delta"] = rep.delta;
  j["n_threshold"] = rep.n_threshold;
  j["q"] = rep.q;
  j["c_density"] = rep.c_density;
  j["L"] = rep.L;
  j["l_dim"] = rep.l_dim;
  j["estimated"] = rep.estimated;
  return j.dump(2) + "\n";
}

std::string mmd_result_to_json(const MMDResult& res) {
  json j;
  j["mmd_sq"] = res.mmd_sq;
  j["mode"] = res.mode == MmdMode::Exact        ? "Exact"
              : res.mode == MmdMode::Compressed ? "Compressed"
                                                : "Hierarchical";
  if (res.error_budget) j["error_budget"] = *res.error_budget;
  j["clipped"] = res.clipped;
  return j.dump(2) + "\n";
}

std::string regressor_to_json(const Regressor& reg, const std::vector<double>& predictions) {
  json j;
  j["alpha"] = std::vector<double>(reg.alpha.data(), reg.alpha.data() + reg.alpha.size());
  std::vector<std::vector<double>> sp;
  for (long i = 0; i < reg.support_points.rows(); ++i) {
    std::vector<double> row(size_t(reg.support_points.cols()));
    for (long d = 0; d < reg.support_points.cols(); ++d) row[size_t(d)] = reg.support_points(i, d);
    sp.push_back(std::move(row));
  }
  j["support_points"] = sp;
  j["kernel"] = reg.kernel.describe();
  j["lambda"] = reg.lambda;
  j["mode"] = reg.mode == KrrMode::Suboptimal ? "Suboptimal" : "MinimalNorm";
  j["regularizer"] =
      reg.reg == KrrRegularizer::WeightedInverse ? "weighted_inverse" : "identity";
  j["normal_eq_residual"] = reg.normal_eq_residual;
  if (!predictions.empty()) j["predictions"] = predictions;
  return j.dump(2) + "\n";
}

std::string invariant_report_to_json(const cx::InvariantReport& rep,
                                     const cx::DivergenceReport& div) {
  json j;
  j["steps_checked"] = rep.steps_checked;
  j["violations"] = json::array();
  for (const auto& v : rep.violations) {
    json vj;
    vj["t"] = v.t;
    vj["what"] = v.what;
    j["violations"].push_back(vj);
  }
  j["ok"] = rep.ok();
  j["divergence_ok"] = div.ok;
  j["max_norm"] = div.max_norm;
  json rows = json::array();
  for (const auto& r : div.rows) {
    if (rows.size() >= 64) break;  // envelope summary, not the full trace
    json rj;
    rj["t"] = r.t;
    rj["n"] = r.n;
    rj["norm_sq"] = r.norm_sq;
    rj["bound"] = r.bound;
    rows.push_back(rj);
  }
  j["divergence_rows"] = rows;
  return j.dump(2) + "\n";
}

std::string measure_report_to_json(const cx::MeasureReport& rep) {
  json j;
  j["n_max"] = rep.n_max;
  j["normalizer"] = rep.normalizer;
  j["max_abs_coord"] = rep.max_abs_coord;
  j["coords_checked"] = rep.coords_checked;
  j["constants_positive"] = rep.constants_positive;
  j["integral_truncated"] = rep.integral_truncated;
  j["tail_residual"] = rep.tail_residual;
  j["issues"] = rep.issues;
  j["ok"] = rep.ok();
  return j.dump(2) + "\n";
}

bool ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  return !ec;
}

void write_manifest(const std::string& out_dir, const std::string& subcommand,
                    const std::map<std::string, std::string>& config,
                    const std::vector<std::string>& input_paths) {
  json j;
  j["subcommand"] = subcommand;
  j["version"] = kVersion;
  json cfg = json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;
  json inputs = json::object();
  for (const auto& p : input_paths) inputs[p] = file_checksum(p);
  j["inputs"] = inputs;
  write_text_file((std::filesystem::path(out_dir) / "manifest.json").string(), j.dump(2) + "\n");
}

}  // namespace kmc

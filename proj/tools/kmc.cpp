#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "kmc/io.hpp"
#include "kmc/repro.hpp"

namespace fs = std::filesystem;
using namespace kmc;

namespace {

struct GlobalOpts {
  int threads = 0;
  uint64_t seed = 0;
  std::string out_dir = ".";
};

uint64_t effective_seed(uint64_t flag_seed) {
  if (const char* env = std::getenv("KC_SEED")) return std::strtoull(env, nullptr, 10);
  return flag_seed;
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("input file does not exist: " + path);
}

std::pair<Vector, Vector> parse_box(const std::string& text, long dim) {
  // "lo,hi" applied to every coordinate, or "lo1,hi1;lo2,hi2;...".
  std::vector<std::pair<double, double>> sides;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    auto comma = part.find(',');
    if (comma == std::string::npos) throw UsageError("bad --box segment: " + part);
    sides.emplace_back(std::stod(part.substr(0, comma)), std::stod(part.substr(comma + 1)));
  }
  if (long(sides.size()) == 1) sides.assign(size_t(dim), sides[0]);
  if (long(sides.size()) != dim) throw UsageError("--box must give 1 or dim segments");
  Vector lo(dim), hi(dim);
  for (long j = 0; j < dim; ++j) {
    lo[j] = sides[size_t(j)].first;
    hi[j] = sides[size_t(j)].second;
    if (hi[j] < lo[j]) throw UsageError("--box has hi < lo");
  }
  return {lo, hi};
}

void bounding_box(PointSet& ps) {
  Vector lo = ps.points.colwise().minCoeff();
  Vector hi = ps.points.colwise().maxCoeff();
  ps.domain_box = {lo, hi};
}

int cmd_compress(const GlobalOpts& g, const std::string& algo, long T, double eps,
                 const std::string& kernel_path, const std::string& input_path,
                 const std::string& out_path, const std::string& trace_path,
                 const std::string& box, long init_index, bool streaming,
                 bool simultaneous, bool with_ysq) {
  require_file(kernel_path);
  require_file(input_path);
  Kernel k = kernel_from_json_file(kernel_path);
  PointSet ps = read_pointset_csv(input_path);
  if (!box.empty())
    ps.domain_box = parse_box(box, ps.dim());
  else if (algo == "epsnet")
    bounding_box(ps);
  if (with_ysq && !simultaneous)
    throw UsageError("--with-ysq only applies to --simultaneous compression");

  CompressOptions opts;
  opts.streaming = streaming;
  Coreset coreset;
  CompressionTrace trace;
  if (simultaneous) {
    if (algo != "herd" && algo != "fw")
      throw UsageError("--simultaneous requires --algo herd or fw");
    auto r = simultaneous_coreset(k, ps, T,
                                  algo == "herd" ? CompressAlgo::Herd : CompressAlgo::FrankWolfe,
                                  with_ysq);
    coreset = std::move(r.coreset);
    trace = std::move(r.trace);
  } else if (algo == "herd") {
    auto r = herd(k, ps, T, init_index, opts);
    coreset = std::move(r.coreset);
    trace = std::move(r.trace);
  } else if (algo == "fw") {
    auto r = frank_wolfe(k, ps, T, opts);
    coreset = std::move(r.coreset);
    trace = std::move(r.trace);
  } else if (algo == "epsnet") {
    auto r = epsnet_compress(ps, eps, k);
    coreset = std::move(r.coreset);
    std::cout << "epsnet: " << r.n_centers << " occupied centers, grid " << r.n_grid
              << ", N_formula " << format_double(r.n_formula) << "\n";
  } else {
    throw UsageError("--algo must be herd|fw|epsnet");
  }

  ensure_directory(g.out_dir);
  write_text_file(out_path, coreset_to_json(coreset, read_text_file(kernel_path)));
  if (!trace_path.empty() && algo != "epsnet") kmc::write_trace_csv(trace_path, trace);
  double err = simultaneous
                   ? error_sq(with_ysq ? sum(sum(extended(k), y_weighted(k)), y_square_kernel())
                                       : sum(extended(k), y_weighted(k)),
                              coreset, augment_with_labels(ps))
                   : error_sq(k, coreset, ps);
  std::cout << "error_sq " << format_double(err) << "\n";
  write_manifest(g.out_dir, "compress",
                 {{"algo", algo},
                  {"T", std::to_string(T)},
                  {"eps", format_double(eps)},
                  {"init_index", std::to_string(init_index)},
                  {"streaming", streaming ? "1" : "0"},
                  {"simultaneous", simultaneous ? "1" : "0"},
                  {"with_ysq", with_ysq ? "1" : "0"},
                  {"seed", std::to_string(g.seed)},
                  {"out", out_path}},
                 {kernel_path, input_path});
  return 0;
}

int cmd_krr(const GlobalOpts& g, const std::string& coreset_path, const std::string& input_path,
            double lambda, const std::string& mode_s, const std::string& reg_s,
            const std::string& predict_path, const std::string& out_path) {
  require_file(coreset_path);
  require_file(input_path);
  if (!predict_path.empty()) require_file(predict_path);
  std::string kernel_cfg;
  Coreset coreset = coreset_from_json(read_text_file(coreset_path), &kernel_cfg);
  Kernel k = kernel_from_json_string(kernel_cfg);
  PointSet ps = read_pointset_csv(input_path);
  if (!ps.labels) throw UsageError("krr: input CSV must carry a y column");
  KrrMode mode = mode_s == "min" ? KrrMode::MinimalNorm : KrrMode::Suboptimal;
  KrrRegularizer reg =
      reg_s == "id" ? KrrRegularizer::PlainIdentity : KrrRegularizer::WeightedInverse;
  Regressor regr = krr_fit(k, coreset, ps, *ps.labels, lambda, mode, reg);
  std::vector<double> preds;
  if (!predict_path.empty()) {
    PointSet test = read_pointset_csv(predict_path);
    Vector p = krr_predict(regr, test);
    preds.assign(p.data(), p.data() + p.size());
  }
  ensure_directory(g.out_dir);
  write_text_file(out_path, regressor_to_json(regr, preds));
  std::vector<std::string> inputs = {coreset_path, input_path};
  if (!predict_path.empty()) inputs.push_back(predict_path);
  write_manifest(g.out_dir, "krr",
                 {{"lambda", format_double(lambda)},
                  {"mode", mode_s},
                  {"reg", reg_s},
                  {"seed", std::to_string(g.seed)},
                  {"out", out_path}},
                 inputs);
  return 0;
}

int cmd_mmd(const GlobalOpts& g, const std::string& a_path, const std::string& b_path,
            const std::string& kernel_path, long compress_T, const std::string& out_path) {
  require_file(a_path);
  require_file(b_path);
  require_file(kernel_path);
  Kernel k = kernel_from_json_file(kernel_path);
  PointSet a = read_pointset_csv(a_path);
  PointSet b = read_pointset_csv(b_path);
  MMDResult res;
  if (compress_T > 0) {
    CompressResult ca = frank_wolfe(k, a, compress_T);
    CompressResult cb = frank_wolfe(k, b, compress_T);
    res = mmd_sq_compressed(k, ca.coreset, a, cb.coreset, b);
  } else {
    res = mmd_sq(k, a, b);
  }
  ensure_directory(g.out_dir);
  write_text_file(out_path, mmd_result_to_json(res));
  std::cout << "mmd_sq " << format_double(res.mmd_sq) << "\n";
  write_manifest(g.out_dir, "mmd",
                 {{"compress", std::to_string(compress_T)},
                  {"seed", std::to_string(g.seed)},
                  {"out", out_path}},
                 {a_path, b_path, kernel_path});
  return 0;
}

int cmd_diagnose(const GlobalOpts& g, const std::string& kernel_path,
                 const std::string& input_path, const std::string& variant,
                 const std::string& ball, double kfunc_t, const std::string& out_path) {
  require_file(kernel_path);
  require_file(input_path);
  Kernel k = kernel_from_json_file(kernel_path);
  PointSet ps = read_pointset_csv(input_path);
  GramMatrix full = gram(k, ps);
  auto pivots = pivoted_cholesky_order(full.entries, ps.n(), 1e-12);
  long rank = long(pivots.size());
  if (rank < 1) throw NumericalError("diagnose: kernel vanishes on the grid");

  bool one_in_space = true;
  double const_norm_sq = 0.0;
  try {
    const_norm_sq = estimate_const_norm(k, ps);
  } catch (const NumericalError&) {
    one_in_space = false;
  }

  SpectralReport rep;
  std::string chosen = variant;
  if (chosen == "auto") chosen = one_in_space ? "kminus" : "kplus";
  if (chosen == "kminus") {
    if (!one_in_space)
      throw UsageError("diagnose: constants are not representable; use --variant kplus");
    std::vector<long> rows(pivots.begin(), pivots.begin() + rank);
    rep = diam_lower_kminus(k, select_rows(ps, rows), 1.0 / const_norm_sq);
  } else if (chosen == "kplus") {
    GramMatrix plus = gram(plus_constant(k), ps);
    auto piv_plus = pivoted_cholesky_order(plus.entries, ps.n(), 1e-12);
    std::vector<long> rows(piv_plus.begin(), piv_plus.end());
    rep = diam_lower_kplus(k, select_rows(ps, rows));
  } else if (chosen == "mercer") {
    double lam = mercer_estimate(k, ps);
    rep = diam_lower_mercer(lam, one_in_space, /*estimated=*/true);
  } else {
    throw UsageError("--variant must be auto|kplus|kminus|mercer");
  }

  if (kfunc_t > 0) {
    // Constant-approximation trade-off at the requested t, reported next to
    // the eigenvalue bound without any limit claim.
    KFunctionalResult kf = k_functional(k, ps, kfunc_t);
    rep.notes += "; K(1," + format_double(kfunc_t) + ") <= " + format_double(kf.value);
  }

  ensure_directory(g.out_dir);
  std::string payload = spectral_report_to_json(rep);
  if (!ball.empty()) {
    auto vals = ball;
    double c, L, q;
    if (std::sscanf(vals.c_str(), "%lf,%lf,%lf", &c, &L, &q) != 3)
      throw UsageError("--ball expects \"c,L,q\"");
    double sup_k = 0.0;
    for (long i = 0; i < ps.n(); ++i) sup_k = std::max(sup_k, full.entries(i, i));
    BallReport br = ball_report(rep.diam_lower, q, c, L, int(ps.dim()), sup_k,
                                rep.bound_variant == BoundVariant::MercerEstimated);
    payload += ball_report_to_json(br);
  }
  write_text_file(out_path, payload);
  std::cout << payload;
  write_manifest(g.out_dir, "diagnose",
                 {{"variant", variant},
                  {"ball", ball},
                  {"seed", std::to_string(g.seed)},
                  {"out", out_path}},
                 {kernel_path, input_path});
  return 0;
}

int cmd_counterexample(const GlobalOpts& g, long T, int nmax, const std::string& fig2) {
  ensure_directory(g.out_dir);
  cx::AtomStore store(nmax);
  cx::HerdTrace trace = cx::run(store, T);
  cx::write_trace_csv((fs::path(g.out_dir) / "trace.csv").string(), trace);
  cx::InvariantReport inv = cx::verify_invariants(trace, store);
  cx::DivergenceReport div = cx::divergence_check(trace);
  write_text_file((fs::path(g.out_dir) / "invariants.json").string(),
                  invariant_report_to_json(inv, div));
  // The tilde-coordinate sweep enumerates sum_n N_n ~ 2^n coordinates; keep
  // the measure truncation at a level where that stays cheap.
  cx::MeasureReport mrep = cx::measure_mean_check(std::min(nmax, 24));
  write_text_file((fs::path(g.out_dir) / "measure_check.json").string(),
                  measure_report_to_json(mrep));

  if (!fig2.empty()) {
    std::vector<int> ms;
    std::stringstream ss(fig2);
    std::string part;
    while (std::getline(ss, part, ',')) ms.push_back(std::stoi(part));
    auto tables = cx::figure2_data(trace, store, ms);
    for (const auto& table : tables) {
      std::ostringstream csv;
      csv << "n,abs_inner,lower_bound\n";
      for (const auto& row : table.rows)
        csv << row.n << ',' << format_double(row.abs_inner) << ','
            << format_double(row.lower_bound) << '\n';
      write_text_file((fs::path(g.out_dir) / ("fig2_m" + std::to_string(table.m) + ".csv")).string(),
                      csv.str());
    }
  }
  std::cout << "steps " << trace.steps.size() << ", invariant violations "
            << inv.violations.size() << ", max ||w|| " << format_double(div.max_norm) << "\n";
  write_manifest(g.out_dir, "counterexample",
                 {{"T", std::to_string(T)},
                  {"nmax", std::to_string(nmax)},
                  {"fig2", fig2},
                  {"seed", std::to_string(g.seed)}},
                 {});
  if (!inv.ok() || !div.ok) throw InvariantError("counterexample run violated proof invariants");
  return 0;
}

int cmd_repro(const GlobalOpts& g, const std::string& which) {
  ensure_directory(g.out_dir);
  std::vector<repro::CaseResult> results;
  if (which == "all")
    results = repro::run_all(g.seed, g.out_dir);
  else
    results.push_back(repro::run_case(which, g.seed, g.out_dir));
  repro::write_summary(g.out_dir, results);
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  ("
              << format_double(r.seconds) << "s)\n";
    for (const auto& d : r.detail) std::cout << "    " << d << "\n";
    all_pass = all_pass && r.pass;
  }
  write_manifest(g.out_dir, "repro",
                 {{"case", which}, {"seed", std::to_string(g.seed)}}, {});
  if (!all_pass) throw InvariantError("repro: at least one case failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compression of empirical measures in finite-dimensional RKHSs"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOpts g;
  app.add_option("--threads", g.threads, "worker thread count (0 = library default)");
  app.add_option("--seed", g.seed, "seed for randomized cases (KC_SEED overrides)");
  app.add_option("--out-dir", g.out_dir, "directory for manifest and derived outputs");

  auto* c_compress = app.add_subcommand("compress", "compress a sample into a coreset");
  std::string algo = "fw", kernel_path, input_path, out_path = "coreset.json",
              trace_path, box;
  long T = 64, init_index = 0;
  double eps = 0.1;
  bool streaming = false, simultaneous = false, with_ysq = false;
  c_compress->add_option("--algo", algo, "herd|fw|epsnet");
  c_compress->add_option("--T", T, "iterations");
  c_compress->add_option("--eps", eps, "eps-net radius");
  c_compress->add_option("--kernel", kernel_path, "kernel config JSON")->required();
  c_compress->add_option("--input", input_path, "sample CSV")->required();
  c_compress->add_option("--out", out_path, "coreset JSON output");
  c_compress->add_option("--trace", trace_path, "trace CSV output");
  c_compress->add_option("--box", box, "domain box lo,hi[;lo,hi...]");
  c_compress->add_option("--init-index", init_index, "herding start element");
  c_compress->add_flag("--streaming", streaming, "O(n) memory mode");
  c_compress->add_flag("--simultaneous", simultaneous,
                       "compress covariance and label-weighted targets together");
  c_compress->add_flag("--with-ysq", with_ysq, "add the label-product summand");

  auto* c_krr = app.add_subcommand("krr", "weighted Tikhonov regression on a coreset");
  std::string coreset_path, krr_input, mode_s = "sub", reg_s = "winv", predict_path,
              krr_out = "krr.json";
  double lambda = 1e-2;
  c_krr->add_option("--coreset", coreset_path, "coreset JSON")->required();
  c_krr->add_option("--input", krr_input, "sample CSV with y column")->required();
  c_krr->add_option("--lambda", lambda, "regularization strength");
  c_krr->add_option("--mode", mode_s, "sub|min");
  c_krr->add_option("--reg", reg_s, "winv (weighted W^-1) | id (plain identity)");
  c_krr->add_option("--predict", predict_path, "test CSV to predict");
  c_krr->add_option("--out", krr_out, "regressor JSON output");

  auto* c_mmd = app.add_subcommand("mmd", "two-sample MMD statistic");
  std::string a_path, b_path, mmd_kernel, mmd_out = "mmd.json";
  long compress_T = 0;
  c_mmd->add_option("--a", a_path, "first sample CSV")->required();
  c_mmd->add_option("--b", b_path, "second sample CSV")->required();
  c_mmd->add_option("--kernel", mmd_kernel, "kernel config JSON")->required();
  c_mmd->add_option("--compress", compress_T, "coreset size per sample (0 = exact)");
  c_mmd->add_option("--out", mmd_out, "result JSON output");

  auto* c_diag = app.add_subcommand("diagnose", "spectral diameter/ball diagnostics");
  std::string diag_kernel, diag_input, variant = "auto", ball, diag_out = "report.json";
  double kfunc_t = 0.0;
  c_diag->add_option("--kernel", diag_kernel, "kernel config JSON")->required();
  c_diag->add_option("--input", diag_input, "grid CSV")->required();
  c_diag->add_option("--variant", variant, "auto|kplus|kminus|mercer");
  c_diag->add_option("--ball", ball, "emit ball report: \"c,L,q\"");
  c_diag->add_option("--kfunctional", kfunc_t,
                     "report the constant-approximation K-functional at this t");
  c_diag->add_option("--out", diag_out, "report JSON output");

  auto* c_cx = app.add_subcommand("counterexample", "slow-rate construction simulator");
  long cx_T = 20000;
  int cx_nmax = 30;
  std::string fig2;
  c_cx->add_option("--T", cx_T, "herding steps");
  c_cx->add_option("--nmax", cx_nmax, "construction truncation level");
  c_cx->add_option("--fig2", fig2, "comma list of m values for profile tables");

  auto* c_repro = app.add_subcommand("repro", "run the acceptance-criteria suite");
  std::string which = "all";
  c_repro->add_option("--case", which, "all or a case name");

  try {
    app.parse(argc, argv);
    g.seed = effective_seed(g.seed);
    set_threads(g.threads);
    if (*c_compress)
      return cmd_compress(g, algo, T, eps, kernel_path, input_path, out_path, trace_path, box,
                          init_index, streaming, simultaneous, with_ysq);
    if (*c_krr)
      return cmd_krr(g, coreset_path, krr_input, lambda, mode_s, reg_s, predict_path, krr_out);
    if (*c_mmd) return cmd_mmd(g, a_path, b_path, mmd_kernel, compress_T, mmd_out);
    if (*c_diag)
      return cmd_diagnose(g, diag_kernel, diag_input, variant, ball, kfunc_t, diag_out);
    if (*c_cx) return cmd_counterexample(g, cx_T, cx_nmax, fig2);
    if (*c_repro) return cmd_repro(g, which);
    return 2;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

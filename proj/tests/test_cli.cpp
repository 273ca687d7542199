// End-to-end checks of the CLI surface: exit codes, file formats, and
// byte-level determinism of repeated runs.
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "kmc/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int checks = 0, failures = 0;

void expect(bool ok, const std::string& what) {
  ++checks;
  if (!ok) {
    ++failures;
    std::printf("FAIL %s\n", what.c_str());
  }
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(KMC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

int main() {
  fs::path dir = fs::temp_directory_path() / "kmc_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::path sample = dir / "sample.csv";
  fs::path kernel = dir / "kernel.json";
  {
    std::ofstream csv(sample);
    csv << "x1,y\n";
    kmc::Rng rng(2024);
    for (int i = 0; i < 40; ++i)
      csv << kmc::format_double(rng.uniform(-1.0, 1.0)) << ','
          << kmc::format_double(rng.normal()) << "\n";
    std::ofstream kf(kernel);
    kf << R"({"kind":"poly_no_const","params":{"degree":2}})";
  }

  // Missing input file: exit 2 and no partial outputs.
  fs::path ghost_out = dir / "ghost.json";
  int rc = run_cli("--out-dir " + (dir / "ghost").string() + " compress --algo fw --T 8 --kernel " +
                   kernel.string() + " --input /nonexistent.csv --out " + ghost_out.string());
  expect(rc == 2, "missing input exits with code 2");
  expect(!fs::exists(ghost_out), "no partial outputs on usage error");

  // Compress + trace + coreset JSON shape.
  fs::path coreset = dir / "coreset.json";
  fs::path trace = dir / "trace.csv";
  rc = run_cli("--out-dir " + dir.string() + " compress --algo fw --T 12 --kernel " +
               kernel.string() + " --input " + sample.string() + " --out " + coreset.string() +
               " --trace " + trace.string());
  expect(rc == 0, "compress runs");
  expect(fs::exists(dir / "manifest.json"), "manifest written");
  {
    json j = json::parse(slurp(coreset));
    expect(j.contains("indices") && j.contains("weights") && j.contains("kernel") &&
               j.contains("n_source"),
           "coreset JSON carries the documented fields");
    expect(j["n_source"].get<long>() == 40, "coreset n_source");
    double sum = 0.0;
    for (double w : j["weights"].get<std::vector<double>>()) sum += w;
    expect(std::abs(sum - 1.0) <= 1e-12, "coreset weights on the simplex");
    std::ifstream tr(trace);
    std::string header;
    std::getline(tr, header);
    expect(header == "t,chosen_index,step,error_sq", "trace CSV header");
  }

  // KRR on the compressed coreset.
  rc = run_cli("--out-dir " + dir.string() + " krr --coreset " + coreset.string() + " --input " +
               sample.string() + " --lambda 0.1 --mode sub --predict " + sample.string() +
               " --out " + (dir / "krr.json").string());
  expect(rc == 0, "krr runs");
  {
    json j = json::parse(slurp(dir / "krr.json"));
    expect(j.contains("alpha") && j.contains("support_points") && j.contains("lambda") &&
               j.contains("mode"),
           "regressor JSON carries the documented fields");
    expect(j["predictions"].size() == 40, "predictions emitted");
  }

  // MMD exact and compressed.
  rc = run_cli("--out-dir " + dir.string() + " mmd --a " + sample.string() + " --b " +
               sample.string() + " --kernel " + kernel.string() + " --out " +
               (dir / "mmd.json").string());
  expect(rc == 0, "mmd runs");
  {
    json j = json::parse(slurp(dir / "mmd.json"));
    expect(j["mode"] == "Exact", "mmd mode");
    expect(j["mmd_sq"].get<double>() <= 1e-10, "mmd(A,A) = 0");
  }
  rc = run_cli("--out-dir " + dir.string() + " mmd --a " + sample.string() + " --b " +
               sample.string() + " --kernel " + kernel.string() + " --compress 6 --out " +
               (dir / "mmdc.json").string());
  expect(rc == 0, "compressed mmd runs");
  expect(json::parse(slurp(dir / "mmdc.json")).contains("error_budget"),
         "compressed mmd reports its budget");

  // Diagnose on the two-point delta-kernel grid.
  fs::path dgrid = dir / "delta.csv";
  fs::path dkernel = dir / "delta.json";
  {
    std::ofstream csv(dgrid);
    csv << "x1\n0\n1\n";
    std::ofstream kf(dkernel);
    kf << R"({"kind":"delta"})";
  }
  rc = run_cli("--out-dir " + dir.string() + " diagnose --kernel " + dkernel.string() +
               " --input " + dgrid.string() + " --out " + (dir / "report.json").string());
  expect(rc == 0, "diagnose runs");
  {
    json j = json::parse(slurp(dir / "report.json"));
    expect(j["bound_variant"] == "KMinus", "delta grid picks the constants-in-space variant");
    expect(j["d_used"] == 2, "diagnose d_used");
    expect(std::abs(j["diam_lower"].get<double>() - 0.5 * std::sqrt(0.5)) <= 1e-9,
           "diagnose diameter bound value");
    expect(j["estimated"] == false, "diagnose estimated flag");
  }

  // Counterexample emission.
  fs::path cxdir = dir / "cx";
  rc = run_cli("--out-dir " + cxdir.string() + " counterexample --T 1500 --nmax 16 --fig2 5");
  expect(rc == 0, "counterexample runs");
  expect(fs::exists(cxdir / "trace.csv") && fs::exists(cxdir / "invariants.json") &&
             fs::exists(cxdir / "measure_check.json") && fs::exists(cxdir / "fig2_m5.csv"),
         "counterexample artifacts written");
  expect(json::parse(slurp(cxdir / "invariants.json"))["ok"] == true,
         "counterexample invariants hold");

  // Determinism: identical config, byte-identical outputs.
  fs::path d1 = dir / "det1", d2 = dir / "det2";
  for (const fs::path& d : {d1, d2}) {
    fs::create_directories(d);
    int r = run_cli("--out-dir " + d.string() + " --seed 3 compress --algo herd --T 16 --kernel " +
                    kernel.string() + " --input " + sample.string() + " --out " +
                    (d / "c.json").string() + " --trace " + (d / "t.csv").string());
    expect(r == 0, "determinism probe run");
  }
  expect(slurp(d1 / "c.json") == slurp(d2 / "c.json"), "coreset bytes identical across reruns");
  expect(slurp(d1 / "t.csv") == slurp(d2 / "t.csv"), "trace bytes identical across reruns");

  // ... and across thread counts.
  fs::path d4 = dir / "det4";
  fs::create_directories(d4);
  rc = run_cli("--out-dir " + d4.string() + " --seed 3 --threads 4 compress --algo herd" +
               " --T 16 --kernel " + kernel.string() + " --input " + sample.string() +
               " --out " + (d4 / "c.json").string() + " --trace " + (d4 / "t.csv").string());
  expect(rc == 0, "threaded determinism probe run");
  expect(slurp(d1 / "c.json") == slurp(d4 / "c.json"), "coreset bytes identical across threads");
  expect(slurp(d1 / "t.csv") == slurp(d4 / "t.csv"), "trace bytes identical across threads");

  // Diagnose can report the K-functional alongside the eigenvalue bound.
  rc = run_cli("--out-dir " + dir.string() + " diagnose --kernel " + dkernel.string() +
               " --input " + dgrid.string() + " --kfunctional 0.5 --out " +
               (dir / "reportk.json").string());
  expect(rc == 0, "diagnose --kfunctional runs");
  {
    json j = json::parse(slurp(dir / "reportk.json"));
    std::string notes = j["notes"].get<std::string>();
    expect(notes.find("K(1,0.5)") != std::string::npos, "K-functional reported in notes");
  }

  // Bad usage exits with 2.
  rc = run_cli("compress --algo nope --kernel " + kernel.string() + " --input " + sample.string());
  expect(rc == 2, "unknown algo exits with 2");

  // Numerical refusal (eps-net blow-up) exits with 3.
  fs::path wide = dir / "wide.csv";
  {
    std::ofstream csv(wide);
    csv << "x1,x2,x3,x4\n";
    kmc::Rng rng(5);
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 4; ++j) csv << (j ? "," : "") << kmc::format_double(rng.uniform());
      csv << "\n";
    }
    std::ofstream kf(dir / "lin.json");
    kf << R"({"kind":"linear"})";
  }
  rc = run_cli("--out-dir " + dir.string() + " compress --algo epsnet --eps 0.001 --kernel " +
               (dir / "lin.json").string() + " --input " + wide.string() + " --out " +
               (dir / "never.json").string());
  expect(rc == 3, "eps-net refusal exits with 3");

  // Global flags may follow the subcommand; KC_SEED overrides --seed.
  fs::path envdir = dir / "env";
  fs::create_directories(envdir);
  rc = run_cli("mmd --a " + sample.string() + " --b " + sample.string() + " --kernel " +
               kernel.string() + " --out " + (envdir / "m.json").string() + " --out-dir " +
               envdir.string() + " --seed 11");
  expect(rc == 0, "global flags accepted after the subcommand");
  {
    json m = json::parse(slurp(envdir / "manifest.json"));
    expect(m["config"]["seed"] == "11", "seed recorded in the manifest");
  }
  {
    std::string cmd = std::string("KC_SEED=99 ") + KMC_CLI_PATH + " --out-dir " +
                      envdir.string() + " --seed 11 mmd --a " + sample.string() + " --b " +
                      sample.string() + " --kernel " + kernel.string() + " --out " +
                      (envdir / "m2.json").string() + " >/dev/null 2>&1";
    int r = WEXITSTATUS(std::system(cmd.c_str()));
    expect(r == 0, "KC_SEED run succeeds");
    json m = json::parse(slurp(envdir / "manifest.json"));
    expect(m["config"]["seed"] == "99", "KC_SEED overrides --seed");
  }

  // Simultaneous compression (labels required) emits a sample-indexed coreset.
  rc = run_cli("--out-dir " + dir.string() + " compress --algo fw --T 10 --simultaneous" +
               " --with-ysq --kernel " + kernel.string() + " --input " + sample.string() +
               " --out " + (dir / "sim.json").string());
  expect(rc == 0, "simultaneous compression runs");
  {
    json j = json::parse(slurp(dir / "sim.json"));
    for (long idx : j["indices"].get<std::vector<long>>())
      expect(idx >= 0 && idx < 40, "simultaneous coreset references sample indices");
  }

  // A single repro case through the CLI.
  fs::path rdir = dir / "repro";
  rc = run_cli("--out-dir " + rdir.string() + " repro --case figure3");
  expect(rc == 0, "repro --case figure3 passes");
  expect(fs::exists(rdir / "figure3.csv") && fs::exists(rdir / "summary.txt"),
         "repro artifacts written");
  {
    std::ifstream f(rdir / "figure3.csv");
    std::string header;
    std::getline(f, header);
    expect(header == "d,bound,achieved", "figure3 table header");
    int rows = 0;
    std::string line;
    while (std::getline(f, line))
      if (!line.empty()) ++rows;
    expect(rows == 4, "figure3 table has the four degrees");
  }

  std::printf("%d/%d cli checks passed\n", checks - failures, checks);
  return failures == 0 ? 0 : 1;
}

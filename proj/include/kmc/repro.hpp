#pragma once

#include <string>
#include <vector>

#include "kmc/common.hpp"

namespace kmc {
namespace repro {

struct CaseResult {
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  double time_limit = 0.0;  // 0: none
  std::vector<std::string> detail;
};

std::vector<std::string> case_names();

// Runs one named case; writes artifact files into out_dir when non-empty.
// Outputs are a pure function of (name, seed).
CaseResult run_case(const std::string& name, uint64_t seed, const std::string& out_dir);

std::vector<CaseResult> run_all(uint64_t seed, const std::string& out_dir);

// summary.json + summary.txt (one pass/fail line per case). Timing is kept
// out of the files so reruns are byte-identical.
void write_summary(const std::string& out_dir, const std::vector<CaseResult>& results);

}  // namespace repro
}  // namespace kmc

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kmc/common.hpp"

namespace kmc {
namespace cx {

// Coordinates of the orthonormal family: E(n) for e_n, ETilde(n,i) for the
// auxiliary directions that chain the c-elements together.
enum class AtomKind : int { A = 0, B = 1, C = 2, D = 3 };

std::string to_string(AtomKind k);

struct AtomId {
  AtomKind kind;
  int n = 0;
  int64_t i = 0;  // only C uses i

  friend bool operator==(const AtomId& a, const AtomId& b) {
    return a.kind == b.kind && a.n == b.n && a.i == b.i;
  }
  // A-kind preferred, then lexicographic (kind, n, i).
  friend bool operator<(const AtomId& a, const AtomId& b) {
    if (a.kind != b.kind) return int(a.kind) < int(b.kind);
    if (a.n != b.n) return a.n < b.n;
    return a.i < b.i;
  }
};

struct SparseEntry {
  bool tilde = false;
  int n = 0;
  int64_t i = 0;  // tilde second index
  double coef = 0.0;
};

struct Atom {
  AtomId id;
  std::vector<SparseEntry> vec;
  double norm_sq = 0.0;
};

// Closed-form constants of the construction, C-elements generated on demand
// (their count per level grows like 2^n/n, so they are never materialized in
// bulk).
class AtomStore {
 public:
  explicit AtomStore(int n_max);

  int n_max() const { return n_max_; }
  double C_const() const { return 64.0; }
  double a_prime(int n) const;            // C ceil(2^n/ln(n+1)) 2^-n
  double a_coef(int n) const;             // <a_n, e_n> = a'_n + 1/n
  double b_coef(int n) const { return -std::pow(2.0, -n); }
  int64_t N(int n) const;                 // N_1 = 1, N_n = ceil(2/(n 2^-n))
  double beta(int n) const;               // -1/(n N_n)
  double alpha(int n, int64_t i) const;   // alpha_{n,1} = sqrt(<e_n,a_n>/n)

  Atom a(int n) const;
  Atom b(int n) const;
  Atom c(int n, int64_t i) const;
  Atom d(int n) const;
  Atom atom(const AtomId& id) const;

 private:
  int n_max_;
  std::vector<double> a_prime_;  // index n
  std::vector<int64_t> big_n_;
};

// Weight-vector state over the sparse basis.
struct WState {
  std::vector<double> coef_e;                       // index n, 0 unused
  std::map<std::pair<int, int64_t>, double> coef_t; // (n,i) -> coefficient

  double inner(const Atom& atom) const;
  double norm_sq() const;
  void subtract(const Atom& atom);
};

struct StepRecord {
  long t = 0;
  AtomId chosen;
  double inner = 0.0;    // <w_t, x_t>
  double norm_sq = 0.0;  // ||w_t||^2 before the update, incremental
  bool tie_broken = false;
};

struct HerdTrace {
  std::vector<StepRecord> steps;
  std::vector<WState> snapshots;  // w_t at selection time, per step
  WState final_state;             // w_{T+1}
  int n_max = 0;
};

// w_1 = c_{1,1}; each step subtracts the argmax atom (the mean element is 0
// by construction). Throws NumericalError naming t when the argmax value is
// not positive (the n_max truncation boundary was reached).
HerdTrace run(const AtomStore& store, long T);

struct Violation {
  long t = 0;
  std::string what;
};

struct InvariantReport {
  std::vector<Violation> violations;
  long steps_checked = 0;
  bool ok() const { return violations.empty(); }
};

// Checks the four structural facts of the run: selections stay on the atom
// family, w_t keeps the two-case closed form with grid-valued gamma_j within
// the proven bounds, the far-coordinate mass bound for n >= 7, and the
// once-and-in-order selection of the a_n. Tolerance 1e-9 absolute.
InvariantReport verify_invariants(const HerdTrace& trace, const AtomStore& store);

struct DivergenceRow {
  long t = 0;
  int n = 0;
  double norm_sq = 0.0;
  double bound = 0.0;  // (n-3)/ln^2(n+1) - 2/ln 2
};

struct DivergenceReport {
  std::vector<DivergenceRow> rows;  // one per qualifying step (n >= 7)
  double max_norm = 0.0;
  bool ok = true;
};

DivergenceReport divergence_check(const HerdTrace& trace);

struct Fig2Row {
  int n = 0;
  double abs_inner = 0.0;
  double lower_bound = 0.0;  // min{a'_j, max{2^j <a_m,e_m>/m - 2^-j, 0}}
};

struct Fig2Table {
  int m = 0;
  long t = 0;  // step at which a_m was chosen
  std::vector<Fig2Row> rows;
};

// Per requested m, the |<e_n, w_t>| profile at the step where a_m is the
// smallest unchosen a-element, next to the proof's lower-bound curve.
std::vector<Fig2Table> figure2_data(const HerdTrace& trace, const AtomStore& store,
                                    const std::vector<int>& m_values);

struct MeasureReport {
  int n_max = 0;
  double normalizer = 0.0;          // N making the full series integrate to 1
  double max_abs_coord = 0.0;       // over all checked coordinates of m
  long coords_checked = 0;
  bool constants_positive = false;
  double integral_truncated = 0.0;  // integral of p over the truncation
  double tail_residual = 0.0;       // 1 - integral_truncated
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
};

// Evaluates the density constants and every in-truncation coordinate of the
// mean element via the closed-form linear-segment rule
// <e, E psi> = (1/2) mu <e,h> (b-a).
MeasureReport measure_mean_check(int n_max);

void write_trace_csv(const std::string& path, const HerdTrace& trace);

}  // namespace cx
}  // namespace kmc

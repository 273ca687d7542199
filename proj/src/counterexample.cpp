#include "kmc/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "kmc/pointset.hpp"

namespace kmc {
namespace cx {

std::string to_string(AtomKind k) {
  switch (k) {
    case AtomKind::A: return "a";
    case AtomKind::B: return "b";
    case AtomKind::C: return "c";
    case AtomKind::D: return "d";
  }
  return "?";
}

AtomStore::AtomStore(int n_max) : n_max_(n_max) {
  if (n_max < 2 || n_max > 60)
    throw UsageError("AtomStore: n_max must lie in [2, 60] (2^-n coefficient range)");
  a_prime_.assign(size_t(n_max) + 2, 0.0);
  big_n_.assign(size_t(n_max) + 2, 0);
  for (int n = 1; n <= n_max + 1; ++n) {
    long double p2 = std::ldexp(1.0L, n);
    auto o = (uint64_t)std::ceil((double)(p2 / std::log((long double)n + 1.0L)));
    a_prime_[size_t(n)] = C_const() * double(o) * std::ldexp(1.0, -n);
    if (n == 1) {
      big_n_[1] = 1;
    } else {
      uint64_t num = uint64_t(1) << (n + 1);
      big_n_[size_t(n)] = int64_t((num + uint64_t(n) - 1) / uint64_t(n));
    }
  }
}

double AtomStore::a_prime(int n) const {
  if (n < 1 || n > n_max_ + 1) throw UsageError("a_prime: n out of range");
  return a_prime_[size_t(n)];
}

double AtomStore::a_coef(int n) const { return a_prime(n) + 1.0 / double(n); }

int64_t AtomStore::N(int n) const {
  if (n < 1 || n > n_max_ + 1) throw UsageError("N: n out of range");
  return big_n_[size_t(n)];
}

double AtomStore::beta(int n) const { return -1.0 / (double(n) * double(N(n))); }

double AtomStore::alpha(int n, int64_t i) const {
  if (i < 1) throw UsageError("alpha: i out of range");
  double a1_sq = a_coef(n) / double(n);
  if (i == 1) return std::sqrt(a1_sq);
  double b = beta(n);
  return std::sqrt(a1_sq + double(i - 1) * b * b);
}

static double vec_norm_sq(const std::vector<SparseEntry>& vec) {
  double s = 0.0;
  for (const auto& e : vec) s += e.coef * e.coef;
  return s;
}

Atom AtomStore::a(int n) const {
  if (n < 1 || n > n_max_) throw UsageError("a: n out of range");
  Atom atom;
  atom.id = {AtomKind::A, n, 0};
  atom.vec = {{false, n, 0, a_coef(n)}};
  atom.norm_sq = vec_norm_sq(atom.vec);
  return atom;
}

Atom AtomStore::b(int n) const {
  if (n < 1 || n > n_max_) throw UsageError("b: n out of range");
  Atom atom;
  atom.id = {AtomKind::B, n, 0};
  atom.vec = {{false, n, 0, b_coef(n)}};
  atom.norm_sq = vec_norm_sq(atom.vec);
  return atom;
}

Atom AtomStore::c(int n, int64_t i) const {
  if (n < 1 || n > n_max_) throw UsageError("c: n out of range");
  if (i < 1 || i > N(n)) throw UsageError("c: i out of range");
  Atom atom;
  atom.id = {AtomKind::C, n, i};
  if (n == 1) {
    // c_{1,1} = e_1 + alpha_{2,1} e~_{2,1}
    atom.vec = {{false, 1, 0, 1.0}, {true, 2, 1, alpha(2, 1)}};
  } else {
    atom.vec.push_back({false, n, 0, beta(n)});
    atom.vec.push_back({true, n, i, alpha(n, i)});
    if (i < N(n)) {
      atom.vec.push_back({true, n, i + 1, -alpha(n, i + 1)});
    } else {
      atom.vec.push_back({true, n + 1, 1, -alpha(n + 1, 1)});
    }
  }
  atom.norm_sq = vec_norm_sq(atom.vec);
  return atom;
}

Atom AtomStore::d(int n) const {
  if (n < 2 || n > n_max_) throw UsageError("d: n out of range");
  Atom atom;
  atom.id = {AtomKind::D, n, 0};
  double coef = (n == 2 ? -0.5 : 0.5) * alpha(n, 1);
  atom.vec = {{true, n, 1, coef}};
  atom.norm_sq = vec_norm_sq(atom.vec);
  return atom;
}

Atom AtomStore::atom(const AtomId& id) const {
  switch (id.kind) {
    case AtomKind::A: return a(id.n);
    case AtomKind::B: return b(id.n);
    case AtomKind::C: return c(id.n, id.i);
    case AtomKind::D: return d(id.n);
  }
  throw UsageError("atom: bad id");
}

double WState::inner(const Atom& atom) const {
  double s = 0.0;
  for (const auto& e : atom.vec) {
    if (e.tilde) {
      auto it = coef_t.find({e.n, e.i});
      if (it != coef_t.end()) s += e.coef * it->second;
    } else if (e.n < long(coef_e.size())) {
      s += e.coef * coef_e[size_t(e.n)];
    }
  }
  return s;
}

double WState::norm_sq() const {
  double s = 0.0;
  for (double v : coef_e) s += v * v;
  for (const auto& [key, v] : coef_t) s += v * v;
  return s;
}

void WState::subtract(const Atom& atom) {
  for (const auto& e : atom.vec) {
    if (e.tilde) {
      auto key = std::make_pair(e.n, e.i);
      double v = coef_t[key] - e.coef;
      if (v == 0.0)
        coef_t.erase(key);
      else
        coef_t[key] = v;
    } else {
      coef_e[size_t(e.n)] -= e.coef;
    }
  }
}

HerdTrace run(const AtomStore& store, long T) {
  if (T < 1) throw UsageError("run: T must be >= 1");
  int n_max = store.n_max();
  HerdTrace trace;
  trace.n_max = n_max;
  trace.steps.reserve(size_t(T));
  trace.snapshots.reserve(size_t(T));

  WState w;
  w.coef_e.assign(size_t(n_max) + 2, 0.0);
  {
    Atom init = store.c(1, 1);  // w_1 = c_{1,1}
    for (const auto& e : init.vec) {
      if (e.tilde)
        w.coef_t[{e.n, e.i}] = e.coef;
      else
        w.coef_e[size_t(e.n)] = e.coef;
    }
  }
  double norm_sq = w.norm_sq();

  for (long t = 1; t <= T; ++t) {
    std::set<AtomId> ids;
    for (int n = 1; n <= n_max; ++n) {
      if (w.coef_e[size_t(n)] != 0.0) {
        ids.insert({AtomKind::A, n, 0});
        ids.insert({AtomKind::B, n, 0});
        if (n == 1) ids.insert({AtomKind::C, 1, 1});
      }
    }
    // C atoms overlapping the tilde support, plus d's.
    for (const auto& [key, v] : w.coef_t) {
      auto [n, i] = key;
      (void)v;
      if (n >= 2 && n <= n_max && i <= store.N(n)) ids.insert({AtomKind::C, n, i});
      if (i >= 2 && n >= 2 && n <= n_max) ids.insert({AtomKind::C, n, i - 1});
      if (i == 1 && n >= 3 && n - 1 <= n_max) ids.insert({AtomKind::C, n - 1, store.N(n - 1)});
      if (i == 1 && n == 2) ids.insert({AtomKind::C, 1, 1});
      if (i == 1 && n >= 2 && n <= n_max) ids.insert({AtomKind::D, n, 0});
    }
    // One representative per level for the C atoms with no tilde overlap:
    // they all share the value beta_n * <e_n, w>.
    for (int n = 2; n <= n_max; ++n) {
      if (w.coef_e[size_t(n)] == 0.0) continue;
      for (int64_t i = 1; i <= std::min<int64_t>(store.N(n), 4); ++i) {
        AtomId cand{AtomKind::C, n, i};
        bool adjacent = w.coef_t.count({n, i}) || w.coef_t.count({n, i + 1}) ||
                        (i == store.N(n) && w.coef_t.count({n + 1, 1}));
        if (!adjacent) {
          ids.insert(cand);
          break;
        }
      }
    }

    double vmax = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<AtomId, double>> vals;
    vals.reserve(ids.size());
    for (const auto& id : ids) {
      Atom atom = store.atom(id);
      double v = w.inner(atom);
      vals.emplace_back(id, v);
      vmax = std::max(vmax, v);
    }
    if (!(vmax > 0.0))
      throw NumericalError("herding hit the truncation boundary at t=" + std::to_string(t) +
                           " (max inner product " + format_double(vmax) + "); raise n_max");
    double tie_tol = 1e-12 * std::max(1.0, std::abs(vmax));
    AtomId chosen{};
    bool have = false;
    int in_window = 0;
    for (const auto& [id, v] : vals) {  // ids are pre-sorted by preference
      if (v >= vmax - tie_tol) {
        ++in_window;
        if (!have) {
          chosen = id;
          have = true;
        }
      }
    }

    Atom x = store.atom(chosen);
    StepRecord rec;
    rec.t = t;
    rec.chosen = chosen;
    rec.inner = w.inner(x);
    rec.norm_sq = norm_sq;
    rec.tie_broken = in_window > 1;
    trace.steps.push_back(rec);
    trace.snapshots.push_back(w);

    norm_sq += -2.0 * rec.inner + x.norm_sq;
    w.subtract(x);
  }
  trace.final_state = std::move(w);
  return trace;
}

namespace {

struct FrontierTracker {
  int next_a = 1;          // smallest unchosen a index
  int c_n = 2;             // smallest unchosen c (lex), c_{1,1} excluded
  int64_t c_i = 1;

  void advance_c(const AtomStore& store) {
    ++c_i;
    if (c_i > store.N(c_n)) {
      ++c_n;
      c_i = 1;
    }
  }
};

double invariant3_cut(int n) { return std::ceil(1.0 + std::log2(double(n) * std::log(double(n) + 1.0))); }

}  // namespace

InvariantReport verify_invariants(const HerdTrace& trace, const AtomStore& store) {
  InvariantReport rep;
  auto violate = [&](long t, const std::string& what) { rep.violations.push_back({t, what}); };
  const double tol = 1e-9;
  FrontierTracker fr;

  for (size_t s = 0; s < trace.steps.size(); ++s) {
    const StepRecord& step = trace.steps[s];
    const WState& w = trace.snapshots[s];
    long t = step.t;

    // (1) selections stay on the atom family and have positive inner product.
    if (!(step.inner > 0)) violate(t, "(1) chosen atom has non-positive inner product");

    // (2) closed form of w_t, checked against the frontier state built from
    // steps 1..t-1. The t=1 state is the initialization c_{1,1} itself.
    if (t >= 2) {
      int n = fr.next_a;
      bool first_case = (fr.c_n == n && fr.c_i >= 1 && fr.c_i <= store.N(n));
      bool second_case = (fr.c_n == n + 1 && fr.c_i == 1);
      if (!first_case && !second_case) {
        violate(t, "(2) c-frontier (" + std::to_string(fr.c_n) + "," + std::to_string(fr.c_i) +
                      ") inconsistent with smallest unchosen a=" + std::to_string(n));
      } else {
        double gamma_n_expect =
            first_case ? -double(fr.c_i - 1) * store.beta(n) : 1.0 / double(n);
        int tilde_n = first_case ? n : n + 1;
        int64_t tilde_i = first_case ? fr.c_i : 1;
        double alpha_expect = store.alpha(tilde_n, tilde_i);

        if (std::abs(w.coef_e[size_t(n)] - gamma_n_expect) > tol)
          violate(t, "(2) gamma_n mismatch at n=" + std::to_string(n));
        for (size_t m = size_t(n) + 1; m < w.coef_e.size(); ++m)
          if (std::abs(w.coef_e[m]) > tol)
            violate(t, "(2) nonzero coefficient beyond the frontier at e_" + std::to_string(m));
        long tilde_live = 0;
        for (const auto& [key, v] : w.coef_t)
          if (std::abs(v) > 1e-12) ++tilde_live;
        auto it = w.coef_t.find({tilde_n, tilde_i});
        if (tilde_live != 1 || it == w.coef_t.end() ||
            std::abs(it->second - alpha_expect) > tol)
          violate(t, "(2) tilde coordinate mismatch");

        for (int j = 1; j < n; ++j) {
          double gamma_j = -w.coef_e[size_t(j)];
          double ap = store.a_prime(j);
          if (gamma_j < -tol || gamma_j > ap + tol)
            violate(t, "(2) gamma_" + std::to_string(j) + " outside [0, a'_j]");
          double r = (ap - gamma_j) * std::ldexp(1.0, j);
          if (std::abs(r - std::round(r)) * std::ldexp(1.0, -j) > tol)
            violate(t, "(2) gamma_" + std::to_string(j) + " off the dyadic grid");
          double floor_j =
              std::min(ap, std::max(std::ldexp(1.0, j) * store.a_coef(n) / double(n) -
                                        std::ldexp(1.0, -j),
                                    0.0));
          if (gamma_j < floor_j - tol)
            violate(t, "(2) gamma_" + std::to_string(j) + " below the proven floor");
        }
      }
    }

    // (3) far coordinates carry at least 1/ln(n+1) of negative mass.
    if (fr.next_a >= 7) {
      int n = fr.next_a;
      int cut = int(invariant3_cut(n));
      for (int i = cut; i <= n - 1; ++i)
        if (!(w.coef_e[size_t(i)] <= -1.0 / std::log(double(n) + 1.0) + tol))
          violate(t, "(3) <e_" + std::to_string(i) + ", w> above -1/ln(n+1) for n=" +
                        std::to_string(n));
    }

    // (4) a's chosen exactly once, in increasing order; track frontier.
    if (step.chosen.kind == AtomKind::A) {
      if (step.chosen.n != fr.next_a)
        violate(t, "(4) a_" + std::to_string(step.chosen.n) + " chosen while a_" +
                      std::to_string(fr.next_a) + " pending");
      else
        ++fr.next_a;
    } else if (step.chosen.kind == AtomKind::C) {
      if (step.chosen.n == 1) {
        violate(t, "(2) c_{1,1} selected after initialization");
      } else if (step.chosen.n != fr.c_n || step.chosen.i != fr.c_i) {
        violate(t, "(2) c chosen out of lexicographic order");
      } else {
        fr.advance_c(store);
      }
    } else if (step.chosen.kind == AtomKind::D) {
      violate(t, "(2) d element selected");
    }

    // Incremental norm bookkeeping against the sparse state.
    double recomputed = w.norm_sq();
    if (std::abs(recomputed - step.norm_sq) >
        1e-9 * std::max({recomputed, step.norm_sq, 1e-12}))
      violate(t, "norm_sq trace drifted from the state");

    ++rep.steps_checked;
  }
  return rep;
}

DivergenceReport divergence_check(const HerdTrace& trace) {
  DivergenceReport rep;
  int next_a = 1;
  for (size_t s = 0; s < trace.steps.size(); ++s) {
    const StepRecord& step = trace.steps[s];
    rep.max_norm = std::max(rep.max_norm, std::sqrt(std::max(step.norm_sq, 0.0)));
    if (next_a >= 7) {
      DivergenceRow row;
      row.t = step.t;
      row.n = next_a;
      row.norm_sq = step.norm_sq;
      double ln = std::log(double(next_a) + 1.0);
      row.bound = double(next_a - 3) / (ln * ln) - 2.0 / std::log(2.0);
      rep.rows.push_back(row);
      if (step.norm_sq < row.bound - 1e-9) rep.ok = false;
    }
    if (step.chosen.kind == AtomKind::A && step.chosen.n == next_a) ++next_a;
  }
  return rep;
}

std::vector<Fig2Table> figure2_data(const HerdTrace& trace, const AtomStore& store,
                                    const std::vector<int>& m_values) {
  std::vector<Fig2Table> out;
  int max_a = 0;
  for (const auto& step : trace.steps)
    if (step.chosen.kind == AtomKind::A) max_a = std::max(max_a, step.chosen.n);
  for (int m : m_values) {
    long t_found = -1;
    size_t idx = 0;
    for (size_t s = 0; s < trace.steps.size(); ++s)
      if (trace.steps[s].chosen.kind == AtomKind::A && trace.steps[s].chosen.n == m) {
        t_found = trace.steps[s].t;
        idx = s;
        break;
      }
    if (t_found < 0)
      throw UsageError("figure2: a_" + std::to_string(m) +
                       " was not reached within the horizon (largest reachable m is " +
                       std::to_string(max_a) + ")");
    Fig2Table table;
    table.m = m;
    table.t = t_found;
    const WState& w = trace.snapshots[idx];
    for (int j = 1; j <= m; ++j) {
      Fig2Row row;
      row.n = j;
      row.abs_inner = std::abs(w.coef_e[size_t(j)]);
      row.lower_bound =
          j < m ? std::min(store.a_prime(j),
                           std::max(std::ldexp(1.0, j) * store.a_coef(m) / double(m) -
                                        std::ldexp(1.0, -j),
                                    0.0))
                : 0.0;
      table.rows.push_back(row);
    }
    out.push_back(std::move(table));
  }
  return out;
}

namespace {

// Density-constant system, homogeneous in the normalizer. All lengths refer
// to the inner variable of the three glued pieces; the outer change of
// variable contributes the global 1/3.
struct MeasureSystem {
  int n_max;
  std::vector<double> fa, fb, fc, fd;  // per n, with normalizer 1

  double y(int n) const { return 1.0 / (double(n) + 1.0); }
  double z(int n) const { return 0.5 * (y(n) + y(n + 1)); }
  double ty(int n) const { return 1.0 / double(n); }

  static int64_t big_n(int n) {
    if (n == 1) return 1;
    if (n <= 61) {
      uint64_t num = uint64_t(1) << (n + 1);
      return int64_t((num + uint64_t(n) - 1) / uint64_t(n));
    }
    return 0;  // beyond exact integer range; callers use asymptotics
  }

  double delta(int n) const { return (ty(n) - ty(n + 1)) / double(big_n(n)); }

  double len_a(int n) const {
    if (n == 1) return 1.0 - 0.5 * (y(1) + z(1));
    return 0.5 * (y(n) - z(n)) + 0.5 * (z(n - 1) - y(n));
  }
  double len_b(int n) const { return 0.5 * (y(n) - y(n + 1)); }
};

}  // namespace

MeasureReport measure_mean_check(int n_max) {
  if (n_max < 2 || n_max > 59)
    throw UsageError("measure_mean_check: n_max must lie in [2, 59]");
  AtomStore store(n_max + 1);
  MeasureSystem sys;
  sys.n_max = n_max;
  MeasureReport rep;
  rep.n_max = n_max;

  int cap = n_max + 1;  // constants are needed one level past the truncation
  sys.fa.assign(size_t(cap) + 1, 0.0);
  sys.fb.assign(size_t(cap) + 1, 0.0);
  sys.fc.assign(size_t(cap) + 1, 0.0);
  sys.fd.assign(size_t(cap) + 1, 0.0);

  sys.fa[1] = (0.5 / (24.0 * store.a_coef(1))) / sys.len_a(1);
  sys.fc[1] = 0.5 / 12.0;  // <c_{1,1}, e_1> = 1
  sys.fb[1] = 1.0;
  for (int n = 2; n <= cap; ++n) {
    double bn = -store.b_coef(n);  // <-b_n, e_n> = 2^-n
    sys.fa[size_t(n)] = (double(n) / (double(n) + 1.0)) * bn / store.a_coef(n);
    double ratio = sys.delta(n + 1) / sys.delta(n);
    sys.fc[size_t(n)] =
        (double(n) / (2.0 * (double(n) + 2.0))) * (store.b_coef(n) / store.beta(n)) * ratio;
    // Transcribed balance for <e_n, m> = 0; must agree with 1 - Delta_{n+1}/Delta_n.
    double fb_direct = 2.0 * (double(n) + 1.0) * (double(n) + 2.0) *
                       (0.25 * (1.0 / double(n) - 1.0 / (double(n) + 2.0)) *
                            sys.fa[size_t(n)] * store.a_coef(n) / bn +
                        (1.0 / double(n) - 1.0 / (double(n) + 1.0)) * sys.fc[size_t(n)] *
                            store.beta(n) / bn);
    sys.fb[size_t(n)] = fb_direct;
    if (std::abs(fb_direct - (1.0 - ratio)) > 1e-12 * std::max(1.0, std::abs(fb_direct)))
      rep.issues.push_back("fb balance mismatch at n=" + std::to_string(n));
  }
  sys.fd[2] = 2.0 * (sys.delta(1) / sys.delta(2)) * sys.fc[1] + 2.0 * sys.fc[2];
  for (int n = 3; n <= cap; ++n)
    sys.fd[size_t(n)] =
        2.0 * (sys.delta(n - 1) / sys.delta(n)) * sys.fc[size_t(n - 1)] - 2.0 * sys.fc[size_t(n)];

  // Positivity of every constant inside the truncation.
  bool positive = true;
  for (int n = 1; n <= n_max; ++n) {
    if (!(sys.fa[size_t(n)] > 0)) positive = false, rep.issues.push_back("fa <= 0 at n=" + std::to_string(n));
    if (!(sys.fc[size_t(n)] > 0)) positive = false, rep.issues.push_back("fc <= 0 at n=" + std::to_string(n));
    if (sys.fb[size_t(n)] < 0) positive = false, rep.issues.push_back("fb < 0 at n=" + std::to_string(n));
    if (n >= 2 && !(sys.fd[size_t(n)] > 0))
      positive = false, rep.issues.push_back("fd <= 0 at n=" + std::to_string(n));
  }
  rep.constants_positive = positive;

  // Normalizer: coefficient of N in the full integral, summed far past the
  // truncation, with an asymptotic tail for the slowly decaying b/c parts.
  double s_coef_full = 0.0;
  for (int n = 1; n <= 60; ++n) {
    double fa_n, fb_n, fc_n, fd_n;
    if (n <= cap) {
      fa_n = sys.fa[size_t(n)];
      fb_n = sys.fb[size_t(n)];
      fc_n = sys.fc[size_t(n)];
      fd_n = n >= 2 ? sys.fd[size_t(n)] : 0.0;
    } else {
      double bn = std::ldexp(1.0, -n);
      double an = 64.0 * std::ceil(std::ldexp(1.0, n) / std::log(double(n) + 1.0)) * bn +
                  1.0 / double(n);
      fa_n = (double(n) / (double(n) + 1.0)) * bn / an;
      double ratio = sys.delta(n + 1) / sys.delta(n);
      fc_n = (double(n) / (2.0 * (double(n) + 2.0))) * (bn / (1.0 / (double(n) * double(sys.big_n(n))))) * ratio;
      fb_n = 1.0 - ratio;
      fd_n = 2.0 * (sys.delta(n - 1) / sys.delta(n)) *
                 ((n - 1) <= cap ? sys.fc[size_t(n - 1)] : fc_n) -
             2.0 * fc_n;
    }
    s_coef_full += fa_n * sys.len_a(n) + fb_n * sys.len_b(n) +
                   fc_n * (sys.ty(n) - sys.ty(n + 1)) + (n >= 2 ? fd_n * sys.delta(n) : 0.0);
  }
  // Tail n > 60: fa/fd decay like 2^-n (negligible); fb -> (n+3)/(2(n+2)),
  // fc -> n(n+1)/(2(n+2)^2), both against ~n^-2 lengths.
  for (int n = 61; n <= 2000000; ++n) {
    double fb_asym = (double(n) + 3.0) / (2.0 * (double(n) + 2.0));
    double fc_asym = double(n) * (double(n) + 1.0) / (2.0 * (double(n) + 2.0) * (double(n) + 2.0));
    s_coef_full += fb_asym * sys.len_b(n) + fc_asym * (sys.ty(n) - sys.ty(n + 1));
  }
  s_coef_full /= 3.0;

  double delta_sum = 0.0;
  for (int n = 2; n <= 60; ++n) delta_sum += sys.delta(n);
  double c_const_full = 1.0 / 6.0 + (0.5 - delta_sum) / 3.0;
  rep.normalizer = (1.0 - c_const_full) / s_coef_full;

  // Coordinates of m. Each atom contributes (1/6) mu <h,e> len per density
  // piece; the e_n and e~_{n,i} sums must vanish.
  double max_abs = 0.0;
  long checked = 0;
  double nrm = rep.normalizer;
  for (int n = 1; n <= n_max; ++n) {
    double contrib = sys.fa[size_t(n)] * store.a_coef(n) * sys.len_a(n) +
                     sys.fb[size_t(n)] * store.b_coef(n) * sys.len_b(n);
    if (n == 1) {
      contrib += sys.fc[1] * 1.0 * sys.delta(1);  // single c_{1,1} triangle
    } else {
      contrib += sys.fc[size_t(n)] * store.beta(n) * double(sys.big_n(n)) * sys.delta(n);
    }
    double coord = nrm * contrib / 6.0;
    max_abs = std::max(max_abs, std::abs(coord));
    ++checked;
  }
  for (int n = 2; n <= n_max; ++n) {
    int64_t nn = sys.big_n(n);
    for (int64_t i = 1; i <= nn; ++i) {
      double contrib;
      double alpha = store.alpha(n, i);
      if (i >= 2) {
        contrib = sys.fc[size_t(n)] * (-alpha) * sys.delta(n) +
                  sys.fc[size_t(n)] * alpha * sys.delta(n);
      } else if (n == 2) {
        contrib = sys.fc[1] * alpha * sys.delta(1) + sys.fc[2] * alpha * sys.delta(2) +
                  sys.fd[2] * (-0.5 * alpha) * sys.delta(2);
      } else {
        contrib = sys.fc[size_t(n - 1)] * (-alpha) * sys.delta(n - 1) +
                  sys.fc[size_t(n)] * alpha * sys.delta(n) +
                  sys.fd[size_t(n)] * (0.5 * alpha) * sys.delta(n);
      }
      double coord = nrm * contrib / 6.0;
      max_abs = std::max(max_abs, std::abs(coord));
      ++checked;
    }
  }
  rep.max_abs_coord = max_abs;
  rep.coords_checked = checked;
  if (max_abs > 1e-10)
    rep.issues.push_back("a coordinate of m exceeds 1e-10: " + format_double(max_abs));

  // Truncated integral of p and the tail absorbed by the normalizer choice.
  double s_trunc = 0.0;
  for (int n = 1; n <= n_max; ++n)
    s_trunc += sys.fa[size_t(n)] * sys.len_a(n) + sys.fb[size_t(n)] * sys.len_b(n) +
               sys.fc[size_t(n)] * (sys.ty(n) - sys.ty(n + 1)) +
               (n >= 2 ? sys.fd[size_t(n)] * sys.delta(n) : 0.0);
  s_trunc /= 3.0;
  double delta_sum_trunc = 0.0;
  for (int n = 2; n <= n_max; ++n) delta_sum_trunc += sys.delta(n);
  double c_const_trunc = 1.0 / 6.0 + (sys.ty(2) - sys.ty(n_max + 1) - delta_sum_trunc) / 3.0;
  rep.integral_truncated = nrm * s_trunc + c_const_trunc;
  rep.tail_residual = 1.0 - rep.integral_truncated;
  if (!(rep.integral_truncated < 1.0))
    rep.issues.push_back("truncated density integral is not < 1");
  if (!(rep.tail_residual > 0.0)) rep.issues.push_back("tail residual is not positive");
  return rep;
}

void write_trace_csv(const std::string& path, const HerdTrace& trace) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write trace CSV: " + path);
  out << "t,kind,n,i,norm_sq\n";
  for (const auto& s : trace.steps)
    out << s.t << ',' << to_string(s.chosen.kind) << ',' << s.chosen.n << ',' << s.chosen.i
        << ',' << format_double(s.norm_sq) << '\n';
}

}  // namespace cx
}  // namespace kmc

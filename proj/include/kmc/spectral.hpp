#pragma once

#include "kmc/gram.hpp"

namespace kmc {

enum class BoundVariant { KPlus, KMinus, MercerSupplied, MercerEstimated, KFunctional };

std::string to_string(BoundVariant v);

struct SpectralReport {
  double lambda_min = 0.0;
  int d_used = 0;
  double diam_lower = 0.0;
  BoundVariant bound_variant = BoundVariant::KPlus;
  bool estimated = false;
  std::string notes;
};

struct BallReport {
  double b = 0.0;        // diameter lower bound fed in
  double delta = 0.0;    // ball radius around m in C
  long n_threshold = 1;  // samples needed for the delta/4 ball around m_n
  double q = 0.0;
  double c_density = 0.0;
  double L = 0.0;
  int l_dim = 1;
  bool estimated = false;
};

// Two-phase power iteration: lambda_1 from K, then the most negative
// eigenvalue of K - lambda_1 I. Deterministic all-ones start, fixed-seed
// restart on stagnation. Throws NumericalError (carrying the last Rayleigh
// quotient) when max_iter is exhausted.
double smallest_eig(const GramMatrix& gram, double tol = 1e-10, long max_iter = 100000);

// (lambda_d / d)^(1/2) from a full-rank d x d Gram matrix.
double sup_ratio_bound(const GramMatrix& gram);

// Lower bounds on inf_{||h||=1} diam_h(C).
SpectralReport diam_lower_kplus(const Kernel& k, const PointSet& points);
SpectralReport diam_lower_kminus(const Kernel& k, const PointSet& points, double c_sq);
SpectralReport diam_lower_mercer(double lambda_tilde, bool contains_const,
                                 bool estimated = false);

// Smallest positive eigenvalue of gram/m over an m-point grid; a numerical
// surrogate for the smallest Mercer eigenvalue, always flagged as estimated.
double mercer_estimate(const Kernel& k, const PointSet& grid);

struct KFunctionalResult {
  double value = 0.0;     // upper-biased estimate of K(1, t)
  double sup_err = 0.0;   // ||1 - h||_inf over the grid at the best h
  double rkhs_norm = 0.0; // ||h||
  double residual = 0.0;  // best improvement seen over the last restart
};

// Estimate of K(1,t) = inf_h (||1-h||_inf + t ||h||) by subgradient descent
// over h = sum alpha_i k(z_i,.), pivots chosen by pivoted Cholesky.
KFunctionalResult k_functional(const Kernel& k, const PointSet& grid, double t,
                               long basis_size = 32);

// Lebesgue measure of the d-dimensional unit ball, via lgamma.
double unit_ball_volume(int d);

// c * gamma^(d+1) * beta_d / ((d+1) (2L)^d); requires gamma/L <= 1.
double counter_mass(double gamma, double c, double L, int d);

// min(b/2, c (b/2)^(l+1) beta_l / ((l+1)(2L)^l)).
double ball_radius(double b, double c, double L, int l);

// Smallest sample size guaranteeing, with probability q, a delta/4 ball
// around the empirical mean inside the empirical convex set: the ceiling of
// the larger of the two squared deviation terms.
long sample_threshold(double delta, double q, double c, double L, int l, double sup_k);

BallReport ball_report(double b, double q, double c, double L, int l, double sup_k,
                       bool estimated = false);

// 12 J(1) n^{-1/2} + n^{-1/2} sqrt(2x(24 J(1) n^{-1/2} + 1)) + x/3n with
// J(1) = max(ceil(sqrt(log 2c~)), sqrt(1+2(d+2))); the ceil mirrors the
// worked example's rounding.
double vc_uniform_bound(int d, long n, double x, double c_tilde = 1e21);

// (sqrt(2 log(1/p)) + 24 b / gamma) n^{-1/2}.
double rademacher_bound(double gamma, double p, long n, double sup_k_root);

// max( norm_h (b_up+b_down)/2 * diam_C , norm_g * diam_Codot ); requires
// norm_g^2 + norm_h^2 = 1 to 1e-9.
double direct_sum_diam_lower(double norm_g, double norm_h, double b_up, double b_down,
                             double diam_C, double diam_Codot);

// Unit-circle crossover calculators: smallest n for which the uniform
// deviation bound guarantees a ball of the given radius around the origin
// inside the empirical convex hull of n uniform circle samples.
long circle_vc_crossover(double radius = 0.2, double prob = 0.9);
long circle_rademacher_crossover(double radius = 0.2, double prob = 0.9);

}  // namespace kmc

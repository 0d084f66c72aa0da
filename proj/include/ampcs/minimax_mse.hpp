#pragma once

#include "ampcs/denoisers.hpp"
#include "ampcs/risk.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ampcs {

struct MinimaxCurvePoint {
  double epsilon = 0.0;
  double M = 0.0;
  ShrinkParams tau_star;
  double mu_star = kInf;
  std::map<std::string, double> extras;
};

/// Worst case of risk_two_point over mu in [0, 20] (200 nodes, refined) and mu = inf.
struct SupResult {
  double value = 0.0;
  double mu = 0.0;
};
SupResult sup_two_point(const PiecewiseLinear& f, double epsilon, bool symmetric = true);

MinimaxCurvePoint mse_soft(double epsilon);
MinimaxCurvePoint mse_softpos(double epsilon);
double mse_cap(double epsilon);
double mse_pos(double epsilon);
MinimaxCurvePoint mse_hard(double epsilon);
MinimaxCurvePoint mse_firm(double epsilon);

/// Symmetric prior (1-eps) delta_0 + eps/2 * sum_i w_i (delta_{m_i} + delta_{-m_i}).
struct MinimaxPriorFit {
  std::vector<double> locations;  ///< free atoms mu_1 < ... < mu_K
  std::vector<double> weights;    ///< their share of the eps mass
  double tail_spacing = 1.0;      ///< c1: tail atoms at c1 * k, k > K
  double tail_weight = 0.0;       ///< c0: share of the eps mass in the tail
  double tail_decay = 0.5;        ///< lambda: tail weights proportional to lambda^k
  double I_upper = 0.0;
  double I_lower = 0.0;
  double worst_mse = 0.0;  ///< sup over two-point priors of the MSE of eta+
  int K = 0;
};

struct MinimaxScalarResult {
  MinimaxCurvePoint point;
  MinimaxPriorFit prior;
  ScoreTable table;
};

/// Atoms (location, probability) of the prior on [0, inf), including 0.
std::vector<std::pair<double, double>> prior_atoms(const MinimaxPriorFit& fit, double epsilon);

/// Fisher information of N(0,1) * prior, on a grid of 100 nodes per unit.
double fisher_information(const MinimaxPriorFit& fit, double epsilon);

/// Score psi = -f'/f of the convolved prior, sampled at 100 nodes per unit on
/// [-cutoff, cutoff] and constant beyond. cutoff <= 0 means max atom + 6.
ScoreTable score_table_from_prior(const MinimaxPriorFit& fit, double epsilon, double cutoff = 0.0);

/// J(psi, g_mu) = (E psi')^2 / E psi^2 under g_mu = (1-eps) N(0,1) + eps N(mu,1).
double huber_J(const ScoreTable& table, double epsilon, double mu);

/// Minimizes Fisher information over the parametric family and evaluates both bounds.
MinimaxScalarResult fit_minimax_scalar(double epsilon, int K);
/// fit_minimax_scalar, then throws
/// std::runtime_error if the bracket [1 - I+, 1 - I-] is wider than 5e-3.
MinimaxScalarResult mse_minimax_scalar(double epsilon, int K);

MinimaxCurvePoint mse_block_soft(double epsilon, int B);
MinimaxCurvePoint mse_james_stein(double epsilon, int B);

struct IntervalEntry {
  int length = 1;
  Boundary boundary = Boundary::none;
  double weight = 0.0;
};

struct IntervalDistribution {
  std::vector<IntervalEntry> entries;
  double mean_length() const;
  void validate() const;
};

/// Upper concave envelope of a point set, evaluated at x, with its supporting vertices.
struct EnvelopeValue {
  double value = 0.0;
  std::vector<std::pair<double, double>> vertices;  ///< hull vertices, increasing x
  std::size_t left = 0, right = 0;                  ///< indices bracketing x
};
EnvelopeValue concave_envelope(std::vector<std::pair<double, double>> points, double x);

/// M = eps * env(1/eps) over {(len, r(len))}. r_table maps length to r.
std::pair<MinimaxCurvePoint, IntervalDistribution> mse_monotone(double epsilon, int max_len,
                                                                const std::map<int, double>& r_table);

/// r_s(len; tau) for s in {++, +-}, tau on a grid, len in a set of lengths.
struct TvRiskTable {
  std::vector<double> taus;
  std::vector<int> lengths;
  std::vector<std::vector<double>> r_pp;  ///< [tau][length index]
  std::vector<std::vector<double>> r_pm;
  std::vector<std::vector<double>> se_pp;
  std::vector<std::vector<double>> se_pm;

  /// Linear interpolation in length between tabulated lengths.
  double r(Boundary s, std::size_t tau_index, double len) const;
};

/// Builds a table by Monte Carlo with common draws across tau.
TvRiskTable build_tv_risk_table(const std::vector<int>& lengths, const std::vector<double>& taus, long n_mc,
                                std::uint64_t seed);
/// Lengths 1..min(64, max_len) and powers of two up to max_len.
std::vector<int> default_tv_lengths(int max_len);

std::pair<MinimaxCurvePoint, IntervalDistribution> mse_tv(double epsilon, int max_len, const TvRiskTable& table);
MinimaxCurvePoint mse_tv_random(double epsilon, const TvRiskTable& table);

/// Minimax point for a scalar or block kind (K = 2 below eps = 0.175, else 4, for minimax).
MinimaxCurvePoint minimax_point(Kind kind, double epsilon, int B = 1);

/// Curve CSV: denoiser,epsilon,M,[tau1,tau2,]mu_star,B,I_upper,I_lower
void write_curve_csv(std::ostream& os, const std::string& denoiser, const std::vector<MinimaxCurvePoint>& rows,
                     bool thresholds = true);

}  // namespace ampcs

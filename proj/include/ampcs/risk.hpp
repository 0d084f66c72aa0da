#pragma once

#include "ampcs/denoisers.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace ampcs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// (1 - eps) delta_0 + eps delta_mu, or the symmetric three-point version.
struct TwoPointPrior {
  double epsilon = 0.0;
  double mu = 0.0;
  bool symmetric = true;

  void validate() const;
};

/// Scalar denoiser written as eta(y) = a_k y + b_k on (knots[k-1], knots[k]).
struct PiecewiseLinear {
  std::vector<double> knots;  ///< size m; pieces are m + 1
  std::vector<double> a;
  std::vector<double> b;
};

PiecewiseLinear piecewise_form(const ShrinkParams& p);

/// E[(alpha (mu+Z) + beta)^2 ; l < mu+Z < h] and P(l < mu+Z < h), exactly.
struct GaussianMoments {
  double mass = 0.0;
  double first = 0.0;   ///< E[(mu+Z) - mu ; piece] = E[Z ; piece]
  double second = 0.0;  ///< E[Z^2 ; piece]
};
GaussianMoments gaussian_piece_moments(double mu, double l, double h);

/// E[(eta(mu + Z) - mu)^2] for a scalar kind; mu may be +/-infinity.
double risk_scalar(const ShrinkParams& p, double mu);
double risk_scalar(const PiecewiseLinear& f, double mu);
double risk_two_point(const ShrinkParams& p, const TwoPointPrior& prior);
double risk_two_point(const PiecewiseLinear& f, const TwoPointPrior& prior);

/// Result of a Poisson-mixture expectation over a noncentral chi-square.
struct MixtureExpectation {
  double value = 0.0;
  int components = 0;
  double truncated_weight = 0.0;
};

/// Per-block risk of block soft thresholding at block norm mu (Stein's formula).
double risk_block_soft_sure(double mu_norm, double tau, int B);
MixtureExpectation risk_block_soft_sure_detail(double mu_norm, double tau, int B);
/// Per-block risk of positive-part James-Stein at block norm mu.
double risk_js_sure(double mu_norm, int B);
MixtureExpectation risk_js_sure_detail(double mu_norm, int B);
/// Per-block James-Stein risk at 0: D^{-1} E (chi2_D - D)_+^2, D = B - 2.
double risk_js_zero(int B);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long n_mc = 0;
  std::uint64_t seed = 0;
};

/// r(len) = E ||P_mono(Z)||^2.
McEstimate risk_mono_zero(int len, long n_mc, std::uint64_t seed);

enum class Boundary { pp, pm, none };
std::string to_string(Boundary s);
Boundary parse_boundary(const std::string& s);

/// r_s(len; tau) = E ||eta_s(Z; tau)||^2 for the boundary-typed TV prox.
McEstimate risk_tv_zero(int len, Boundary s, double tau, long n_mc, std::uint64_t seed);

/// r_s(len; tau) for every tau on a grid from one set of draws.
std::vector<McEstimate> risk_tv_zero_grid(int len, Boundary s, const std::vector<double>& taus, long n_mc,
                                          std::uint64_t seed);

/// One row of a risk table (CSV: kind,B,tau,mu_or_len,boundary,estimate,std_error,n_mc,seed).
struct RiskRow {
  std::string kind;
  int B = 1;
  double tau = 0.0;
  double mu_or_len = 0.0;
  std::string boundary = "none";
  double estimate = 0.0;
  double std_error = 0.0;
  long n_mc = 0;
  std::uint64_t seed = 0;
};

void write_risk_csv(std::ostream& os, const std::vector<RiskRow>& rows);
std::vector<RiskRow> read_risk_csv(std::istream& is);

/// Cache of r(len) for monotone regression, filled on demand.
class MonoRiskCache {
 public:
  MonoRiskCache(long n_mc, std::uint64_t seed) : n_mc_(n_mc), seed_(seed) {}
  const McEstimate& get(int len);
  void insert(int len, const McEstimate& e) { table_[len] = e; }
  std::vector<RiskRow> rows() const;
  void load(const std::vector<RiskRow>& rows);

 private:
  long n_mc_;
  std::uint64_t seed_;
  std::map<int, McEstimate> table_;
};

/// lim_{t->inf} R_N(t mu) = sum_k r(|J_k|) for the given interval lengths.
double risk_at_infinity_mono(const std::vector<int>& interval_lengths, MonoRiskCache& cache);

}  // namespace ampcs

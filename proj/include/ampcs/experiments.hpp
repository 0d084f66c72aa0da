#pragma once

#include "ampcs/amp_core.hpp"
#include "ampcs/denoisers.hpp"
#include "ampcs/minimax_mse.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ampcs {

enum class SignalClass { simple_sparse, positive_sparse, box, block_sparse, monotone_lf, tv_random, tv_lf };
std::string to_string(SignalClass c);
SignalClass parse_signal_class(const std::string& s);

struct SignalSpec {
  SignalClass cls = SignalClass::simple_sparse;
  int N = 0;
  double epsilon = 0.0;
  double amplitude = 1.0;  ///< mu for sparse classes (block norm for blocks), jump size for piecewise classes
  int B = 1;
  std::optional<IntervalDistribution> intervals;  ///< monotone_lf and tv_lf

  void validate() const;
};

/// Deterministic in (spec, seed).
/// - simple/positive/block: each coordinate (block) is nonzero with probability eps.
/// - box: interior value U(0,1) with probability eps, else 0 or 1.
/// - monotone_lf: nondecreasing, interval lengths from spec.intervals, jumps of
///   size amplitude, x_1 = amplitude.
/// - tv_random: each position after the first jumps up or down with probability eps/2 each.
/// - tv_lf: interval lengths and boundary types from spec.intervals; a ++ interval
///   is a local extremum, a +- interval a stair step.
Vec sample_signal(const SignalSpec& spec, std::uint64_t seed);

struct PTRow {
  double delta = 0.0;
  int n = 0;
  int n_success = 0;
  int n_trials = 0;
  int n_numeric_failures = 0;
};

struct PTGridResult {
  std::string kind;
  double epsilon = 0.0;
  int N = 0;
  std::uint64_t seed = 0;
  std::vector<PTRow> rows;
};

struct PTOptions {
  int T_max = 300;
  SuccessCriterion criterion;
  bool onsager = true;
  int threads = 1;
};

/// Fresh matrix and signal per trial; trial seeds derive from (seed, delta index, trial).
PTGridResult run_pt_grid(const SignalSpec& signal, const ShrinkParams& params, const std::vector<double>& delta_grid,
                         int n_trials, std::uint64_t seed, const PTOptions& options);

/// n = round(delta N), at least 1.
int measurements_for(double delta, int N);

/// 11 equispaced points spanning center +/- half_width, clipped to (0, 1].
std::vector<double> default_delta_grid(double center, double half_width = 0.05, int points = 11);

void write_grid_csv(std::ostream& os, const std::vector<PTGridResult>& results);

struct LogisticFit {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double offset = 0.0;  ///< -alpha / beta
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double delta_pred = 0.0;
  bool separated = false;  ///< complete separation: offset brackets the data gap
  int iterations = 0;
};

/// Binomial ML fit of logit p = alpha + beta (delta - delta_pred) by IRLS, with a
/// delta-method 95% interval for the offset.
LogisticFit fit_logistic(const PTGridResult& result, double delta_pred);

struct ScalingGroup {
  std::string label;
  std::map<int, std::pair<double, double>> values;  ///< N -> (value, standard error; <= 0 means unit weight)
};

struct ScalingRow {
  double gamma = 0.0;
  double r_squared = 0.0;
  std::vector<double> coefficients;  ///< fitted c per group
};

/// value ~ c N^{-gamma} per group, weighted least squares through the origin, pooled uncentered R^2.
std::vector<ScalingRow> fit_offset_scaling(const std::vector<ScalingGroup>& groups, const std::vector<double>& gammas);
/// value ~ c N^{gamma}.
std::vector<ScalingRow> fit_slope_scaling(const std::vector<ScalingGroup>& groups, const std::vector<double>& gammas);

std::vector<double> default_gammas();

}  // namespace ampcs

#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace ampcs {

using Vec = Eigen::VectorXd;

enum class Kind {
  soft,
  softpos,
  cap,
  hard,
  firm,
  minimax_scalar,
  block_soft,
  james_stein,
  monotone,
  tv
};

std::string to_string(Kind k);
/// Parses a kind name; throws std::invalid_argument listing the valid names.
Kind parse_kind(const std::string& name);
bool is_scalar(Kind k);

/// Sampled score function psi+ of a fitted minimax denoiser eta(y) = y - psi+(y).
struct ScoreTable {
  std::vector<double> grid;
  std::vector<double> score;
  double tail_shift = 0.0;
  double epsilon = 0.0;

  /// Throws std::invalid_argument if the table is empty, unsorted, not odd,
  /// or yields a decreasing denoiser.
  void validate() const;
  double eta(double y) const;
  /// d eta / dy of the interpolant (right-continuous at nodes).
  double eta_slope(double y) const;

  void write_csv(std::ostream& os) const;
  static ScoreTable read_csv(std::istream& is);
};

struct ShrinkParams {
  Kind kind = Kind::soft;
  double tau1 = 0.0;
  double tau2 = 0.0;
  int block_size = 1;
  std::shared_ptr<const ScoreTable> score_table;

  static ShrinkParams soft(double tau);
  static ShrinkParams softpos(double tau);
  static ShrinkParams cap();
  static ShrinkParams hard(double tau);
  static ShrinkParams firm(double tau1, double tau2);
  static ShrinkParams minimax(std::shared_ptr<const ScoreTable> table);
  static ShrinkParams block_soft(double tau, int B);
  static ShrinkParams james_stein(int B);
  static ShrinkParams monotone();
  static ShrinkParams tv(double tau);

  void validate() const;
};

Vec apply_soft(const Vec& y, double tau);
Vec apply_softpos(const Vec& y, double tau);
Vec apply_cap(const Vec& y);
Vec apply_hard(const Vec& y, double tau);
Vec apply_firm(const Vec& y, double tau1, double tau2);
Vec apply_minimax_scalar(const Vec& y, const ScoreTable& table);
Vec apply_block_soft(const Vec& y, double tau, int B);
Vec apply_james_stein(const Vec& y, int B);
/// Euclidean projection onto nondecreasing sequences (pool adjacent violators).
Vec apply_monotone(const Vec& y);
/// Exact minimizer of 0.5*||y - x||^2 + tau * sum |x_{i+1} - x_i|.
Vec apply_tv(const Vec& y, double tau);
/// Same objective plus tau * (s1 * x_1 + s2 * x_N).
Vec apply_tv_boundary(const Vec& y, double tau, int s1, int s2);

/// Max violation of the TV subgradient conditions at x for data y.
double tv_stationarity_residual(const Vec& y, const Vec& x, double tau);

/// eta(y; tau, sigma) = sigma * eta(y / sigma; tau). Cap ignores sigma.
Vec apply(const Vec& y, const ShrinkParams& p, double sigma = 1.0);

/// Divergence of eta(.; tau, sigma) at y (not divided by n).
double divergence(const Vec& y, const ShrinkParams& p, double sigma = 1.0);
/// True for kinds whose divergence is only a heuristic (hard thresholding).
bool divergence_is_heuristic(Kind k);

/// Number of maximal constant runs in x (exact comparison).
int count_segments(const Vec& x);

struct PenaltyTable {
  std::vector<double> x_grid;
  std::vector<double> J;
  Kind denoiser_kind = Kind::soft;

  void write_csv(std::ostream& os) const;
};

/// J(x) = int_0^x Delta(eta^{-1}(u)) du with Delta(y) = y - eta(y). Block kinds
/// use the radial profile. Throws std::domain_error where eta is not invertible.
PenaltyTable implied_penalty(const ShrinkParams& p, const std::vector<double>& x_grid);

}  // namespace ampcs

#pragma once

#include "ampcs/denoisers.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace ampcs {

using Mat = Eigen::MatrixXd;

/// Noiseless measurements y = A x0.
struct SensingProblem {
  Mat A;
  Vec y;
  Vec x0;  ///< empty when the ground truth is unknown

  double delta() const { return static_cast<double>(A.rows()) / static_cast<double>(A.cols()); }
  bool has_truth() const { return x0.size() > 0; }
  void validate() const;
};

SensingProblem make_problem(Mat A, const Vec& x0);

/// n x N matrix with iid N(0, 1/n) entries, filled column by column from the seed.
Mat gaussian_matrix(int n, int N, std::uint64_t seed);

struct AmpState {
  Vec x;
  Vec z;
  double sigma_hat = 0.0;
  double onsager = 0.0;
  int t = 0;
};

/// x^0 = 0, z^0 = y.
AmpState amp_init(const SensingProblem& problem);

/// median(|z|) / Phi^{-1}(0.75); 0 for an all-zero residual.
double estimate_sigma(const Vec& z);

/// One iteration: y^t = x^t + A^T z^t, x^{t+1} = eta(y^t; sigma_t),
/// z^{t+1} = y - A x^{t+1} + b_{t+1} z^t with b_{t+1} = div eta(y^t) / n.
AmpState amp_step(const SensingProblem& problem, const AmpState& state, const ShrinkParams& params,
                  bool onsager = true);

enum class Criterion { mse, hamming, none };

struct SuccessCriterion {
  Criterion kind = Criterion::mse;
  double gamma = 0.01;  ///< relative MSE threshold (strict)
  double alpha = 0.01;  ///< Hamming tolerance per coordinate
  double beta = 0.01;   ///< Hamming fraction threshold

  static SuccessCriterion relative_mse(double gamma = 0.01) { return {Criterion::mse, gamma, 0.01, 0.01}; }
  static SuccessCriterion hamming(double alpha = 0.01, double beta = 0.01) {
    return {Criterion::hamming, 0.01, alpha, beta};
  }
  static SuccessCriterion never() { return {Criterion::none, 0.01, 0.01, 0.01}; }
};

/// ||x_hat - x0||^2 / ||x0||^2 (0 when both vanish, inf when only x0 does).
double relative_mse(const Vec& x_hat, const Vec& x0);
bool success_mse(const Vec& x_hat, const Vec& x0, double gamma = 0.01);
/// |{i : |x_hat_i - x0_i| >= alpha}| / n.
double hamming_distance(const Vec& x_hat, const Vec& x0, double alpha, int n);
bool success_hamming(const Vec& x_hat, const Vec& x0, double alpha, double beta, int n);
bool is_success(const SuccessCriterion& c, const Vec& x_hat, const Vec& x0, int n);

struct AmpRun {
  AmpState final_state;
  std::vector<double> mse_trace;  ///< relative MSE of x^t for t = 0, 1, ...
  bool success = false;
  bool numeric_failure = false;
  int iterations = 0;
  std::string diagnostic;
};

/// Iterates until the criterion holds (checked at every t, including 0) or T_max steps.
AmpRun amp_run(const SensingProblem& problem, const ShrinkParams& params, int T_max,
               const SuccessCriterion& criterion, bool onsager = true);

struct ConvergenceProfile {
  std::vector<double> median, q25, q75;  ///< per iteration t = 0..T
};

/// Runs each problem for exactly T steps and summarizes the MSE traces.
ConvergenceProfile convergence_profile(const std::vector<SensingProblem>& problems, const ShrinkParams& params,
                                       int T);

}  // namespace ampcs

#include "ampcs/amp_core.hpp"

#include "ampcs/normal.hpp"
#include "ampcs/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ampcs {

void SensingProblem::validate() const {
  if (A.rows() < 1 || A.cols() < 1) throw std::invalid_argument("sensing matrix is empty");
  if (A.rows() > A.cols()) throw std::invalid_argument("need n <= N");
  if (y.size() != A.rows()) throw std::invalid_argument("y has the wrong length");
  if (has_truth() && x0.size() != A.cols()) throw std::invalid_argument("x0 has the wrong length");
}

SensingProblem make_problem(Mat A, const Vec& x0) {
  SensingProblem p;
  p.y = A * x0;
  p.A = std::move(A);
  p.x0 = x0;
  p.validate();
  return p;
}

Mat gaussian_matrix(int n, int N, std::uint64_t seed) {
  if (!(n > 0 && n <= N)) throw std::invalid_argument("need 0 < n <= N");
  Rng rng(seed);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  Mat A(n, N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < n; ++i) A(i, j) = s * rng.normal();
  return A;
}

AmpState amp_init(const SensingProblem& problem) {
  problem.validate();
  AmpState s;
  s.x = Vec::Zero(problem.A.cols());
  s.z = problem.y;
  s.sigma_hat = estimate_sigma(s.z);
  return s;
}

double estimate_sigma(const Vec& z) {
  if (z.size() == 0) throw std::invalid_argument("empty residual");
  std::vector<double> a(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) a[static_cast<std::size_t>(i)] = std::abs(z[i]);
  const std::size_t n = a.size();
  const std::size_t mid = n / 2;
  std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(mid), a.end());
  double med = a[mid];
  if (n % 2 == 0) med = 0.5 * (med + *std::max_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(mid)));
  return med / kNormalQ75;
}

AmpState amp_step(const SensingProblem& problem, const AmpState& state, const ShrinkParams& params,
                  bool onsager) {
  const double n = static_cast<double>(problem.A.rows());
  Vec pseudo = state.x;
  pseudo.noalias() += problem.A.transpose() * state.z;
  const double sigma = estimate_sigma(state.z);
  AmpState next;
  next.t = state.t + 1;
  next.x = apply(pseudo, params, sigma);
  next.onsager = onsager ? divergence(pseudo, params, sigma) / n : 0.0;
  next.z = problem.y;
  next.z.noalias() -= problem.A * next.x;
  next.z += next.onsager * state.z;
  next.sigma_hat = estimate_sigma(next.z);
  return next;
}

double relative_mse(const Vec& x_hat, const Vec& x0) {
  if (x_hat.size() != x0.size()) throw std::invalid_argument("length mismatch");
  const double den = x0.squaredNorm();
  const double num = (x_hat - x0).squaredNorm();
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

bool success_mse(const Vec& x_hat, const Vec& x0, double gamma) {
  if (x0.squaredNorm() == 0.0) throw std::invalid_argument("relative MSE needs a nonzero x0");
  return relative_mse(x_hat, x0) < gamma;
}

double hamming_distance(const Vec& x_hat, const Vec& x0, double alpha, int n) {
  if (x_hat.size() != x0.size()) throw std::invalid_argument("length mismatch");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  long count = 0;
  for (Eigen::Index i = 0; i < x0.size(); ++i)
    if (!(std::abs(x_hat[i] - x0[i]) < alpha)) ++count;
  return static_cast<double>(count) / n;
}

bool success_hamming(const Vec& x_hat, const Vec& x0, double alpha, double beta, int n) {
  return hamming_distance(x_hat, x0, alpha, n) <= beta;
}

bool is_success(const SuccessCriterion& c, const Vec& x_hat, const Vec& x0, int n) {
  switch (c.kind) {
    case Criterion::mse:
      return relative_mse(x_hat, x0) < c.gamma;
    case Criterion::hamming:
      return success_hamming(x_hat, x0, c.alpha, c.beta, n);
    default:
      return false;
  }
}

AmpRun amp_run(const SensingProblem& problem, const ShrinkParams& params, int T_max,
               const SuccessCriterion& criterion, bool onsager) {
  if (T_max < 0) throw std::invalid_argument("T_max must be >= 0");
  if (criterion.kind != Criterion::none && !problem.has_truth())
    throw std::invalid_argument("success evaluation needs the ground truth");
  const int n = static_cast<int>(problem.A.rows());
  AmpRun run;
  AmpState s = amp_init(problem);
  auto record = [&](const AmpState& st) {
    if (problem.has_truth()) run.mse_trace.push_back(relative_mse(st.x, problem.x0));
    return problem.has_truth() && is_success(criterion, st.x, problem.x0, n);
  };
  run.success = record(s);
  while (!run.success && s.t < T_max) {
    if (s.sigma_hat == 0.0) {
      run.diagnostic = "residual vanished";
      break;
    }
    s = amp_step(problem, s, params, onsager);
    if (!s.x.allFinite() || !s.z.allFinite() || !std::isfinite(s.onsager)) {
      run.numeric_failure = true;
      run.diagnostic = "non-finite state at t=" + std::to_string(s.t);
      break;
    }
    run.success = record(s);
  }
  run.iterations = s.t;
  run.final_state = std::move(s);
  if (run.numeric_failure) run.success = false;
  return run;
}

ConvergenceProfile convergence_profile(const std::vector<SensingProblem>& problems, const ShrinkParams& params,
                                       int T) {
  if (problems.size() < 20) throw std::invalid_argument("convergence profile needs at least 20 replicates");
  std::vector<std::vector<double>> traces;
  for (const auto& p : problems) {
    auto run = amp_run(p, params, T, SuccessCriterion::never());
    auto tr = run.mse_trace;
    tr.resize(static_cast<std::size_t>(T) + 1, tr.empty() ? std::numeric_limits<double>::infinity() : tr.back());
    traces.push_back(std::move(tr));
  }
  auto quantile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    double pos = q * (v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
  };
  ConvergenceProfile out;
  for (int t = 0; t <= T; ++t) {
    std::vector<double> col;
    for (const auto& tr : traces) col.push_back(tr[static_cast<std::size_t>(t)]);
    out.median.push_back(quantile(col, 0.5));
    out.q25.push_back(quantile(col, 0.25));
    out.q75.push_back(quantile(col, 0.75));
  }
  return out;
}

}  // namespace ampcs

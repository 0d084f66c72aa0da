#pragma once

#include "ampcs/denoisers.hpp"
#include "ampcs/minimax_mse.hpp"
#include "ampcs/risk.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace ampcs {

/// Per-coordinate risk at unit noise as a function of the signal amplitude
/// measured in noise units (mu / sigma).
using RiskProfile = std::function<double(double)>;

/// Two-point (scalar) or block-sparse risk profile of a scale-covariant denoiser.
/// Block kinds read prior.mu as the block norm and divide the block risk by B.
RiskProfile two_point_profile(const ShrinkParams& p, double epsilon, bool symmetric = true);

struct SEConfig {
  double delta = 1.0;
  RiskProfile risk;   ///< R(nu), nu = mu / sigma
  double mu = 1.0;    ///< signal amplitude; +inf selects the rescaled limit R(inf)
  double m0 = 1.0;    ///< initial per-coordinate MSE (x^0 = 0 gives eps * mu^2)

  void validate() const;
};

SEConfig make_se_config(double delta, const ShrinkParams& p, const TwoPointPrior& prior);
/// Large-jump limit for monotone/TV: Psi(m) = (m / delta) * risk_const.
SEConfig make_se_config_linear(double delta, double risk_const, double m0 = 1.0);

/// Psi(m) = (m / delta) R(mu sqrt(delta / m)); Psi(0) = 0.
double psi(double m, const SEConfig& c);

struct SETrace {
  std::vector<double> states;
  bool converged = false;
  double hfp = 0.0;
};

SETrace iterate(const SEConfig& c, int T, double tol);
void write_se_trace_csv(std::ostream& os, const SETrace& trace);

struct HfpResult {
  double value = 0.0;
  bool at_boundary = false;  ///< Psi(m) >= m at m_max itself
};

/// sup{m in (0, m_max] : map(m) >= m}, by a 400-node log scan on [1e-12 m_max, m_max]
/// and bisection of the highest sign change to 1e-10 relative.
HfpResult hfp_detail(const std::function<double(double)>& map, double m_max);
double hfp(const std::function<double(double)>& map, double m_max);
double hfp(const SEConfig& c, double m_max);

/// Smallest delta with HFP = 0 for every amplitude on a grid over [0.1, 20] plus mu = inf.
double delta_se(double epsilon, const ShrinkParams& tuned, double tol);
/// Tuning from the minimax curve of the kind, then delta_se.
double delta_se(double epsilon, Kind kind, double tol, int B = 1);

struct StarshapedReport {
  bool pass = true;
  std::vector<double> violations;  ///< grid points where Psi(m)/m increases
};
StarshapedReport check_starshaped(const SEConfig& c, const std::vector<double>& m_grid, double tol = 1e-9);

struct SuperquadraticReport {
  bool pass = true;
  double mu_star = 0.0;
  double min_margin = 0.0;  ///< min over the grid of R(mu) - (mu/mu*)^2 R(mu*)
  double worst_mu = 0.0;
  int n_grid = 0;
};
/// R(mu) >= (mu/mu*)^2 R(mu*) on an n-node grid over (0, mu*).
SuperquadraticReport check_superquadratic(const RiskProfile& risk, double mu_star, int n_grid = 200,
                                          double tol = 1e-12);
SuperquadraticReport check_superquadratic(const ShrinkParams& tuned, double epsilon, double mu_star,
                                          int n_grid = 200);

}  // namespace ampcs

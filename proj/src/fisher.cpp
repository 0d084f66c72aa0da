#include "ampcs/minimax_mse.hpp"

#include "optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ampcs {

namespace {

constexpr double kNodesPerUnit = 100.0;
constexpr double kTailAtomCut = 1e-16;  // relative weight below which tail atoms are dropped
constexpr double kTailGridCut = 1e-6;   // relative tail mass left beyond the grid
constexpr int kMaxTailAtoms = 400;

struct Atom {
  double m, w;  // location >= 0 and its probability (each of +m and -m when m > 0)
};

std::vector<Atom> atoms_of(const MinimaxPriorFit& fit, double eps) {
  std::vector<Atom> out{{0.0, 1.0 - eps}};
  for (std::size_t i = 0; i < fit.locations.size(); ++i)
    out.push_back({fit.locations[i], 0.5 * eps * fit.weights[i]});
  if (fit.tail_weight > 0.0) {
    const int K = static_cast<int>(fit.locations.size());
    const double lam = fit.tail_decay;
    double w = 1.0, kept = 0.0;
    std::vector<Atom> tail;
    for (int j = 1; j <= kMaxTailAtoms && w >= kTailAtomCut; ++j, w *= lam) {
      tail.push_back({fit.tail_spacing * (K + j), w});
      kept += w;
    }
    const double want = 0.5 * eps * fit.tail_weight;
    for (auto& a : tail) a.w *= want / kept;
    out.insert(out.end(), tail.begin(), tail.end());
  }
  return out;
}

// Largest location that carries non-negligible mass: the last free atom, or the
// tail atom beyond which less than kTailGridCut of the tail mass remains.
double max_location(const MinimaxPriorFit& fit) {
  double m = fit.locations.empty() ? 0.0 : fit.locations.back();
  if (fit.tail_weight <= 0.0) return m;
  const double lam = fit.tail_decay;
  int j = lam > 0.0 ? static_cast<int>(std::ceil(std::log(kTailGridCut) / std::log(lam))) : 1;
  return std::max(m, fit.tail_spacing * (fit.locations.size() + std::clamp(j, 1, kMaxTailAtoms)));
}

// Density f(y) and score psi(y) = y - E[mu | y] of N(0,1) convolved with the prior.
struct DensityScore {
  double f, psi;
};

DensityScore density_score(const std::vector<Atom>& atoms, double y) {
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& a : atoms) {
    if (a.w <= 0.0) continue;
    double d = y - a.m;
    top = std::max(top, std::log(a.w) - 0.5 * d * d);
  }
  double s = 0.0, sm = 0.0;
  for (const auto& a : atoms) {
    if (a.w <= 0.0) continue;
    const double lw = std::log(a.w);
    double dp = y - a.m;
    double ep = std::exp(lw - 0.5 * dp * dp - top);
    if (a.m == 0.0) {
      s += ep;
      continue;
    }
    double dm = y + a.m;
    double em = std::exp(lw - 0.5 * dm * dm - top);
    s += ep + em;
    sm += a.m * (ep - em);
  }
  double f = std::max(1e-300, std::exp(top) * s / std::sqrt(2.0 * std::numbers::pi));
  return {f, y - sm / s};
}

int half_nodes(double max_atom) { return static_cast<int>(std::ceil((max_atom + 6.0) * kNodesPerUnit)); }

// theta -> prior; see mse_minimax_scalar for the layout.
MinimaxPriorFit decode(const std::vector<double>& th, int K) {
  MinimaxPriorFit p;
  p.K = K;
  double loc = 0.0;
  for (int i = 0; i < K; ++i) {
    loc += std::exp(th[i]);
    p.locations.push_back(loc);
  }
  std::vector<double> logits(th.begin() + K, th.begin() + 2 * K);
  logits.push_back(0.0);
  double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& l : logits) z += (l = std::exp(l - top));
  for (int i = 0; i < K; ++i) p.weights.push_back(logits[i] / z);
  p.tail_weight = logits[K] / z;
  p.tail_spacing = std::exp(th[2 * K]);
  p.tail_decay = 1.0 / (1.0 + std::exp(-th[2 * K + 1]));
  return p;
}

std::vector<double> encode(const MinimaxPriorFit& p) {
  std::vector<double> th;
  double prev = 0.0;
  for (double l : p.locations) {
    th.push_back(std::log(std::max(1e-8, l - prev)));
    prev = l;
  }
  for (double w : p.weights) th.push_back(std::log(std::max(1e-300, w)) - std::log(std::max(1e-300, p.tail_weight)));
  th.push_back(std::log(p.tail_spacing));
  th.push_back(std::log(p.tail_decay / (1.0 - p.tail_decay)));
  return th;
}

// Scale- and location-free starting prior: atoms at s, 2s, ..., geometric weights.
MinimaxPriorFit start_prior(int K, double s, double lam) {
  MinimaxPriorFit p;
  p.K = K;
  double total = 0.0;
  for (int i = 0; i < K; ++i) {
    p.locations.push_back(s * (i + 1));
    p.weights.push_back(std::pow(lam, i));
    total += std::pow(lam, i);
  }
  p.tail_weight = std::pow(lam, K) / (1.0 - lam);
  total += p.tail_weight;
  for (double& w : p.weights) w /= total;
  p.tail_weight /= total;
  p.tail_spacing = s;
  p.tail_decay = lam;
  return p;
}

}  // namespace

std::vector<std::pair<double, double>> prior_atoms(const MinimaxPriorFit& fit, double epsilon) {
  std::vector<std::pair<double, double>> out;
  for (const auto& a : atoms_of(fit, epsilon)) out.emplace_back(a.m, a.w);
  return out;
}

double fisher_information(const MinimaxPriorFit& fit, double epsilon) {
  auto atoms = atoms_of(fit, epsilon);
  const int n = half_nodes(max_location(fit));
  const double h = 1.0 / kNodesPerUnit;
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    auto ds = density_score(atoms, k * h);
    double v = ds.f * ds.psi * ds.psi;
    sum += (k == 0 || k == n) ? 0.5 * v : v;
  }
  return 2.0 * h * sum;
}

ScoreTable score_table_from_prior(const MinimaxPriorFit& fit, double epsilon, double cutoff) {
  auto atoms = atoms_of(fit, epsilon);
  const int n = cutoff > 0.0 ? static_cast<int>(std::lround(cutoff * kNodesPerUnit)) : half_nodes(max_location(fit));
  if (n < 1) throw std::invalid_argument("score table cutoff must be >= 0.01");
  std::vector<double> pos(n + 1);
  for (int k = 0; k <= n; ++k) pos[k] = density_score(atoms, k / kNodesPerUnit).psi;
  pos[0] = 0.0;
  ScoreTable t;
  t.epsilon = epsilon;
  for (int k = -n; k <= n; ++k) {
    double y = std::abs(k) / kNodesPerUnit;
    t.grid.push_back(k < 0 ? -y : y);
    t.score.push_back(k < 0 ? -pos[-k] : pos[k]);
  }
  t.tail_shift = pos[n];
  t.validate();
  return t;
}

namespace {

double huber_J_impl(const PiecewiseLinear& f, double tail_shift, double epsilon, double mu) {
  // psi = (1 - a) y - b on each piece.
  auto moments = [&](double m) {
    double e1 = 0.0, e2 = 0.0;
    const std::size_t nk = f.knots.size();
    for (std::size_t k = 0; k <= nk; ++k) {
      double l = k == 0 ? -kInf : f.knots[k - 1];
      double h = k == nk ? kInf : f.knots[k];
      GaussianMoments g = gaussian_piece_moments(m, l, h);
      if (g.mass == 0.0 && g.first == 0.0) continue;
      const double s = 1.0 - f.a[k];
      const double c = s * m - f.b[k];
      e1 += s * g.mass;
      e2 += s * s * g.second + 2.0 * s * c * g.first + c * c * g.mass;
    }
    return std::pair{e1, e2};
  };
  auto [a0, b0] = moments(0.0);
  double a, b;
  if (std::isinf(mu)) {
    a = (1.0 - epsilon) * a0;
    b = (1.0 - epsilon) * b0 + epsilon * tail_shift * tail_shift;
  } else {
    auto [a1, b1] = moments(mu);
    a = (1.0 - epsilon) * a0 + epsilon * a1;
    b = (1.0 - epsilon) * b0 + epsilon * b1;
  }
  return a * a / b;
}

// min over mu in a grid on [0, 20] (refined `rounds` times) and mu = inf.
std::pair<double, double> huber_lower(const ScoreTable& table, double epsilon, int nodes, int rounds) {
  auto shared = std::make_shared<const ScoreTable>(table);
  PiecewiseLinear f = piecewise_form(ShrinkParams::minimax(shared));
  auto neg_j = [&](double mu) { return -huber_J_impl(f, table.tail_shift, epsilon, mu); };
  auto [mu, neg] = detail::refine_grid_max(neg_j, 0.0, 20.0, nodes, rounds);
  double j_inf = huber_J_impl(f, table.tail_shift, epsilon, kInf);
  if (j_inf <= -neg) return {j_inf, kInf};
  return {-neg, mu};
}

}  // namespace

double huber_J(const ScoreTable& table, double epsilon, double mu) {
  auto shared = std::make_shared<const ScoreTable>(table);
  return huber_J_impl(piecewise_form(ShrinkParams::minimax(shared)), table.tail_shift, epsilon, mu);
}

MinimaxScalarResult fit_minimax_scalar(double epsilon, int K) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
  if (K < 2) throw std::invalid_argument("K must be >= 2");
  // theta = (log gaps of the K free atoms, K weight logits against the tail,
  //          log tail spacing, logit tail decay).
  auto objective = [&](const std::vector<double>& th) {
    for (double v : th)
      if (!std::isfinite(v) || std::abs(v) > 30.0) return 1e10;
    MinimaxPriorFit p = decode(th, K);
    if (max_location(p) > 60.0) return 1e10;
    return fisher_information(p, epsilon);
  };
  // Stage 1: two-parameter Mallows form (atoms at c * i, weights ~ lambda^i).
  auto mallows = [&](const std::vector<double>& v) {
    if (std::abs(v[0]) > 5.0 || std::abs(v[1]) > 20.0) return 1e10;
    MinimaxPriorFit p = start_prior(K, std::exp(v[0]), 1.0 / (1.0 + std::exp(-v[1])));
    if (max_location(p) > 60.0) return 1e10;
    return fisher_information(p, epsilon);
  };
  std::vector<double> best_v;
  double best_m = kInf;
  for (double c : {0.5, 1.0, 2.0, 3.0})
    for (double lam : {0.1, 0.4, 0.7}) {
      std::vector<double> v{std::log(c), std::log(lam / (1.0 - lam))};
      double f = mallows(v);
      if (f < best_m) best_m = f, best_v = v;
    }
  best_v = detail::nelder_mead(mallows, best_v, 0.3, 1e-13, 400).x;
  const MinimaxPriorFit m0 = start_prior(K, std::exp(best_v[0]), 1.0 / (1.0 + std::exp(-best_v[1])));

  // Stage 2: free the K inner atoms, starting from the Mallows fit.
  std::vector<double> best_th = encode(m0);
  double best = objective(best_th);
  for (int restart = 0; restart < 6; ++restart) {
    auto r = detail::nelder_mead(objective, best_th, restart == 0 ? 0.3 : 0.1, 1e-13, 2500);
    bool improved = r.f < best - 1e-10;
    if (r.f < best) best = r.f, best_th = r.x;
    if (!improved) break;
  }

  MinimaxScalarResult out;
  out.prior = decode(best_th, K);
  out.prior.I_upper = best;

  // eta+ follows the fitted score up to a cutoff and is a pure shift beyond it.
  // I+ does not see the far tail of the prior, so the cutoff is chosen to
  // maximize the lower bound I-.
  const double far = max_location(out.prior) + 6.0;
  const double near = out.prior.locations.front();
  double best_cut = far, best_lower = -kInf;
  for (double cut = near; cut <= far + 1e-9; cut += 0.25) {
    double lower = huber_lower(score_table_from_prior(out.prior, epsilon, cut), epsilon, 60, 0).first;
    if (lower > best_lower) best_lower = lower, best_cut = cut;
  }
  out.table = score_table_from_prior(out.prior, epsilon, best_cut);
  auto [i_lower, mu_lower] = huber_lower(out.table, epsilon, 200, 3);
  out.prior.I_lower = i_lower;

  auto shared = std::make_shared<const ScoreTable>(out.table);
  ShrinkParams params = ShrinkParams::minimax(shared);
  SupResult worst = sup_two_point(piecewise_form(params), epsilon);
  out.prior.worst_mse = worst.value;

  out.point.epsilon = epsilon;
  out.point.M = 1.0 - out.prior.I_upper;
  out.point.tau_star = params;
  out.point.mu_star = worst.mu;
  out.point.extras["I_upper"] = out.prior.I_upper;
  out.point.extras["I_lower"] = out.prior.I_lower;
  out.point.extras["worst_mse"] = worst.value;
  out.point.extras["mu_lower"] = mu_lower;
  out.point.extras["table_cutoff"] = best_cut;
  out.point.extras["K"] = K;
  return out;
}

MinimaxScalarResult mse_minimax_scalar(double epsilon, int K) {
  MinimaxScalarResult out = fit_minimax_scalar(epsilon, K);
  const double width = out.prior.I_upper - out.prior.I_lower;
  if (width > 5e-3) {
    std::ostringstream msg;
    msg << "Fisher bracket width " << width << " exceeds 5e-3 at epsilon=" << epsilon << " (K=" << K << ")";
    throw std::runtime_error(msg.str());
  }
  return out;
}

}  // namespace ampcs

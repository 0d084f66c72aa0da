#include "ampcs/minimax_mse.hpp"

#include "ampcs/csv.hpp"
#include "ampcs/normal.hpp"
#include "ampcs/rng.hpp"
#include "optim.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace ampcs {

namespace {

void require_open_unit(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
}

// Bisection for decreasing g on [lo, hi] with g(lo) > target > g(hi).
template <class G>
double invert_decreasing(G g, double target, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++i) {
    double mid = 0.5 * (lo + hi);
    (g(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

SupResult sup_two_point(const PiecewiseLinear& f, double epsilon, bool symmetric) {
  auto r = [&](double mu) { return risk_two_point(f, {epsilon, mu, symmetric}); };
  auto [mu, v] = detail::refine_grid_max(r, 0.0, 20.0, 200, 3);
  double at_inf = r(kInf);
  if (at_inf >= v) return {at_inf, kInf};
  return {v, mu};
}

// ------------------------------------------------------------ closed forms

MinimaxCurvePoint mse_soft(double epsilon) {
  require_open_unit(epsilon);
  auto parts = [](double t) {
    double tail = 2.0 * phi(t) - 2.0 * t * normal_sf(t);
    return std::pair{tail, t + tail};
  };
  auto eps_of = [&](double t) {
    auto [a, d] = parts(t);
    return a / d;
  };
  double t = invert_decreasing(eps_of, epsilon, 0.0, 40.0);
  auto [a, d] = parts(t);
  MinimaxCurvePoint out;
  out.epsilon = epsilon;
  out.M = 2.0 * phi(t) / d;
  out.tau_star = ShrinkParams::soft(t);
  return out;
}

MinimaxCurvePoint mse_softpos(double epsilon) {
  require_open_unit(epsilon);
  auto parts = [](double t) {
    double tail = phi(t) - t * normal_sf(t);
    return std::pair{tail, t + tail};
  };
  auto eps_of = [&](double t) {
    auto [a, d] = parts(t);
    return a / d;
  };
  double t = invert_decreasing(eps_of, epsilon, 0.0, 40.0);
  auto [a, d] = parts(t);
  MinimaxCurvePoint out;
  out.epsilon = epsilon;
  out.M = phi(t) / d;
  out.tau_star = ShrinkParams::softpos(t);
  return out;
}

double mse_cap(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0,1]");
  return 0.5 * (1.0 + epsilon);
}

double mse_pos(double epsilon) { return mse_cap(epsilon); }

// ------------------------------------------------------------ saddle searches

MinimaxCurvePoint mse_hard(double epsilon) {
  require_open_unit(epsilon);
  auto obj = [&](double t) { return sup_two_point(piecewise_form(ShrinkParams::hard(t)), epsilon).value; };
  double h = 0.1;
  double best_t = 0.0, best = obj(0.0);
  for (int i = 1; i <= 80; ++i) {
    double v = obj(i * h);
    if (v < best) best = v, best_t = i * h;
  }
  for (int r = 0; r < 3; ++r) {
    double a = std::max(0.0, best_t - h), b = best_t + h;
    h /= 10.0;
    for (double t = a; t <= b + 1e-15; t += h) {
      double v = obj(t);
      if (v < best) best = v, best_t = t;
    }
  }
  MinimaxCurvePoint out;
  out.epsilon = epsilon;
  out.tau_star = ShrinkParams::hard(best_t);
  auto s = sup_two_point(piecewise_form(out.tau_star), epsilon);
  out.M = s.value;
  out.mu_star = s.mu;
  return out;
}

MinimaxCurvePoint mse_firm(double epsilon) {
  require_open_unit(epsilon);
  // Width w = tau2 - tau1 on a log grid; w = inf is soft thresholding.
  auto obj = [&](double t1, double lw) {
    double t2 = std::isinf(lw) ? kInf : t1 + std::exp(lw);
    return sup_two_point(piecewise_form(ShrinkParams::firm(t1, t2)), epsilon).value;
  };
  const double lw_lo = std::log(0.01), lw_hi = std::log(100.0);
  double ht = 0.1, hw = (lw_hi - lw_lo) / 40.0;
  double bt = 0.0, bw = kInf, best = kInf;
  for (int i = 0; i <= 40; ++i) {
    double t1 = i * ht;
    for (int j = 0; j <= 41; ++j) {
      double lw = j == 41 ? kInf : lw_lo + j * hw;
      double v = obj(t1, lw);
      if (v < best) best = v, bt = t1, bw = lw;
    }
  }
  int depth = 0;
  for (; depth < 3; ++depth) {
    double prev = best;
    double ta = std::max(0.0, bt - ht), tb = bt + ht;
    double wa = std::isinf(bw) ? lw_hi : bw - hw, wb = std::isinf(bw) ? lw_hi + 3.0 : bw + hw;
    ht /= 10.0;
    hw /= 10.0;
    double hwr = std::isinf(bw) ? (wb - wa) / 20.0 : hw;
    for (double t1 = ta; t1 <= tb + 1e-15; t1 += ht)
      for (double lw = wa; lw <= wb + 1e-15; lw += hwr) {
        double v = obj(t1, lw);
        if (v < best) best = v, bt = t1, bw = lw;
      }
    if (depth >= 1 && prev - best < 1e-4) break;
  }
  MinimaxCurvePoint out;
  out.epsilon = epsilon;
  out.tau_star = ShrinkParams::firm(bt, std::isinf(bw) ? kInf : bt + std::exp(bw));
  auto s = sup_two_point(piecewise_form(out.tau_star), epsilon);
  out.M = s.value;
  out.mu_star = s.mu;
  out.extras["refinement_depth"] = depth;
  return out;
}

// ------------------------------------------------------------ block kinds

MinimaxCurvePoint mse_block_soft(double epsilon, int B) {
  require_open_unit(epsilon);
  if (B < 1) throw std::invalid_argument("block size must be >= 1");
  using boost::math::gamma_q;
  const double d = B;
  const double root_ratio = std::sqrt(2.0) * std::exp(std::lgamma((d + 1.0) / 2.0) - std::lgamma(d / 2.0));
  // E[(S - tau) 1{S >= tau}] and E[(S - tau)^2 1{S >= tau}] for S^2 ~ chi2_B.
  auto moments = [&](double t) {
    double c = t * t / 2.0;
    double q0 = c > 0.0 ? gamma_q(d / 2.0, c) : 1.0;
    double q1 = c > 0.0 ? gamma_q((d + 1.0) / 2.0, c) : 1.0;
    double q2 = c > 0.0 ? gamma_q(d / 2.0 + 1.0, c) : 1.0;
    double es = root_ratio * q1;
    double e1 = es - t * q0;
    double e2 = d * q2 - 2.0 * t * es + t * t * q0;
    return std::pair{e1, e2};
  };
  auto h_of = [&](double t) { return t / moments(t).first; };
  auto eps_of = [&](double t) { return 1.0 / (1.0 + h_of(t)); };
  double t = invert_decreasing(eps_of, epsilon, 0.0, std::sqrt(d) + 40.0);
  auto [e1, e2] = moments(t);
  double h = t / e1, g = t * e2 / e1;
  MinimaxCurvePoint out;
  out.epsilon = epsilon;
  out.M = (d + t * t + g) / (d * (1.0 + h));
  out.tau_star = ShrinkParams::block_soft(t, B);
  out.extras["B"] = B;
  return out;
}

MinimaxCurvePoint mse_james_stein(double epsilon, int B) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0,1]");
  if (B <= 2) throw std::invalid_argument("James-Stein requires B > 2");
  MinimaxCurvePoint out;
  out.epsilon = epsilon;
  out.M = (1.0 - epsilon) * risk_js_zero(B) / B + epsilon;
  out.tau_star = ShrinkParams::james_stein(B);
  out.extras["B"] = B;
  return out;
}

// ------------------------------------------------------------ envelopes

double IntervalDistribution::mean_length() const {
  double m = 0.0;
  for (const auto& e : entries) m += e.length * e.weight;
  return m;
}

void IntervalDistribution::validate() const {
  double s = 0.0;
  for (const auto& e : entries) {
    if (e.length < 1) throw std::invalid_argument("interval length must be >= 1");
    if (!(e.weight >= 0.0 && e.weight <= 1.0)) throw std::invalid_argument("interval weight must lie in [0,1]");
    s += e.weight;
  }
  if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("interval weights must sum to 1");
}

EnvelopeValue concave_envelope(std::vector<std::pair<double, double>> points, double x) {
  if (points.empty()) throw std::invalid_argument("empty point set");
  std::sort(points.begin(), points.end(), [](auto& a, auto& b) {
    return a.first < b.first || (a.first == b.first && a.second > b.second);
  });
  EnvelopeValue ev;
  auto& hull = ev.vertices;
  for (const auto& p : points) {
    if (!hull.empty() && hull.back().first == p.first) continue;
    while (hull.size() >= 2) {
      const auto& o = hull[hull.size() - 2];
      const auto& a = hull.back();
      double cross = (a.first - o.first) * (p.second - o.second) - (a.second - o.second) * (p.first - o.first);
      if (cross >= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  if (x < hull.front().first || x > hull.back().first)
    throw std::domain_error("abscissa outside the range of the point set");
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (hull[i].first == x) {
      ev.left = ev.right = i;
      ev.value = hull[i].second;
      return ev;
    }
    if (hull[i].first > x) {
      ev.left = i - 1;
      ev.right = i;
      const auto& a = hull[i - 1];
      const auto& b = hull[i];
      ev.value = a.second + (b.second - a.second) * (x - a.first) / (b.first - a.first);
      return ev;
    }
  }
  throw std::logic_error("envelope search fell through");
}

namespace {

// Splits mass between two vertices so that the mean length equals x.
void two_atom_weights(double la, double lb, double x, double& wa, double& wb) {
  if (la == lb) {
    wa = 1.0;
    wb = 0.0;
    return;
  }
  wb = (x - la) / (lb - la);
  wa = 1.0 - wb;
}

}  // namespace

std::pair<MinimaxCurvePoint, IntervalDistribution> mse_monotone(double epsilon, int max_len,
                                                                const std::map<int, double>& r_table) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0,1]");
  const double x = 1.0 / epsilon;
  if (x > max_len) throw std::domain_error("1/epsilon exceeds the largest tabulated length");
  std::vector<std::pair<double, double>> pts;
  for (const auto& [len, r] : r_table)
    if (len >= 1 && len <= max_len) pts.emplace_back(len, r);
  EnvelopeValue ev = concave_envelope(pts, x);
  const auto& a = ev.vertices[ev.left];
  const auto& b = ev.vertices[ev.right];
  double wa, wb;
  two_atom_weights(a.first, b.first, x, wa, wb);
  IntervalDistribution dist;
  dist.entries.push_back({static_cast<int>(a.first), Boundary::none, wa});
  if (ev.left != ev.right) dist.entries.push_back({static_cast<int>(b.first), Boundary::none, wb});
  MinimaxCurvePoint out;
  out.epsilon = epsilon;
  out.M = epsilon * ev.value;
  out.tau_star = ShrinkParams::monotone();
  out.extras["pi_len_1"] = a.first;
  out.extras["pi_weight_1"] = wa;
  if (ev.left != ev.right) {
    out.extras["pi_len_2"] = b.first;
    out.extras["pi_weight_2"] = wb;
  }
  return {out, dist};
}

// ------------------------------------------------------------ total variation

double TvRiskTable::r(Boundary s, std::size_t tau_index, double len) const {
  const auto& row = (s == Boundary::pp ? r_pp : r_pm).at(tau_index);
  if (len < lengths.front() || len > lengths.back()) throw std::domain_error("length outside TV risk table");
  auto it = std::lower_bound(lengths.begin(), lengths.end(), len);
  std::size_t j = static_cast<std::size_t>(it - lengths.begin());
  if (lengths[j] == len) return row[j];
  double l0 = lengths[j - 1], l1 = lengths[j];
  return row[j - 1] + (row[j] - row[j - 1]) * (len - l0) / (l1 - l0);
}

std::vector<int> default_tv_lengths(int max_len) {
  std::vector<int> out;
  for (int l = 1; l <= std::min(64, max_len); ++l) out.push_back(l);
  for (int l = 128; l <= max_len; l *= 2) out.push_back(l);
  if (out.back() != max_len) out.push_back(max_len);
  return out;
}

TvRiskTable build_tv_risk_table(const std::vector<int>& lengths, const std::vector<double>& taus, long n_mc,
                                std::uint64_t seed) {
  if (lengths.empty() || taus.empty()) throw std::invalid_argument("TV risk table needs lengths and taus");
  if (!std::is_sorted(lengths.begin(), lengths.end())) throw std::invalid_argument("lengths must be increasing");
  TvRiskTable t;
  t.lengths = lengths;
  t.taus = taus;
  const std::size_t nt = taus.size(), nl = lengths.size();
  for (auto* m : {&t.r_pp, &t.r_pm, &t.se_pp, &t.se_pm}) m->assign(nt, std::vector<double>(nl));
  for (std::size_t j = 0; j < nl; ++j) {
    auto pp = risk_tv_zero_grid(lengths[j], Boundary::pp, taus, n_mc, derive_seed(seed, lengths[j], 0));
    auto pm = risk_tv_zero_grid(lengths[j], Boundary::pm, taus, n_mc, derive_seed(seed, lengths[j], 1));
    for (std::size_t k = 0; k < nt; ++k) {
      t.r_pp[k][j] = pp[k].estimate;
      t.se_pp[k][j] = pp[k].std_error;
      t.r_pm[k][j] = pm[k].estimate;
      t.se_pm[k][j] = pm[k].std_error;
    }
  }
  return t;
}

std::pair<MinimaxCurvePoint, IntervalDistribution> mse_tv(double epsilon, int max_len, const TvRiskTable& table) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0,1]");
  const double x = 1.0 / epsilon;
  if (x > max_len || max_len > table.lengths.back()) throw std::domain_error("1/epsilon beyond the TV risk table");
  double best = kInf;
  std::size_t best_k = 0;
  EnvelopeValue best_ev;
  for (std::size_t k = 0; k < table.taus.size(); ++k) {
    std::vector<std::pair<double, double>> pts;
    std::vector<Boundary> types;
    for (std::size_t j = 0; j < table.lengths.size() && table.lengths[j] <= max_len; ++j) {
      bool pp_wins = table.r_pp[k][j] >= table.r_pm[k][j];
      pts.emplace_back(table.lengths[j], pp_wins ? table.r_pp[k][j] : table.r_pm[k][j]);
    }
    EnvelopeValue ev = concave_envelope(pts, x);
    if (epsilon * ev.value < best) {
      best = epsilon * ev.value;
      best_k = k;
      best_ev = ev;
    }
  }
  auto type_at = [&](double len) {
    auto it = std::find(table.lengths.begin(), table.lengths.end(), static_cast<int>(len));
    std::size_t j = static_cast<std::size_t>(it - table.lengths.begin());
    return table.r_pp[best_k][j] >= table.r_pm[best_k][j] ? Boundary::pp : Boundary::pm;
  };
  const auto& a = best_ev.vertices[best_ev.left];
  const auto& b = best_ev.vertices[best_ev.right];
  double wa, wb;
  two_atom_weights(a.first, b.first, x, wa, wb);
  IntervalDistribution dist;
  dist.entries.push_back({static_cast<int>(a.first), type_at(a.first), wa});
  if (best_ev.left != best_ev.right) dist.entries.push_back({static_cast<int>(b.first), type_at(b.first), wb});
  MinimaxCurvePoint out;
  out.epsilon = epsilon;
  out.M = best;
  out.tau_star = ShrinkParams::tv(table.taus[best_k]);
  out.extras["tau_at_grid_boundary"] = (best_k == 0 || best_k + 1 == table.taus.size()) ? 1.0 : 0.0;
  out.extras["pi_len_1"] = a.first;
  out.extras["pi_weight_1"] = wa;
  if (best_ev.left != best_ev.right) {
    out.extras["pi_len_2"] = b.first;
    out.extras["pi_weight_2"] = wb;
  }
  return {out, dist};
}

MinimaxCurvePoint mse_tv_random(double epsilon, const TvRiskTable& table) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0,1]");
  double best = kInf;
  std::size_t best_k = 0;
  for (std::size_t k = 0; k < table.taus.size(); ++k) {
    double sum = 0.0, residual = 1.0;
    for (int len = 1; residual >= 1e-9; ++len) {
      if (len > table.lengths.back()) throw std::domain_error("geometric lengths exceed the TV risk table");
      double w = epsilon * std::pow(1.0 - epsilon, len - 1);
      sum += w * table.r(Boundary::pp, k, len);
      residual -= w;
      if (epsilon == 1.0) break;
    }
    if (epsilon * sum < best) best = epsilon * sum, best_k = k;
  }
  MinimaxCurvePoint out;
  out.epsilon = epsilon;
  out.M = best;
  out.tau_star = ShrinkParams::tv(table.taus[best_k]);
  out.extras["tau_at_grid_boundary"] = (best_k == 0 || best_k + 1 == table.taus.size()) ? 1.0 : 0.0;
  return out;
}

MinimaxCurvePoint minimax_point(Kind kind, double epsilon, int B) {
  switch (kind) {
    case Kind::soft:
      return mse_soft(epsilon);
    case Kind::softpos:
      return mse_softpos(epsilon);
    case Kind::cap: {
      MinimaxCurvePoint p;
      p.epsilon = epsilon;
      p.M = mse_cap(epsilon);
      p.tau_star = ShrinkParams::cap();
      return p;
    }
    case Kind::hard:
      return mse_hard(epsilon);
    case Kind::firm:
      return mse_firm(epsilon);
    case Kind::minimax_scalar:
      return mse_minimax_scalar(epsilon, epsilon < 0.175 ? 2 : 4).point;
    case Kind::block_soft:
      return mse_block_soft(epsilon, B);
    case Kind::james_stein:
      return mse_james_stein(epsilon, B);
    default:
      throw std::invalid_argument(to_string(kind) + " needs a risk table; use mse_monotone or mse_tv");
  }
}

// ------------------------------------------------------------ output

void write_curve_csv(std::ostream& os, const std::string& denoiser, const std::vector<MinimaxCurvePoint>& rows,
                     bool thresholds) {
  os << "denoiser,epsilon,M," << (thresholds ? "tau1,tau2," : "") << "mu_star,B,I_upper,I_lower\n";
  auto extra = [](const MinimaxCurvePoint& p, const char* key) {
    auto it = p.extras.find(key);
    return it == p.extras.end() ? std::string() : format_double(it->second);
  };
  for (const auto& p : rows) {
    os << denoiser << ',' << format_double(p.epsilon) << ',' << format_double(p.M) << ',';
    if (thresholds) os << format_double(p.tau_star.tau1) << ',' << format_double(p.tau_star.tau2) << ',';
    os << format_double(p.mu_star) << ',' << p.tau_star.block_size << ',' << extra(p, "I_upper") << ','
       << extra(p, "I_lower") << '\n';
  }
}

}  // namespace ampcs

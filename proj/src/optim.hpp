#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace ampcs::detail {

struct NmResult {
  std::vector<double> x;
  double f = 0.0;
  int evaluations = 0;
};

// Nelder-Mead simplex search with standard coefficients.
inline NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                            double step, double ftol, int max_eval) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> s(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) s[i + 1][i] += step;
  std::vector<double> fv(n + 1);
  int evals = 0;
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(s[i]), ++evals;
  std::vector<std::size_t> idx(n + 1);
  while (evals < max_eval) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    const std::size_t best = idx.front(), worst = idx.back(), second = idx[n - 1];
    if (std::abs(fv[worst] - fv[best]) <= ftol * (std::abs(fv[best]) + 1e-300)) break;
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t j = 0; j < n; ++j) c[j] += s[i][j] / n;
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = c[j] + t * (s[worst][j] - c[j]);
      return p;
    };
    auto xr = along(-1.0);
    double fr = f(xr);
    ++evals;
    if (fr < fv[best]) {
      auto xe = along(-2.0);
      double fe = f(xe);
      ++evals;
      if (fe < fr)
        s[worst] = xe, fv[worst] = fe;
      else
        s[worst] = xr, fv[worst] = fr;
    } else if (fr < fv[second]) {
      s[worst] = xr, fv[worst] = fr;
    } else {
      auto xc = fr < fv[worst] ? along(-0.5) : along(0.5);
      double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, fv[worst])) {
        s[worst] = xc, fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < n; ++j) s[i][j] = s[best][j] + 0.5 * (s[i][j] - s[best][j]);
          fv[i] = f(s[i]);
          ++evals;
        }
      }
    }
  }
  std::size_t b = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  return {s[b], fv[b], evals};
}

// Grid search over [lo, hi] followed by `rounds` refinements, each shrinking the box 10x.
template <class F>
std::pair<double, double> refine_grid_max(F f, double lo, double hi, int nodes, int rounds) {
  double h = (hi - lo) / (nodes - 1);
  double best_x = lo, best_f = f(lo);
  for (int i = 1; i < nodes; ++i) {
    double x = lo + i * h;
    double v = f(x);
    if (v > best_f) best_f = v, best_x = x;
  }
  for (int r = 0; r < rounds; ++r) {
    double a = std::max(lo, best_x - h), b = std::min(hi, best_x + h);
    h /= 10.0;
    for (double x = a; x <= b + 1e-15; x += h) {
      double v = f(x);
      if (v > best_f) best_f = v, best_x = x;
    }
  }
  return {best_x, best_f};
}

}  // namespace ampcs::detail

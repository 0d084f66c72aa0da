#include "ampcs/denoisers.hpp"

#include <stdexcept>
#include <vector>

namespace ampcs {

// Dynamic programming over the piecewise-linear derivative of the partial
// objective; each stage contributes two knots and the solution is recovered
// by clamping backwards between the recorded knots.
Vec apply_tv(const Vec& y, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("tv threshold must be >= 0");
  const Eigen::Index n = y.size();
  if (n <= 1 || tau == 0.0) return y;

  std::vector<double> knot(2 * n), da(2 * n), db(2 * n);
  std::vector<double> lower(n - 1), upper(n - 1);

  lower[0] = y[0] - tau;
  upper[0] = y[0] + tau;
  Eigen::Index l = n - 1, r = n;
  knot[l] = lower[0];
  knot[r] = upper[0];
  da[l] = 1.0;
  db[l] = tau - y[0];
  da[r] = -1.0;
  db[r] = y[0] + tau;
  double a_first = 1.0, b_first = -y[1] - tau;
  double a_last = -1.0, b_last = y[1] - tau;

  for (Eigen::Index k = 1; k < n - 1; ++k) {
    double a_lo = a_first, b_lo = b_first;
    Eigen::Index lo = l;
    for (; lo <= r; ++lo) {
      if (a_lo * knot[lo] + b_lo > -tau) break;
      a_lo += da[lo];
      b_lo += db[lo];
    }
    double a_hi = a_last, b_hi = b_last;
    Eigen::Index hi = r;
    for (; hi >= lo; --hi) {
      if (-a_hi * knot[hi] - b_hi < tau) break;
      a_hi += da[hi];
      b_hi += db[hi];
    }
    lower[k] = (-tau - b_lo) / a_lo;
    upper[k] = (tau + b_hi) / (-a_hi);
    l = lo - 1;
    r = hi + 1;
    knot[l] = lower[k];
    knot[r] = upper[k];
    da[l] = a_lo;
    db[l] = b_lo + tau;
    da[r] = a_hi;
    db[r] = b_hi + tau;
    a_first = 1.0;
    b_first = -y[k + 1] - tau;
    a_last = -1.0;
    b_last = y[k + 1] - tau;
  }

  double a_lo = a_first, b_lo = b_first;
  for (Eigen::Index lo = l; lo <= r; ++lo) {
    if (a_lo * knot[lo] + b_lo > 0.0) break;
    a_lo += da[lo];
    b_lo += db[lo];
  }
  Vec x(n);
  x[n - 1] = -b_lo / a_lo;
  for (Eigen::Index k = n - 2; k >= 0; --k) {
    if (x[k + 1] > upper[k])
      x[k] = upper[k];
    else if (x[k + 1] < lower[k])
      x[k] = lower[k];
    else
      x[k] = x[k + 1];
  }
  return x;
}

}  // namespace ampcs

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "levychan/detail/math.hpp"

namespace levychan {

// Every integral/sum in the library reports its value together with an error
// estimate; identity checks budget their tolerances from these.
struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long evaluations = 0;
  bool converged = true;

  QuadResult& operator+=(const QuadResult& o) {
    value += o.value;
    error_estimate += o.error_estimate;
    evaluations += o.evaluations;
    converged = converged && o.converged;
    return *this;
  }
};

// Non-convergence is loud: the exception still carries the best estimate.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, QuadResult best)
      : std::runtime_error(what), best_(best) {}
  const QuadResult& best() const noexcept { return best_; }

 private:
  QuadResult best_;
};

// Default per-integral evaluation budget (2^15).
inline constexpr long kDefaultQuadBudget = 1L << 15;

namespace detail {

// Gauss(7)-Kronrod(15) pair, nodes/weights on [-1, 1].
inline constexpr double kGkNode[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double kGkWeightK[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kGkWeightG[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct GkSegment {
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;
  double err = 0.0;
  bool operator<(const GkSegment& o) const { return err < o.err; }
};

// One Gauss-Kronrod application on [lo, hi]; open rule, endpoints untouched.
template <class F>
GkSegment gk15(const F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);

  const double fc = f(center);
  double res_gauss = kGkWeightG[3] * fc;
  double res_kron = kGkWeightK[7] * fc;
  double res_abs = kGkWeightK[7] * std::abs(fc);

  double fv[15];
  fv[7] = fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kGkNode[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv[j] = f1;
    fv[14 - j] = f2;
    res_kron += kGkWeightK[j] * (f1 + f2);
    res_abs += kGkWeightK[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) res_gauss += kGkWeightG[j / 2] * (f1 + f2);
  }

  const double mean = res_kron * 0.5;
  double res_asc = kGkWeightK[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    res_asc += kGkWeightK[j] *
               (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
  }

  GkSegment seg;
  seg.lo = lo;
  seg.hi = hi;
  seg.value = res_kron * half;
  res_abs *= std::abs(half);
  res_asc *= std::abs(half);
  double err = std::abs((res_kron - res_gauss) * half);
  if (res_asc != 0.0 && err != 0.0) {
    err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  }
  const double uflow = std::numeric_limits<double>::min();
  if (res_abs > uflow / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * res_abs, err);
  }
  if (!std::isfinite(seg.value)) err = kInf;
  seg.err = err;
  return seg;
}

// Adaptive refinement over a set of seed segments: repeatedly bisect the
// segment with the largest error until the summed estimate meets tol or the
// evaluation budget runs out.
template <class F>
QuadResult adaptive_gk(const F& f, const std::vector<double>& breakpoints,
                       double tol, long budget) {
  QuadResult out;
  std::priority_queue<GkSegment> heap;
  double total_err = 0.0;
  long evals = 0;

  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1])) continue;
    GkSegment seg = gk15(f, breakpoints[i], breakpoints[i + 1]);
    evals += 15;
    total_err += seg.err;
    heap.push(seg);
  }

  long since_resum = 0;
  while (total_err > tol && evals + 30 <= budget && !heap.empty()) {
    GkSegment worst = heap.top();
    if (!(worst.err > 0.0)) break;
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(worst.lo < mid && mid < worst.hi)) {
      // interval no longer splittable at double precision
      heap.push(worst);
      break;
    }
    GkSegment left = gk15(f, worst.lo, mid);
    GkSegment right = gk15(f, mid, worst.hi);
    evals += 30;
    total_err += left.err + right.err - worst.err;
    heap.push(left);
    heap.push(right);

    if (++since_resum == 64) {
      // refresh the incrementally tracked error sum to shed rounding drift
      since_resum = 0;
      std::priority_queue<GkSegment> copy = heap;
      KahanSum es;
      while (!copy.empty()) {
        es.add(copy.top().err);
        copy.pop();
      }
      total_err = es.value();
    }
  }

  KahanSum vs;
  KahanSum es;
  while (!heap.empty()) {
    vs.add(heap.top().value);
    es.add(heap.top().err);
    heap.pop();
  }
  out.value = vs.value();
  out.error_estimate = es.value();
  out.evaluations = evals;
  out.converged = out.error_estimate <= tol && std::isfinite(out.value);
  return out;
}

inline std::vector<double> uniform_breakpoints(double lo, double hi, int n) {
  std::vector<double> bp;
  bp.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    bp.push_back(lo + (hi - lo) * static_cast<double>(i) / n);
  }
  bp.back() = hi;
  return bp;
}

}  // namespace detail

/// Adaptive Gauss-Kronrod estimate of an integral over a finite interval.
/// The rule is open: f is never evaluated at lo or hi, so integrable endpoint
/// singularities are admissible.
inline QuadResult integrate_interval(const std::function<double(double)>& f,
                                     double lo, double hi, double tol,
                                     long budget = kDefaultQuadBudget) {
  if (!(lo < hi)) throw std::invalid_argument("integrate_interval: lo >= hi");
  if (!(tol > 0.0)) throw std::invalid_argument("integrate_interval: tol <= 0");
  return detail::adaptive_gk(f, detail::uniform_breakpoints(lo, hi, 4), tol,
                             budget);
}

/// Integral over [lo, inf) via the rational substitution y = lo + (1-t)/t,
/// t in (0, 1].
inline QuadResult integrate_semi_infinite(
    const std::function<double(double)>& f, double lo, double tol,
    long budget = kDefaultQuadBudget) {
  if (!std::isfinite(lo)) {
    throw std::invalid_argument("integrate_semi_infinite: lo not finite");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("integrate_semi_infinite: tol <= 0");
  }
  auto g = [&f, lo](double t) {
    const double y = lo + (1.0 - t) / t;
    return f(y) / (t * t);
  };
  // denser seeding near t = 0 where the tail lives
  const std::vector<double> bp = {0.0,    1.0 / 64, 1.0 / 32, 1.0 / 16,
                                  1.0 / 8, 1.0 / 4,  1.0 / 2,  1.0};
  return detail::adaptive_gk(g, bp, tol, budget);
}

/// Sums term(k) for k = first, first+1, ... until the caller-provided bound
/// on the remaining tail drops below tol/10.
inline QuadResult sum_series(const std::function<double(long)>& term,
                             const std::function<double(long)>& tail_bound,
                             double tol, long first = 1,
                             long budget = kDefaultQuadBudget) {
  if (!(tol > 0.0)) throw std::invalid_argument("sum_series: tol <= 0");
  QuadResult out;
  detail::KahanSum sum;
  double abs_sum = 0.0;
  double tail = detail::kInf;
  for (long k = first; out.evaluations < budget; ++k) {
    const double t = term(k);
    ++out.evaluations;
    sum.add(t);
    abs_sum += std::abs(t);
    tail = tail_bound(k);
    if (tail < tol / 10.0) break;
  }
  out.value = sum.value();
  out.error_estimate = std::max(tail, 0.0) + 4.0 * detail::kEps * abs_sum;
  out.converged =
      tail < tol / 10.0 && std::isfinite(out.value);
  return out;
}

/// SNR-axis integral of h over [lo, hi]: composite adaptive rule seeded on a
/// log-spaced grid (identities integrate from gamma = 0, where integrands
/// stay finite but vary fastest).
inline QuadResult integrate_snr(const std::function<double(double)>& h,
                                double lo, double hi, double tol,
                                long budget = kDefaultQuadBudget) {
  if (!(lo < hi)) throw std::invalid_argument("integrate_snr: lo >= hi");
  if (!(tol > 0.0)) throw std::invalid_argument("integrate_snr: tol <= 0");
  std::vector<double> bp;
  bp.push_back(lo);
  const double span = hi - lo;
  for (int j = 10; j >= 1; --j) {
    bp.push_back(lo + span * std::pow(2.0, -j));
  }
  bp.push_back(hi);
  return detail::adaptive_gk(h, bp, tol, budget);
}

}  // namespace levychan

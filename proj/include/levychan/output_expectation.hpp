#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "levychan/channel.hpp"
#include "levychan/detail/math.hpp"
#include "levychan/prior.hpp"
#include "levychan/quadrature.hpp"

namespace levychan {

namespace detail {

// ln of the output mixture density/pmf sum_i w_i f_gamma(y|x_i).
inline double log_mixture(const ChannelModel& ch, const DiscretePrior& mix,
                          double gamma, double y) {
  double m = -kInf;
  std::vector<double> logs(mix.size());
  for (std::size_t i = 0; i < mix.size(); ++i) {
    logs[i] = std::log(mix.weights[i]) + ch.log_cond(mix.atoms[i], gamma, y);
    m = std::max(m, logs[i]);
  }
  if (m == -kInf) return m;
  double s = 0.0;
  for (double l : logs) s += std::exp(l - m);
  return m + std::log(s);
}

// Merge [lo_i, hi_i] windows into disjoint breakpoint runs for seeding.
inline std::vector<std::vector<double>> merge_windows(
    std::vector<std::pair<double, double>> win, int pieces_per_window) {
  std::sort(win.begin(), win.end());
  std::vector<std::vector<double>> runs;
  for (const auto& [lo, hi] : win) {
    if (!runs.empty() && lo <= runs.back().back()) {
      runs.back().back() = std::max(runs.back().back(), hi);
    } else {
      runs.push_back({lo, hi});
    }
  }
  std::vector<std::vector<double>> out;
  for (const auto& r : runs) {
    out.push_back(uniform_breakpoints(r.front(), r.back(), pieces_per_window));
  }
  return out;
}

// Solve s - gamma ln s >= target for the Gamma upper tail cutoff.
inline double gamma_tail_cutoff(double shape, double target) {
  double s = target + shape + 10.0;
  for (int i = 0; i < 4; ++i) {
    s = target + shape * std::log(std::max(s, 2.0)) + 1.0;
  }
  return std::max(s, shape + 12.0 * std::sqrt(shape) + 5.0);
}

}  // namespace detail

/// Expectation of g(Y) under the output mixture law sum_i w_i f_gamma(.|x_i):
/// an integral for continuous channels (truncated where the mixture density
/// is negligible), a cumulative-mass-stopped sum for counting channels.
/// g is never consulted where the mixture carries no mass.
inline QuadResult expectation_over_output(
    const ChannelModel& ch, double gamma, const DiscretePrior& weight,
    const std::function<double(double)>& g, double tol,
    long budget = kDefaultQuadBudget) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("expectation_over_output: tol <= 0");
  }

  switch (ch.output_kind()) {
    case OutputKind::kContinuousReal: {
      // union of atom windows gamma*x_i +/- 12 sqrt(gamma); the mass beyond
      // 12 sigma (~2e-33) is far below any tolerance in use
      const double half_width = 12.0 * std::sqrt(gamma);
      std::vector<std::pair<double, double>> win;
      for (double x : weight.atoms) {
        win.emplace_back(gamma * x - half_width, gamma * x + half_width);
      }
      auto integrand = [&](double y) {
        const double lm = detail::log_mixture(ch, weight, gamma, y);
        if (lm == -detail::kInf) return 0.0;
        const double dens = std::exp(lm);
        return dens == 0.0 ? 0.0 : g(y) * dens;
      };
      QuadResult out;
      const auto runs = detail::merge_windows(std::move(win), 6);
      for (const auto& bp : runs) {
        out += detail::adaptive_gk(integrand, bp, tol / runs.size(), budget);
      }
      out.error_estimate += 1e-30;  // truncation allowance
      out.converged = out.error_estimate <= tol;
      return out;
    }

    case OutputKind::kContinuousPositive: {
      // substitute t = ln y: the y^{gamma-1} endpoint singularity disappears
      // and the integrand decays like e^{gamma t} to the left
      auto integrand = [&](double t) {
        const double y = std::exp(t);
        const double lm = detail::log_mixture(ch, weight, gamma, y) + t;
        if (lm == -detail::kInf) return 0.0;
        const double dens = std::exp(lm);
        return dens == 0.0 ? 0.0 : g(y) * dens;
      };
      const double x_min =
          *std::min_element(weight.atoms.begin(), weight.atoms.end());
      const double x_max =
          *std::max_element(weight.atoms.begin(), weight.atoms.end());
      const double log_eps = std::log(std::min(tol, 1e-6)) - 9.0;
      // lower cutoff: mass of e^{gamma t}/Gamma(gamma+1) below t_lo
      double t_lo =
          std::log(x_min) + (log_eps + std::lgamma(gamma + 1.0)) / gamma;
      t_lo -= std::log1p(std::abs(t_lo));  // margin for slowly growing g
      // upper cutoff from the exponential tail
      const double s =
          detail::gamma_tail_cutoff(gamma, -log_eps + std::lgamma(gamma));
      const double t_hi = std::log(x_max * s);

      // For very small shape parameters the output mass concentrates below
      // the smallest representable double. Clamp the transformed range and
      // account for the clamped-off head in closed form: below y_c the
      // integrand g is constant to machine precision (it depends on y only
      // through ratios that have already converged), so the head contributes
      // g(y_c) * P(Y <= y_c).
      constexpr double kTClamp = -690.0;
      QuadResult out;
      bool clamped = false;
      if (t_lo < kTClamp) {
        if (!ch.has_lower_tail()) {
          throw QuadratureError(
              "expectation_over_output: shape too small without a "
              "lower-tail law",
              QuadResult{0.0, detail::kInf, 0, false});
        }
        clamped = true;
        const double yc = std::exp(kTClamp);
        std::vector<double> logs(weight.size());
        for (std::size_t i = 0; i < weight.size(); ++i) {
          logs[i] = std::log(weight.weights[i]) +
                    ch.log_lower_tail(weight.atoms[i], gamma, yc);
        }
        const double head_mass = std::exp(detail::log_sum_exp(logs));
        const double g1 = g(yc);
        const double g2 = g(std::exp(kTClamp + 5.0));
        out.value += g1 * head_mass;
        out.error_estimate +=
            std::abs(g1 - g2) * head_mass +
            1e-13 * std::abs(g1) * head_mass;
        out.evaluations += 2;
        t_lo = kTClamp;
      }

      // geometric seeding toward t_lo: each segment covers ~constant
      // variation of e^{gamma t}
      std::vector<double> bp;
      bp.push_back(t_lo);
      const double range = t_hi - t_lo;
      for (int j = 12; j >= 1; --j) {
        bp.push_back(t_hi - range * std::pow(2.0, -(13 - j)));
      }
      bp.push_back(t_hi);
      std::sort(bp.begin(), bp.end());
      out += detail::adaptive_gk(integrand, bp, tol, budget);

      // probe extensions guard the analytic cutoffs
      if (!clamped) {
        QuadResult head =
            detail::adaptive_gk(integrand, {t_lo - 6.0, t_lo}, tol, 4096);
        out.value += head.value;
        out.error_estimate += head.error_estimate + 0.1 * std::abs(head.value);
        out.evaluations += head.evaluations;
      }
      QuadResult tail =
          detail::adaptive_gk(integrand, {t_hi, t_hi + 6.0}, tol, 4096);
      out.value += tail.value;
      out.error_estimate += tail.error_estimate + 0.1 * std::abs(tail.value);
      out.evaluations += tail.evaluations;
      out.converged = out.error_estimate <= tol;
      return out;
    }

    case OutputKind::kCount: {
      QuadResult out;
      detail::KahanSum sum;
      detail::KahanSum mass;
      const double mass_goal = 1.0 - tol * 1e-3;
      const double term_goal = tol * 1e-3;
      double recent_g = 1.0;
      int small_streak = 0;
      double abs_sum = 0.0;
      for (long y = 0; out.evaluations < budget; ++y) {
        const double lm =
            detail::log_mixture(ch, weight, gamma, static_cast<double>(y));
        ++out.evaluations;
        const double p = lm == -detail::kInf ? 0.0 : std::exp(lm);
        double term = 0.0;
        if (p > 0.0) {
          const double gy = g(static_cast<double>(y));
          recent_g = std::max(std::abs(gy), 0.5 * recent_g);
          term = gy * p;
        }
        sum.add(term);
        abs_sum += std::abs(term);
        mass.add(p);
        small_streak = std::abs(term) < term_goal ? small_streak + 1 : 0;
        if (mass.value() >= mass_goal && small_streak >= 3) break;
      }
      out.value = sum.value();
      const double deficit = std::max(0.0, 1.0 - mass.value());
      out.error_estimate = deficit * (recent_g + 1.0) +
                           4.0 * detail::kEps * abs_sum;
      out.converged = out.error_estimate <= tol;
      return out;
    }
  }
  throw std::logic_error("expectation_over_output: unknown output kind");
}

}  // namespace levychan

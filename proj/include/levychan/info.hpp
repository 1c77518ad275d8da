#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "levychan/channel.hpp"
#include "levychan/detail/math.hpp"
#include "levychan/errors.hpp"
#include "levychan/output_expectation.hpp"
#include "levychan/posterior.hpp"
#include "levychan/prior.hpp"
#include "levychan/quadrature.hpp"

namespace levychan {

/// I(X; Y_gamma) for a finite-support input law, as the prior-weighted KL
/// divergence between each conditional output law and the output mixture.
/// gamma = 0 returns exactly 0.
inline QuadResult mutual_information(const ChannelModel& ch,
                                     const DiscretePrior& prior, double gamma,
                                     double tol) {
  if (gamma == 0.0) return QuadResult{};
  if (!(gamma > 0.0)) throw std::domain_error("mutual_information: gamma < 0");
  QuadResult out;
  const double n = static_cast<double>(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const double x = prior.atoms[i];
    const double p = prior.weights[i];
    auto g = [&](double y) {
      const double lc = ch.log_cond(x, gamma, y);
      const double lm = detail::log_mixture(ch, prior, gamma, y);
      return lc - lm;
    };
    QuadResult e = expectation_over_output(ch, gamma, DiscretePrior::point_mass(x),
                                           g, tol / (n * p));
    e.value *= p;
    e.error_estimate *= p;
    out += e;
  }
  out.converged = out.error_estimate <= tol;
  return out;
}

/// D(P_{Y_gamma} || Q_{Y_gamma}) between the output mixtures under input laws
/// P and Q. Fails loudly if Q's mixture vanishes where P's carries mass.
inline QuadResult output_relative_entropy(const ChannelModel& ch,
                                          const DiscretePrior& p,
                                          const DiscretePrior& q, double gamma,
                                          double tol) {
  if (gamma == 0.0) return QuadResult{};
  if (!(gamma > 0.0)) {
    throw std::domain_error("output_relative_entropy: gamma < 0");
  }
  QuadResult out;
  const double n = static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = p.atoms[i];
    const double pw = p.weights[i];
    auto g = [&](double y) {
      const double lp = detail::log_mixture(ch, p, gamma, y);
      const double lq = detail::log_mixture(ch, q, gamma, y);
      if (lq == -detail::kInf) {
        throw SupportError(
            "output_relative_entropy: Q mixture vanishes where P has mass");
      }
      return lp - lq;
    };
    QuadResult e = expectation_over_output(ch, gamma, DiscretePrior::point_mass(x),
                                           g, tol / (n * pw));
    e.value *= pw;
    e.error_estimate *= pw;
    out += e;
  }
  out.converged = out.error_estimate <= tol;
  return out;
}

namespace detail {

// Central finite difference with one Richardson step; eval(gamma) must carry
// its own quadrature error.
inline QuadResult richardson_derivative(
    const std::function<QuadResult(double)>& eval, double gamma, double h) {
  const QuadResult fp1 = eval(gamma + h);
  const QuadResult fm1 = eval(gamma - h);
  const QuadResult fp2 = eval(gamma + 0.5 * h);
  const QuadResult fm2 = eval(gamma - 0.5 * h);
  const double d1 = (fp1.value - fm1.value) / (2.0 * h);
  const double d2 = (fp2.value - fm2.value) / h;
  QuadResult out;
  out.value = (4.0 * d2 - d1) / 3.0;
  const double resid = std::abs(d2 - d1) / 3.0;
  const double quad_err =
      (4.0 / (3.0 * h)) * (fp2.error_estimate + fm2.error_estimate) +
      (1.0 / (6.0 * h)) * (fp1.error_estimate + fm1.error_estimate);
  out.error_estimate = resid + quad_err;
  out.evaluations =
      fp1.evaluations + fm1.evaluations + fp2.evaluations + fm2.evaluations;
  out.converged =
      fp1.converged && fm1.converged && fp2.converged && fm2.converged;
  return out;
}

}  // namespace detail

/// dI/dgamma by central differences with one Richardson extrapolation step,
/// h = max(1e-3, 1e-3 gamma). Finite differences are deliberate: the
/// derivative must come from a path independent of the expected-loss side it
/// is checked against.
inline QuadResult mi_derivative(const ChannelModel& ch,
                                const DiscretePrior& prior, double gamma,
                                double tol) {
  const double h = std::max(1e-3, 1e-3 * gamma);
  if (gamma < h) {
    throw std::domain_error("mi_derivative: gamma smaller than the FD step");
  }
  const double mi_tol = tol * h / 6.0;
  auto eval = [&](double g) { return mutual_information(ch, prior, g, mi_tol); };
  QuadResult out = detail::richardson_derivative(eval, gamma, h);
  out.converged = out.converged && out.error_estimate <= tol;
  return out;
}

/// d/dgamma D(P_{Y_gamma} || Q_{Y_gamma}), same finite-difference scheme.
inline QuadResult output_relative_entropy_derivative(const ChannelModel& ch,
                                                     const DiscretePrior& p,
                                                     const DiscretePrior& q,
                                                     double gamma, double tol) {
  const double h = std::max(1e-3, 1e-3 * gamma);
  if (gamma < h) {
    throw std::domain_error(
        "output_relative_entropy_derivative: gamma smaller than the FD step");
  }
  const double d_tol = tol * h / 6.0;
  auto eval = [&](double g) {
    return output_relative_entropy(ch, p, q, g, d_tol);
  };
  QuadResult out = detail::richardson_derivative(eval, gamma, h);
  out.converged = out.converged && out.error_estimate <= tol;
  return out;
}

namespace detail {

struct TailFit {
  bool decayed = false;   // integrand already numerically zero
  bool decaying = false;  // fitted rate is positive
  double tail = 0.0;      // estimated integral beyond gamma_max
  double residual = 0.0;  // rms misfit of the log-linear fit
};

// Fit c * e^{-rho beta} to integrand samples over the last decade of the
// integration range and estimate the remaining tail mass.
inline TailFit fit_exponential_tail(const std::function<double(double)>& h,
                                    double gamma_max) {
  constexpr int kSamples = 9;
  std::vector<double> beta, logv;
  for (int j = 0; j < kSamples; ++j) {
    const double b =
        gamma_max * std::pow(10.0, -1.0 + static_cast<double>(j) / (kSamples - 1));
    const double v = h(b);
    if (v > 1e-280) {
      beta.push_back(b);
      logv.push_back(std::log(v));
    }
  }
  TailFit fit;
  if (beta.size() < 3) {
    fit.decayed = true;
    fit.decaying = true;
    return fit;
  }
  // least squares on ln v = ln c - rho * beta
  double sb = 0, sv = 0, sbb = 0, sbv = 0;
  const double n = static_cast<double>(beta.size());
  for (std::size_t j = 0; j < beta.size(); ++j) {
    sb += beta[j];
    sv += logv[j];
    sbb += beta[j] * beta[j];
    sbv += beta[j] * logv[j];
  }
  const double denom = n * sbb - sb * sb;
  const double slope = (n * sbv - sb * sv) / denom;
  const double intercept = (sv - slope * sb) / n;
  const double rho = -slope;
  if (!(rho > 1e-6)) return fit;  // not decaying (yet)
  fit.decaying = true;
  fit.tail = std::exp(intercept - rho * gamma_max) / rho;
  double rss = 0.0;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    const double r = logv[j] - (intercept + slope * beta[j]);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / n);
  return fit;
}

// Shared improper-integral driver for the Theorem-style entropy and relative
// entropy representations: integrate h over [0, gamma_max], extend gamma_max
// until the fitted exponential tail drops below tol.
inline QuadResult snr_integral_to_infinity(
    const std::function<double(double, double)>& h_with_tol, double tol,
    const char* what, bool divergence_is_support_failure) {
  const double gamma_cap = 4096.0;
  double gamma_max = 16.0;
  QuadResult best;
  while (true) {
    const double inner_tol = tol / (4.0 * gamma_max);
    auto h = [&](double b) { return h_with_tol(b, inner_tol); };
    QuadResult body = integrate_snr(h, 0.0, gamma_max, tol / 4.0);
    TailFit fit = fit_exponential_tail(h, gamma_max);
    best = body;
    best.error_estimate += gamma_max * inner_tol;
    if (fit.decayed) {
      best.converged = best.error_estimate <= tol;
      return best;
    }
    if (fit.decaying && fit.tail < tol) {
      best.value += fit.tail;
      best.error_estimate += fit.tail * (1.0 + fit.residual);
      best.converged = best.error_estimate <= tol;
      return best;
    }
    if (gamma_max >= gamma_cap) {
      if (divergence_is_support_failure) {
        throw DivergenceError(std::string(what) +
                              ": integrand not decaying at the budget limit; "
                              "the integral diverges");
      }
      throw QuadratureError(
          std::string(what) + ": tail fit failed, integrand not decaying",
          best);
    }
    gamma_max *= 2.0;
  }
}

}  // namespace detail

/// H(X) as the SNR integral of the matched expected Levy loss.
inline QuadResult entropy_via_loss_integral(const ChannelModel& ch,
                                            const DiscretePrior& prior,
                                            double tol) {
  auto h = [&](double beta, double inner_tol) {
    if (beta == 0.0) beta = 1e-12;
    return expected_levy_loss(ch, prior, prior, beta, inner_tol).value;
  };
  return detail::snr_integral_to_infinity(h, tol, "entropy_via_loss_integral",
                                          false);
}

/// D(P || Q) as the SNR integral of the cost of mismatch. Requires P << Q
/// atom-wise; for mutually singular laws (e.g. distinct point masses) the
/// integrand is bounded away from zero and the integral diverges.
inline QuadResult relative_entropy_via_loss_integral(const ChannelModel& ch,
                                                     const DiscretePrior& p,
                                                     const DiscretePrior& q,
                                                     double tol) {
  if (!absolutely_continuous(p, q)) {
    throw DivergenceError(
        "relative_entropy_via_loss_integral: P is not absolutely continuous "
        "w.r.t. Q; the excess-loss integrand does not decay and the integral "
        "diverges");
  }
  auto h = [&](double beta, double inner_tol) {
    if (beta == 0.0) beta = 1e-12;
    return mismatch_excess(ch, p, q, beta, inner_tol).value;
  };
  return detail::snr_integral_to_infinity(
      h, tol, "relative_entropy_via_loss_integral", true);
}

/// A sampled information curve over an increasing SNR grid.
struct InfoCurve {
  std::vector<double> gammas;
  std::vector<double> values;
  std::vector<double> error_estimates;
};

inline InfoCurve mutual_information_curve(const ChannelModel& ch,
                                          const DiscretePrior& prior,
                                          const std::vector<double>& gammas,
                                          double tol) {
  InfoCurve curve;
  for (double g : gammas) {
    const QuadResult r = mutual_information(ch, prior, g, tol);
    curve.gammas.push_back(g);
    curve.values.push_back(r.value);
    curve.error_estimates.push_back(r.error_estimate);
  }
  return curve;
}

inline InfoCurve output_relative_entropy_curve(
    const ChannelModel& ch, const DiscretePrior& p, const DiscretePrior& q,
    const std::vector<double>& gammas, double tol) {
  InfoCurve curve;
  for (double g : gammas) {
    const QuadResult r = output_relative_entropy(ch, p, q, g, tol);
    curve.gammas.push_back(g);
    curve.values.push_back(r.value);
    curve.error_estimates.push_back(r.error_estimate);
  }
  return curve;
}

// ---- the amplified Gamma parametrization (invariance check support) ----

namespace detail {

inline double log_gamma_mixture(const GammaAmplified& model,
                                const DiscretePrior& mix, double y) {
  double m = -kInf;
  std::vector<double> logs(mix.size());
  for (std::size_t i = 0; i < mix.size(); ++i) {
    logs[i] = std::log(mix.weights[i]) + model.log_cond(mix.atoms[i], y);
    m = std::max(m, logs[i]);
  }
  if (m == -kInf) return m;
  double s = 0.0;
  for (double l : logs) s += std::exp(l - m);
  return m + std::log(s);
}

// Expectation of g(Y) under the Gamma(k, a x_i / k) mixture, via t = ln y.
inline QuadResult gamma_amplified_expectation(
    const GammaAmplified& model, const DiscretePrior& mix,
    const std::function<double(double)>& g, double tol) {
  const double shape = model.shape();
  double scale_min = kInf, scale_max = 0.0;
  for (double x : mix.atoms) {
    const double s = model.amplification() * x / shape;
    scale_min = std::min(scale_min, s);
    scale_max = std::max(scale_max, s);
  }
  const double log_eps = std::log(std::min(tol, 1e-6)) - 9.0;
  double t_lo =
      std::log(scale_min) + (log_eps + std::lgamma(shape + 1.0)) / shape;
  t_lo -= std::log1p(std::abs(t_lo));
  const double s_cut = gamma_tail_cutoff(shape, -log_eps + std::lgamma(shape));
  const double t_hi = std::log(scale_max * s_cut);

  auto integrand = [&](double t) {
    const double y = std::exp(t);
    const double lm = log_gamma_mixture(model, mix, y) + t;
    if (lm == -kInf) return 0.0;
    const double dens = std::exp(lm);
    return dens == 0.0 ? 0.0 : g(y) * dens;
  };

  // mirror the clamped-head handling of expectation_over_output
  constexpr double kTClamp = -690.0;
  QuadResult out;
  if (t_lo < kTClamp) {
    const double yc = std::exp(kTClamp);
    std::vector<double> logs(mix.size());
    for (std::size_t i = 0; i < mix.size(); ++i) {
      const double sc = model.amplification() * mix.atoms[i] / shape;
      logs[i] = std::log(mix.weights[i]) +
                log_lower_gamma_reg(shape, kTClamp - std::log(sc));
    }
    const double head_mass = std::exp(log_sum_exp(logs));
    const double g1 = g(yc);
    out.value += g1 * head_mass;
    out.error_estimate += std::abs(g1 - g(std::exp(kTClamp + 5.0))) * head_mass +
                          1e-13 * std::abs(g1) * head_mass;
    t_lo = kTClamp;
  }

  std::vector<double> bp;
  bp.push_back(t_lo);
  const double range = t_hi - t_lo;
  for (int j = 12; j >= 1; --j) {
    bp.push_back(t_hi - range * std::pow(2.0, -(13 - j)));
  }
  bp.push_back(t_hi);
  std::sort(bp.begin(), bp.end());
  out += adaptive_gk(integrand, bp, tol, kDefaultQuadBudget);
  return out;
}

}  // namespace detail

/// I(X; Y_a) under Y_a | X ~ Gamma(k, aX/k). Analytically independent of a.
inline QuadResult mutual_information(const GammaAmplified& model,
                                     const DiscretePrior& prior, double tol) {
  QuadResult out;
  const double n = static_cast<double>(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const double x = prior.atoms[i];
    const double p = prior.weights[i];
    auto g = [&](double y) {
      return model.log_cond(x, y) - detail::log_gamma_mixture(model, prior, y);
    };
    QuadResult e = detail::gamma_amplified_expectation(
        model, DiscretePrior::point_mass(x), g, tol / (n * p));
    e.value *= p;
    e.error_estimate *= p;
    out += e;
  }
  out.converged = out.error_estimate <= tol;
  return out;
}

/// D(P_{Y_a} || Q_{Y_a}) under the same amplified model.
inline QuadResult output_relative_entropy(const GammaAmplified& model,
                                          const DiscretePrior& p,
                                          const DiscretePrior& q, double tol) {
  QuadResult out;
  const double n = static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = p.atoms[i];
    const double pw = p.weights[i];
    auto g = [&](double y) {
      return detail::log_gamma_mixture(model, p, y) -
             detail::log_gamma_mixture(model, q, y);
    };
    QuadResult e = detail::gamma_amplified_expectation(
        model, DiscretePrior::point_mass(x), g, tol / (n * pw));
    e.value *= pw;
    e.error_estimate *= pw;
    out += e;
  }
  out.converged = out.error_estimate <= tol;
  return out;
}

}  // namespace levychan

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "levychan/channel.hpp"
#include "levychan/detail/math.hpp"
#include "levychan/quadrature.hpp"

namespace levychan {

/// Half squared error.
inline double gauss_loss(double x, double xhat) {
  const double d = x - xhat;
  return 0.5 * d * d;
}

/// x ln(x/xhat) - x + xhat on [0,inf) x [0,inf), with 0 ln 0 = 0 and
/// loss(x>0, 0) = +inf. Lower semicontinuous on its closed domain.
inline double poisson_loss(double x, double xhat) {
  if (x < 0.0 || xhat < 0.0) {
    throw std::domain_error("poisson_loss: negative argument");
  }
  if (x == 0.0) return xhat;
  if (xhat == 0.0) return detail::kInf;
  return x * std::log(x / xhat) - x + xhat;
}

namespace detail {

// Poisson loss from log-scale arguments: l_P(e^la, e^lb).
// Written as e^la * (t + expm1(-t)), t = la - lb, which stays accurate when
// la and lb nearly cancel (t + expm1(-t) = t^2/2 - t^3/6 + ...).
inline double poisson_loss_log(double la, double lb) {
  if (la == -kInf) return std::exp(lb);  // l_P(0, b) = b
  if (lb == -kInf) return kInf;          // l_P(a>0, 0) = +inf
  const double t = la - lb;
  if (std::abs(t) < 1.0) return std::exp(la) * (t + std::expm1(-t));
  return std::exp(la) * (t - 1.0) + std::exp(lb);
}

// m * l_P(e^la, e^lb) given ln m, without forming e^la (which may overflow
// long before the measure weight m brings the product back to range).
inline double weighted_poisson_loss_log(double la, double lb, double lm) {
  if (lm == -kInf) return 0.0;
  if (la == -kInf) return std::exp(lb + lm);
  if (lb == -kInf) return kInf;
  const double t = la - lb;
  if (std::abs(t) < 1.0) return std::exp(la + lm) * (t + std::expm1(-t));
  return std::exp(la + lm) * (t - 1.0) + std::exp(lb + lm);
}

}  // namespace detail

/// A channel-input reconstruction: one scalar for the continuous part plus a
/// positive function over jump sizes. Every reconstruction the library
/// produces is a finite mixture of exponentials r(z) = sum_j w_j e^{theta_j z}
/// (point-mass optimal reconstructions are the 1-term case), which is what
/// makes series tail bounds computable.
struct Reconstruction {
  double r0 = 0.0;  // theta-scale estimate for the continuous part
  std::vector<double> mix_weights;  // w_j >= 0
  std::vector<double> mix_thetas;   // theta_j, -inf allowed (zero inputs)

  double jump_value(double z) const { return std::exp(log_jump(z)); }

  double log_jump(double z) const {
    double m = -detail::kInf;
    for (std::size_t j = 0; j < mix_weights.size(); ++j) {
      if (mix_weights[j] <= 0.0) continue;
      m = std::max(m, std::log(mix_weights[j]) + mix_thetas[j] * z);
    }
    if (m == -detail::kInf) return m;
    double s = 0.0;
    for (std::size_t j = 0; j < mix_weights.size(); ++j) {
      if (mix_weights[j] <= 0.0) continue;
      s += std::exp(std::log(mix_weights[j]) + mix_thetas[j] * z - m);
    }
    return m + std::log(s);
  }

  // largest finite exponent present with positive weight; -inf if none
  double max_finite_theta() const {
    double m = -detail::kInf;
    for (std::size_t j = 0; j < mix_weights.size(); ++j) {
      if (mix_weights[j] > 0.0 && std::isfinite(mix_thetas[j])) {
        m = std::max(m, mix_thetas[j]);
      }
    }
    return m;
  }
  double min_finite_theta() const {
    double m = detail::kInf;
    for (std::size_t j = 0; j < mix_weights.size(); ++j) {
      if (mix_weights[j] > 0.0 && std::isfinite(mix_thetas[j])) {
        m = std::min(m, mix_thetas[j]);
      }
    }
    return m;
  }
  double min_positive_weight() const {
    double m = detail::kInf;
    for (double w : mix_weights) {
      if (w > 0.0) m = std::min(m, w);
    }
    return m;
  }
  bool vanishes() const {
    for (std::size_t j = 0; j < mix_weights.size(); ++j) {
      if (mix_weights[j] > 0.0 && mix_thetas[j] > -detail::kInf) return false;
    }
    return true;
  }
};

/// Optimal reconstruction under a point-mass input at y:
/// r0 = phi'(y), r(z) = e^{phi'(y) z}.
inline Reconstruction point_mass_reconstruction(const ChannelModel& ch,
                                                double y) {
  const double theta = ch.link(y);
  Reconstruction r;
  r.r0 = theta;
  r.mix_weights = {1.0};
  r.mix_thetas = {theta};
  return r;
}

// Deliberate perturbations for mutation testing: prove identity checks fail
// when a loss term is dropped or the jump measure is mis-scaled.
struct LossMutation {
  double sigma_scale = 1.0;  // scales the sigma^2 continuous term
  double nu_scale = 1.0;     // scales the jump-measure integral
  bool active() const { return sigma_scale != 1.0 || nu_scale != 1.0; }
};

/// The Levy-channel loss
///   sigma^2 * l_G(phi'(x), r0) + integral of l_P(e^{phi'(x)z}, r(z)) nu(dz),
/// evaluated to absolute tolerance tol. The continuous term compares natural
/// parameters, matching the optimal reconstruction r0 = E[phi'(X)|Y]; for the
/// Gaussian channel (phi' = identity) this is the classical squared error.
inline QuadResult levy_loss(const ChannelModel& ch, double x,
                            const Reconstruction& recon, double tol,
                            const LossMutation& mut = {}) {
  if (!(tol > 0.0)) throw std::invalid_argument("levy_loss: tol <= 0");
  const double theta = ch.link(x);
  const LevyTriple& triple = ch.triple();

  QuadResult out;
  const double sigma = triple.volatility;
  if (sigma != 0.0) {
    out.value +=
        mut.sigma_scale * sigma * sigma * gauss_loss(theta, recon.r0);
  }
  if (!triple.has_jumps()) return out;

  if (recon.vanishes() && theta > -detail::kInf) {
    // l_P(positive, 0) on a set of positive nu-measure
    out.value = detail::kInf;
    return out;
  }

  auto weighted_term = [&](double z, double log_weight) {
    return detail::weighted_poisson_loss_log(theta * z, recon.log_jump(z),
                                             log_weight);
  };

  if (const auto* d = std::get_if<DiscreteJumpWeights>(&triple.jumps)) {
    detail::KahanSum s;
    for (std::size_t k = 0; k < d->atoms.size(); ++k) {
      s.add(weighted_term(d->atoms[k], std::log(d->weights[k])));
    }
    out.value += mut.nu_scale * s.value();
    out.error_estimate += 4.0 * detail::kEps * std::abs(s.value());
    out.evaluations += static_cast<long>(d->atoms.size());
    return out;
  }

  if (const auto* s = std::get_if<JumpSeries>(&triple.jumps)) {
    // Terms decay like rho^k with rho = weight_ratio * max(e^theta,
    // e^theta_max, 1); the log factor |ln r_k| grows linearly in k and is
    // absorbed by the constant C0 after dividing by the z = k atom index.
    const double th_mix = recon.max_finite_theta();
    const double th_mix_lo = recon.min_finite_theta();
    const double exp_cap =
        std::max({theta > -detail::kInf ? std::exp(theta) : 0.0,
                  th_mix > -detail::kInf ? std::exp(th_mix) : 0.0, 1.0});
    const double zr = s->z_weight_ratio;
    const double rho = std::min(zr * exp_cap, 0.999999);
    double c0 = 2.0;
    if (theta > -detail::kInf) {
      const double wmin = recon.min_positive_weight();
      c0 = std::abs(theta) +
           std::max(std::abs(th_mix), std::abs(th_mix_lo)) +
           std::abs(std::log(std::min(wmin, 1.0))) + 2.0;
    }
    // |term(k)| <= c0 * (k m_k) * ecap^k <= c0 * (m_1/zr) * rho^k
    const double coef = c0 * s->weight(1) / zr;
    auto term = [&](long k) {
      return weighted_term(static_cast<double>(k), std::log(s->weight(k)));
    };
    auto tail = [&](long k) {
      return coef * std::pow(rho, static_cast<double>(k) + 1.0) / (1.0 - rho);
    };
    QuadResult series = sum_series(term, tail, tol);
    series.value *= mut.nu_scale;
    series.error_estimate *= std::abs(mut.nu_scale);
    out += series;
    return out;
  }

  const auto& c = std::get<ContinuousJumpDensity>(triple.jumps);
  auto f = [&](double z) { return weighted_term(z, std::log(c.density(z))); };
  QuadResult inner;
  if (std::isfinite(c.hi)) {
    inner = integrate_interval(f, c.lo, c.hi, tol);
  } else {
    // near z = 0 the integrand behaves like O(z); split at 1 and use the
    // semi-infinite rule on the tail
    const double mid = std::max(c.lo + 1.0, 1.0);
    inner = integrate_interval(f, c.lo, mid, tol / 2);
    inner += integrate_semi_infinite(f, mid, tol / 2);
  }
  inner.value *= mut.nu_scale;
  inner.error_estimate *= std::abs(mut.nu_scale);
  out += inner;
  return out;
}

/// The representative loss: the Bregman divergence generated by phi,
///   d_phi(x1, x2) = phi(x1) - phi(x2) - phi'(x2)(x1 - x2).
/// Equals the Levy loss at the point-mass-optimal reconstruction for x2.
inline double representative_loss(const ChannelModel& ch, double x1,
                                  double x2) {
  const double p2 = ch.link(x2);
  if (!std::isfinite(p2)) {
    throw std::domain_error("representative_loss: x2 on natural boundary");
  }
  return ch.dual(x1) - ch.dual(x2) - p2 * (x1 - x2);
}

}  // namespace levychan

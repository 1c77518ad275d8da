#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "levychan/channel.hpp"
#include "levychan/errors.hpp"
#include "levychan/loss.hpp"
#include "levychan/output_expectation.hpp"
#include "levychan/prior.hpp"
#include "levychan/quadrature.hpp"

namespace levychan {

struct PosteriorResult {
  std::vector<double> weights;  // aligned with the prior's atoms
  double log_marginal = 0.0;    // ln of the output mixture mass at y
  double mass_deficit = 0.0;    // posterior mass lost to likelihood underflow
};

/// Posterior atom weights w_i(y) proportional to p_i f_gamma(y|x_i),
/// computed in log space with max-subtraction.
inline PosteriorResult posterior(const ChannelModel& ch,
                                 const DiscretePrior& prior, double gamma,
                                 double y) {
  std::vector<double> logs(prior.size());
  double m = -detail::kInf;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    logs[i] = std::log(prior.weights[i]) + ch.log_cond(prior.atoms[i], gamma, y);
    m = std::max(m, logs[i]);
  }
  if (m == -detail::kInf) {
    throw SupportError("posterior: zero likelihood at every prior atom");
  }
  double z = 0.0;
  for (double l : logs) z += std::exp(l - m);
  PosteriorResult out;
  out.weights.resize(prior.size());
  double kept = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    out.weights[i] = std::exp(logs[i] - m) / z;
    kept += out.weights[i];
  }
  out.log_marginal = m + std::log(z);
  out.mass_deficit = std::max(0.0, 1.0 - kept);
  return out;
}

/// The minimum-mean-loss reconstruction given Y_gamma = y:
/// r0 = E[phi'(X)|y], r(z) = E[e^{phi'(X) z}|y].
inline Reconstruction optimal_reconstruction(const ChannelModel& ch,
                                             const DiscretePrior& prior,
                                             double gamma, double y) {
  const PosteriorResult post = posterior(ch, prior, gamma, y);
  Reconstruction r;
  r.mix_weights = post.weights;
  r.mix_thetas.resize(prior.size());
  double r0 = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const double theta = ch.link(prior.atoms[i]);
    r.mix_thetas[i] = theta;
    if (post.weights[i] > 0.0) r0 += post.weights[i] * theta;
  }
  r.r0 = r0;
  return r;
}

/// E_P[ l_L(X, X^Q_gamma) ]: the expected Levy loss when X ~ P but the
/// decoder conditions on law Q. The matched loss is the Q = P case.
inline QuadResult expected_levy_loss(const ChannelModel& ch,
                                     const DiscretePrior& prior_true,
                                     const DiscretePrior& prior_decoder,
                                     double gamma, double tol,
                                     const LossMutation& mut = {}) {
  if (!(tol > 0.0)) throw std::invalid_argument("expected_levy_loss: tol <= 0");
  const double inner_tol = tol / 4.0;
  QuadResult out;
  double inner_err = 0.0;
  for (std::size_t i = 0; i < prior_true.size(); ++i) {
    const double x = prior_true.atoms[i];
    const double p = prior_true.weights[i];
    auto g = [&](double y) {
      const Reconstruction recon =
          optimal_reconstruction(ch, prior_decoder, gamma, y);
      const QuadResult l = levy_loss(ch, x, recon, inner_tol, mut);
      inner_err = std::max(inner_err, l.error_estimate);
      if (std::isinf(l.value)) {
        throw InfiniteLossError(
            "expected_levy_loss: decoder law forces an infinite loss");
      }
      return l.value;
    };
    const DiscretePrior atom = DiscretePrior::point_mass(x);
    QuadResult e = expectation_over_output(ch, gamma, atom, g, tol / 2.0);
    e.value *= p;
    e.error_estimate *= p;
    out += e;
  }
  out.error_estimate += inner_err;
  out.converged = out.error_estimate <= tol;
  return out;
}

/// The cost-of-mismatch integrand
///   E_P[ l_L(X, X^Q_gamma) - l_L(X, X^P_gamma) ] >= 0,
/// computed in a single output quadrature per atom so correlated truncation
/// error between the two terms cancels.
inline QuadResult mismatch_excess(const ChannelModel& ch,
                                  const DiscretePrior& p,
                                  const DiscretePrior& q, double gamma,
                                  double tol, const LossMutation& mut = {}) {
  if (!(tol > 0.0)) throw std::invalid_argument("mismatch_excess: tol <= 0");
  const double inner_tol = tol / 8.0;
  QuadResult out;
  double inner_err = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = p.atoms[i];
    auto g = [&](double y) {
      const Reconstruction rq = optimal_reconstruction(ch, q, gamma, y);
      const Reconstruction rp = optimal_reconstruction(ch, p, gamma, y);
      const QuadResult lq = levy_loss(ch, x, rq, inner_tol, mut);
      const QuadResult lp = levy_loss(ch, x, rp, inner_tol, mut);
      inner_err = std::max(inner_err, lq.error_estimate + lp.error_estimate);
      if (std::isinf(lq.value) || std::isinf(lp.value)) {
        throw InfiniteLossError(
            "mismatch_excess: decoder law forces an infinite loss");
      }
      return lq.value - lp.value;
    };
    const DiscretePrior atom = DiscretePrior::point_mass(x);
    QuadResult e = expectation_over_output(ch, gamma, atom, g, tol / 2.0);
    e.value *= p.weights[i];
    e.error_estimate *= p.weights[i];
    out += e;
  }
  out.error_estimate += inner_err;
  out.converged = out.error_estimate <= tol;
  return out;
}

/// The two Input Regularity integrals for a finite-support prior:
///   (1) E (phi'(X))^2 when sigma != 0,
///   (2) E integral of phi'(X) z e^{phi'(X) z} nu(dz),
/// with the zero-input convention that a theta = -inf atom contributes 0.
struct RegularityReport {
  bool sigma_active = false;
  QuadResult condition1;  // exact finite sum; error 0
  QuadResult condition2;
  bool finite = true;
};

inline RegularityReport regularity_check(const ChannelModel& ch,
                                         const DiscretePrior& prior,
                                         double tol = 1e-10) {
  RegularityReport rep;
  const LevyTriple& triple = ch.triple();
  rep.sigma_active = triple.volatility != 0.0;
  if (rep.sigma_active) {
    double s = 0.0;
    for (std::size_t i = 0; i < prior.size(); ++i) {
      const double theta = ch.link(prior.atoms[i]);
      if (!std::isfinite(theta)) {
        rep.finite = false;
        rep.condition1.value = detail::kInf;
        break;
      }
      s += prior.weights[i] * theta * theta;
    }
    if (rep.finite) rep.condition1.value = s;
  }

  for (std::size_t i = 0; i < prior.size(); ++i) {
    const double theta = ch.link(prior.atoms[i]);
    if (theta == -detail::kInf) continue;  // e^{theta z} vanishes on z > 0
    QuadResult j;
    if (!triple.has_jumps()) {
      // nothing to integrate
    } else if (const auto* d = std::get_if<DiscreteJumpWeights>(&triple.jumps)) {
      double s = 0.0;
      for (std::size_t k = 0; k < d->atoms.size(); ++k) {
        s += d->weights[k] * theta * d->atoms[k] *
             std::exp(theta * d->atoms[k]);
      }
      j.value = s;
      j.evaluations = static_cast<long>(d->atoms.size());
    } else if (const auto* s = std::get_if<JumpSeries>(&triple.jumps)) {
      const double rho =
          std::min(s->z_weight_ratio * std::exp(theta), 0.999999);
      const double coef = std::abs(theta) * s->weight(1) / s->z_weight_ratio;
      auto term = [&](long k) {
        return s->weight(k) * theta * k * std::exp(theta * k);
      };
      auto tail = [&](long k) {
        return coef * std::pow(rho, static_cast<double>(k) + 1.0) /
               (1.0 - rho);
      };
      j = sum_series(term, tail, tol);
    } else {
      const auto& c = std::get<ContinuousJumpDensity>(triple.jumps);
      auto f = [&](double z) {
        return theta * z * std::exp(theta * z) * c.density(z);
      };
      if (std::isfinite(c.hi)) {
        j = integrate_interval(f, c.lo, c.hi, tol);
      } else {
        const double mid = std::max(c.lo + 1.0, 1.0);
        j = integrate_interval(f, c.lo, mid, tol / 2);
        j += integrate_semi_infinite(f, mid, tol / 2);
      }
      if (!j.converged) rep.finite = false;
    }
    j.value *= prior.weights[i];
    j.error_estimate *= prior.weights[i];
    rep.condition2 += j;
  }
  if (!std::isfinite(rep.condition2.value)) rep.finite = false;
  return rep;
}

}  // namespace levychan

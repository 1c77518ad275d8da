#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "levychan/channel.hpp"
#include "levychan/detail/math.hpp"
#include "levychan/info.hpp"
#include "levychan/loss.hpp"
#include "levychan/posterior.hpp"
#include "levychan/prior.hpp"
#include "levychan/quadrature.hpp"

namespace levychan {

enum class IdentityId {
  kImmle,
  kDmle,
  kEntropy,
  kRelent,
  kBregmanCollapse,
  kBregmanSnrDeriv,
  kGammaAmpInvariance,
  kEsscher,
  kPythagorean,
  kFenchel,
  kCondMean,
};

inline const char* to_string(IdentityId id) {
  switch (id) {
    case IdentityId::kImmle: return "IMMLE";
    case IdentityId::kDmle: return "DMLE";
    case IdentityId::kEntropy: return "ENTROPY";
    case IdentityId::kRelent: return "RELENT";
    case IdentityId::kBregmanCollapse: return "BREGMAN_COLLAPSE";
    case IdentityId::kBregmanSnrDeriv: return "BREGMAN_SNR_DERIV";
    case IdentityId::kGammaAmpInvariance: return "GAMMA_AMP_INVARIANCE";
    case IdentityId::kEsscher: return "ESSCHER";
    case IdentityId::kPythagorean: return "PYTHAGOREAN";
    case IdentityId::kFenchel: return "FENCHEL";
    case IdentityId::kCondMean: return "COND_MEAN";
  }
  return "UNKNOWN";
}

// Configuration echo carried by every report so a failure is reproducible
// from the report alone.
struct IdentityConfig {
  std::string channel;
  std::vector<double> atoms;
  std::vector<double> weights_p;
  std::vector<double> weights_q;  // empty when no second law is involved
  double gamma = 0.0;
  double tol = 0.0;
  double slack_mult = 10.0;
  LossMutation mutation;
  std::string extra;  // check-specific parameters, formatted key=value

  std::string fingerprint_text() const {
    std::ostringstream os;
    os.precision(17);
    os << channel << '|';
    for (double a : atoms) os << a << ',';
    os << '|';
    for (double w : weights_p) os << w << ',';
    os << '|';
    for (double w : weights_q) os << w << ',';
    os << "|g=" << gamma << "|tol=" << tol << "|s=" << slack_mult
       << "|ms=" << mutation.sigma_scale << "|mn=" << mutation.nu_scale
       << '|' << extra;
    return os.str();
  }
};

/// Result of one identity check. Pass/fail is budgeted, never eyeballed:
/// passed <=> abs_gap <= error_budget + slack_mult * tol.
struct IdentityReport {
  IdentityId id = IdentityId::kImmle;
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_gap = 0.0;
  double error_budget = 0.0;
  double slack = 0.0;
  bool passed = false;
  bool converged = true;  // every contributing estimate met its tolerance
  IdentityConfig config;
  std::string annotation;

  std::uint64_t fingerprint() const {
    return detail::fnv1a(std::string(to_string(id)) + '#' +
                         config.fingerprint_text());
  }
};

namespace detail {

inline IdentityReport finish_report(IdentityId id, double lhs, double rhs,
                                    double budget, IdentityConfig cfg,
                                    std::string annotation = {},
                                    bool converged = true) {
  IdentityReport rep;
  rep.id = id;
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.abs_gap = std::abs(lhs - rhs);
  rep.error_budget = budget;
  rep.slack = cfg.slack_mult * cfg.tol;
  rep.passed = rep.abs_gap <= rep.error_budget + rep.slack;
  rep.converged = converged;
  rep.config = std::move(cfg);
  rep.annotation = std::move(annotation);
  return rep;
}

inline IdentityConfig base_config(const ChannelModel& ch,
                                  const DiscretePrior& p, double gamma,
                                  double tol) {
  IdentityConfig cfg;
  cfg.channel = ch.name();
  cfg.atoms = p.atoms;
  cfg.weights_p = p.weights;
  cfg.gamma = gamma;
  cfg.tol = tol;
  return cfg;
}

}  // namespace detail

/// Theorem-style I-MMLE check: dI/dgamma against the matched expected Levy
/// loss, both sides from independent numerical paths.
inline IdentityReport check_immle(const ChannelModel& ch,
                                  const DiscretePrior& prior, double gamma,
                                  double tol, const LossMutation& mut = {},
                                  double lhs_scale = 1.0) {
  IdentityConfig cfg = detail::base_config(ch, prior, gamma, tol);
  cfg.mutation = mut;
  std::string note;
  const RegularityReport reg = regularity_check(ch, prior);
  if (!reg.finite) {
    note = "input regularity unverifiable";
  }
  const QuadResult lhs = mi_derivative(ch, prior, gamma, tol / 2.0);
  const QuadResult rhs =
      expected_levy_loss(ch, prior, prior, gamma, tol / 2.0, mut);
  if (lhs_scale != 1.0) {
    cfg.extra = "lhs_scale=" + std::to_string(lhs_scale);
  }
  return detail::finish_report(IdentityId::kImmle, lhs_scale * lhs.value,
                               rhs.value,
                               lhs.error_estimate + rhs.error_estimate,
                               std::move(cfg), std::move(note),
                               lhs.converged && rhs.converged);
}

/// Theorem-style D-MLE check: D(P_{Y_gamma} || Q_{Y_gamma}) against the SNR
/// integral of the cost of mismatch over [0, gamma].
inline IdentityReport check_dmle(const ChannelModel& ch,
                                 const DiscretePrior& p,
                                 const DiscretePrior& q, double gamma,
                                 double tol, const LossMutation& mut = {}) {
  IdentityConfig cfg = detail::base_config(ch, p, gamma, tol);
  cfg.weights_q = q.weights;
  cfg.mutation = mut;
  // Theorem condition 2 involves E_Q[(dP_Y/dQ_Y) * ...]; only the direct
  // integral form is verified numerically.
  std::string note = "finiteness of the mismatch integral verified directly";

  const QuadResult lhs = output_relative_entropy(ch, p, q, gamma, tol / 2.0);
  const double inner_tol = tol / (8.0 * std::max(1.0, gamma));
  auto h = [&](double alpha) {
    return mismatch_excess(ch, p, q, alpha == 0.0 ? 1e-12 : alpha, inner_tol,
                           mut)
        .value;
  };
  QuadResult rhs = integrate_snr(h, 0.0, gamma, tol / 4.0);
  rhs.error_estimate += gamma * inner_tol;
  return detail::finish_report(IdentityId::kDmle, lhs.value, rhs.value,
                               lhs.error_estimate + rhs.error_estimate,
                               std::move(cfg), std::move(note),
                               lhs.converged && rhs.converged);
}

/// Entropy representation: the SNR integral of the matched loss equals
/// -sum p ln p.
inline IdentityReport check_entropy(const ChannelModel& ch,
                                    const DiscretePrior& prior, double tol) {
  IdentityConfig cfg = detail::base_config(ch, prior, 0.0, tol);
  const QuadResult lhs = entropy_via_loss_integral(ch, prior, tol / 2.0);
  const double rhs = prior.entropy();
  return detail::finish_report(IdentityId::kEntropy, lhs.value, rhs,
                               lhs.error_estimate, std::move(cfg), {},
                               lhs.converged);
}

/// Relative entropy representation: the SNR integral of the cost of mismatch
/// over [0, inf) equals sum p ln(p/q).
inline IdentityReport check_relent(const ChannelModel& ch,
                                   const DiscretePrior& p,
                                   const DiscretePrior& q, double tol) {
  IdentityConfig cfg = detail::base_config(ch, p, 0.0, tol);
  cfg.weights_q = q.weights;
  const QuadResult lhs = relative_entropy_via_loss_integral(ch, p, q, tol / 2.0);
  const double rhs = kl_divergence(p, q);
  return detail::finish_report(IdentityId::kRelent, lhs.value, rhs,
                               lhs.error_estimate, std::move(cfg), {},
                               lhs.converged);
}

/// Bregman collapse (a): the nu-integral Levy loss at the point-mass-optimal
/// reconstruction for x2 equals the closed-form Bregman divergence
/// d_phi(x1, x2).
inline IdentityReport check_bregman_collapse(const ChannelModel& ch, double x1,
                                             double x2, double tol) {
  IdentityConfig cfg;
  cfg.channel = ch.name();
  cfg.atoms = {x1, x2};
  cfg.tol = tol;
  cfg.extra = "sub=collapse";
  const double closed_form = representative_loss(ch, x1, x2);
  const QuadResult lhs =
      levy_loss(ch, x1, point_mass_reconstruction(ch, x2), tol / 2.0);
  return detail::finish_report(IdentityId::kBregmanCollapse, lhs.value,
                               closed_form, lhs.error_estimate,
                               std::move(cfg), {}, lhs.converged);
}

/// Bregman collapse (b): the finite-difference SNR derivative of
/// D(P1^gamma || P2^gamma) between point-mass conditionals equals
/// d_phi(x1, x2).
inline IdentityReport check_bregman_snr_deriv(const ChannelModel& ch,
                                              double x1, double x2,
                                              double gamma, double tol) {
  IdentityConfig cfg;
  cfg.channel = ch.name();
  cfg.atoms = {x1, x2};
  cfg.gamma = gamma;
  cfg.tol = tol;
  cfg.extra = "sub=snr_deriv";
  const double closed_form = representative_loss(ch, x1, x2);
  const QuadResult lhs = output_relative_entropy_derivative(
      ch, DiscretePrior::point_mass(x1), DiscretePrior::point_mass(x2), gamma,
      tol / 2.0);
  return detail::finish_report(IdentityId::kBregmanSnrDeriv, lhs.value,
                               closed_form, lhs.error_estimate,
                               std::move(cfg), {}, lhs.converged);
}

/// Both Bregman sub-checks at shared arguments.
inline std::vector<IdentityReport> check_bregman(const ChannelModel& ch,
                                                 double x1, double x2,
                                                 double gamma, double tol) {
  return {check_bregman_collapse(ch, x1, x2, tol),
          check_bregman_snr_deriv(ch, x1, x2, gamma, tol)};
}

/// Amplification invariance of the Gamma(k, aX/k) parametrization: both
/// I(X;Y_a) and D(P_{Y_a} || Q_{Y_a}) must be constant across the a-grid.
inline IdentityReport check_gamma_amp_invariance(
    double k, const DiscretePrior& p, const DiscretePrior& q,
    const std::vector<double>& a_grid, double tol) {
  IdentityConfig cfg;
  cfg.channel = "gamma_amplified";
  cfg.atoms = p.atoms;
  cfg.weights_p = p.weights;
  cfg.weights_q = q.weights;
  cfg.tol = tol;
  {
    std::ostringstream os;
    os.precision(17);
    os << "k=" << k << ";a=";
    for (double a : a_grid) os << a << ',';
    cfg.extra = os.str();
  }
  const double quad_tol = tol * 1e-2;
  double i_min = detail::kInf, i_max = -detail::kInf;
  double d_min = detail::kInf, d_max = -detail::kInf;
  double budget = 0.0;
  bool converged = true;
  for (double a : a_grid) {
    const GammaAmplified model = make_gamma_amplified(k, a);
    const QuadResult mi = mutual_information(model, p, quad_tol);
    const QuadResult dd = output_relative_entropy(model, p, q, quad_tol);
    i_min = std::min(i_min, mi.value);
    i_max = std::max(i_max, mi.value);
    d_min = std::min(d_min, dd.value);
    d_max = std::max(d_max, dd.value);
    budget = std::max(budget, mi.error_estimate + dd.error_estimate);
    converged = converged && mi.converged && dd.converged;
  }
  const double spread = std::max(i_max - i_min, d_max - d_min);
  IdentityReport rep = detail::finish_report(
      IdentityId::kGammaAmpInvariance, spread, 0.0, 2.0 * budget,
      std::move(cfg), "lhs is max-min spread over the a grid", converged);
  // spread must simply stay below tol
  rep.passed = spread <= rep.config.tol;
  return rep;
}

/// Esscher tilt identity on a y grid: the conditional law equals the
/// exponentially tilted no-input law. Reported as max relative error.
inline IdentityReport check_esscher(const ChannelModel& ch, double x,
                                    double gamma,
                                    const std::vector<double>& y_grid,
                                    double tol) {
  IdentityConfig cfg;
  cfg.channel = ch.name();
  cfg.atoms = {x};
  cfg.gamma = gamma;
  cfg.tol = tol;
  const double theta = std::max(ch.link(x), -500.0);  // tilt limit at x = 0
  double worst = 0.0;
  for (double y : y_grid) {
    const double lc = ch.log_cond(x, gamma, y);
    if (lc == -detail::kInf) continue;  // outside conditional support
    const double lt =
        theta * y - gamma * ch.cumulant(theta) + ch.log_base(gamma, y);
    // |log difference| is the relative density error to first order
    worst = std::max(worst, std::abs(lc - lt));
  }
  IdentityReport rep =
      detail::finish_report(IdentityId::kEsscher, worst, 0.0, 0.0, std::move(cfg),
                            "lhs is max |ln f - ln tilt| over the y grid");
  rep.passed = worst <= rep.config.tol;
  return rep;
}

/// Pythagorean decomposition of conditional-mean losses, for both the
/// squared-error and the Poisson form, at a fixed jump size z.
inline IdentityReport check_pythagorean(const ChannelModel& ch,
                                        const DiscretePrior& p,
                                        const DiscretePrior& q, double gamma,
                                        double z, double tol) {
  IdentityConfig cfg = detail::base_config(ch, p, gamma, tol);
  cfg.weights_q = q.weights;
  {
    std::ostringstream os;
    os.precision(17);
    os << "z=" << z;
    cfg.extra = os.str();
  }
  const double quad_tol = tol / 8.0;

  // A = phi'(X) (theta scale), B = e^{phi'(X) z}
  auto theta_of = [&](double x) { return ch.link(x); };
  auto recon_means = [&](double y) {
    const PosteriorResult wp = posterior(ch, p, gamma, y);
    const PosteriorResult wq = posterior(ch, q, gamma, y);
    double ap = 0.0, aq = 0.0, bp = 0.0, bq = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double th = theta_of(p.atoms[j]);
      if (wp.weights[j] > 0.0) {
        ap += wp.weights[j] * th;
        bp += wp.weights[j] * std::exp(th * z);
      }
    }
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double th = theta_of(q.atoms[j]);
      if (wq.weights[j] > 0.0) {
        aq += wq.weights[j] * th;
        bq += wq.weights[j] * std::exp(th * z);
      }
    }
    return std::array<double, 4>{ap, aq, bp, bq};
  };

  // Both sides are joint expectations over (X, Y); the decomposition only
  // closes after the X-average (tower property).
  double budget = 0.0;
  bool converged = true;
  double lhs_g = 0.0, rhs_g = 0.0, lhs_p = 0.0, rhs_p = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = p.atoms[i];
    const double th = theta_of(x);
    const double a = th;
    const double b = std::exp(th * z);
    auto g_lhs_g = [&](double y) {
      const auto m = recon_means(y);
      return gauss_loss(a, m[1]) - gauss_loss(a, m[0]);
    };
    auto g_lhs_p = [&](double y) {
      const auto m = recon_means(y);
      return poisson_loss(b, m[3]) - poisson_loss(b, m[2]);
    };
    auto g_rhs_g = [&](double y) {
      const auto m = recon_means(y);
      return gauss_loss(m[0], m[1]);
    };
    auto g_rhs_p = [&](double y) {
      const auto m = recon_means(y);
      return poisson_loss(m[2], m[3]);
    };
    const DiscretePrior atom = DiscretePrior::point_mass(x);
    for (auto [g_fn, acc] :
         {std::pair<std::function<double(double)>, double*>{g_lhs_g, &lhs_g},
          {g_lhs_p, &lhs_p},
          {g_rhs_g, &rhs_g},
          {g_rhs_p, &rhs_p}}) {
      const QuadResult e =
          expectation_over_output(ch, gamma, atom, g_fn, quad_tol);
      *acc += p.weights[i] * e.value;
      budget += p.weights[i] * e.error_estimate;
      converged = converged && e.converged;
    }
  }
  const double gap = std::max(std::abs(lhs_g - rhs_g),
                              std::abs(lhs_p - rhs_p));
  IdentityReport rep = detail::finish_report(
      IdentityId::kPythagorean, lhs_g + lhs_p, rhs_g + rhs_p, budget,
      std::move(cfg),
      "squared-error and Poisson decompositions checked separately",
      converged);
  rep.abs_gap = gap;
  rep.passed = gap <= budget + rep.slack;
  return rep;
}

/// Fenchel duality kappa(phi'(x)) + phi(x) = x phi'(x) on an input grid,
/// together with phi >= 0 and the no-input normalization.
inline IdentityReport check_fenchel(const ChannelModel& ch,
                                    const std::vector<double>& x_grid,
                                    double tol) {
  IdentityConfig cfg;
  cfg.channel = ch.name();
  cfg.atoms = x_grid;
  cfg.tol = tol;
  double worst = 0.0;
  for (double x : x_grid) {
    const double theta = ch.link(x);
    if (!std::isfinite(theta)) continue;
    const double gap =
        std::abs(ch.cumulant(theta) + ch.dual(x) - x * theta);
    worst = std::max(worst, gap);
    // link bijection
    worst = std::max(worst, std::abs(ch.cumulant_prime(theta) - x) /
                                std::max(1.0, std::abs(x)));
  }
  const double x0 = ch.no_input_point();
  worst = std::max(worst, std::abs(ch.dual(x0)));
  worst = std::max(worst, std::abs(ch.link(x0)));
  IdentityReport rep = detail::finish_report(IdentityId::kFenchel, worst, 0.0,
                                             0.0, std::move(cfg),
                                             "lhs is max duality defect");
  rep.passed = worst <= rep.config.tol;
  return rep;
}

/// Conditional mean gamma*x and variance gamma*kappa''(theta), by output
/// quadrature against the closed forms.
inline IdentityReport check_cond_mean(const ChannelModel& ch, double x,
                                      double gamma, double tol) {
  IdentityConfig cfg;
  cfg.channel = ch.name();
  cfg.atoms = {x};
  cfg.gamma = gamma;
  cfg.tol = tol;
  const double quad_tol = tol / 8.0;
  const DiscretePrior atom = DiscretePrior::point_mass(x);
  const QuadResult norm = expectation_over_output(
      ch, gamma, atom, [](double) { return 1.0; }, quad_tol);
  const QuadResult mean = expectation_over_output(
      ch, gamma, atom, [](double y) { return y; }, quad_tol);
  const double mu = gamma * x;
  const QuadResult var = expectation_over_output(
      ch, gamma, atom, [mu](double y) { return (y - mu) * (y - mu); },
      quad_tol);
  const double theta = ch.link(x);
  const double var_exact =
      std::isfinite(theta) ? gamma * ch.cumulant_second(theta) : 0.0;
  const double gap = std::max({std::abs(norm.value - 1.0),
                               std::abs(mean.value - mu),
                               std::abs(var.value - var_exact)});
  const double budget = norm.error_estimate + mean.error_estimate +
                        var.error_estimate;
  return detail::finish_report(
      IdentityId::kCondMean, gap, 0.0, budget, std::move(cfg),
      "lhs is max defect over normalization/mean/variance",
      norm.converged && mean.converged && var.converged);
}

}  // namespace levychan

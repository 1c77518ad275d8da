#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "levychan/detail/math.hpp"
#include "levychan/quadrature.hpp"

namespace levychan {

enum class OutputKind {
  kContinuousReal,      // density on all of R (Gaussian)
  kContinuousPositive,  // density on (0, inf) (Gamma)
  kCount                // pmf on {0, 1, 2, ...} (Poisson, NB)
};

struct Interval {
  double lo = -detail::kInf;
  double hi = detail::kInf;
  bool lo_closed = false;
  bool hi_closed = false;

  bool contains(double x) const {
    if (x < lo || x > hi) return false;
    if (x == lo && !lo_closed) return false;
    if (x == hi && !hi_closed) return false;
    return true;
  }
  bool interior_contains(double x) const { return x > lo && x < hi; }
};

// Jump measure nu(dz) on R\{0}: absent, a continuous density, a finite atom
// list, or an infinite atom series at z = 1, 2, 3, ...
struct ContinuousJumpDensity {
  double lo = 0.0;  // open support interval
  double hi = detail::kInf;
  std::function<double(double)> density;  // w(z) >= 0
};

struct DiscreteJumpWeights {
  std::vector<double> atoms;    // z_k != 0
  std::vector<double> weights;  // m_k > 0
};

struct JumpSeries {
  std::function<double(long)> weight;  // m_k for atoms z = k = 1, 2, ...
  // sup_k m_{k+1}/m_k, < 1; drives tail bounds for series summation
  double weight_ratio = 0.5;
  // sup_k (k+1) m_{k+1} / (k m_k), used where an extra factor z appears
  double z_weight_ratio = 0.5;
};

struct LevyTriple {
  double drift = 0.0;
  double volatility = 0.0;  // sigma >= 0
  std::variant<std::monostate, ContinuousJumpDensity, DiscreteJumpWeights,
               JumpSeries>
      jumps;

  bool has_jumps() const {
    return !std::holds_alternative<std::monostate>(jumps);
  }
};

/// Numerically checks the Levy-measure integrability condition
/// integral of min(1, z^2) nu(dz) < infinity, to the given tolerance.
inline QuadResult levy_measure_mass(const LevyTriple& triple,
                                    double tol = 1e-10) {
  QuadResult out;
  if (std::holds_alternative<std::monostate>(triple.jumps)) {
    return out;
  }
  if (const auto* c = std::get_if<ContinuousJumpDensity>(&triple.jumps)) {
    auto f = [&](double z) {
      return std::min(1.0, z * z) * c->density(z);
    };
    const double lo = c->lo;
    const double hi = c->hi;
    if (std::isfinite(hi)) {
      out += integrate_interval(f, lo, hi, tol);
    } else {
      const double mid = std::max(lo + 1.0, 1.0);
      out += integrate_interval(f, lo, mid, tol / 2);
      out += integrate_semi_infinite(f, mid, tol / 2);
    }
    return out;
  }
  if (const auto* d = std::get_if<DiscreteJumpWeights>(&triple.jumps)) {
    detail::KahanSum s;
    for (std::size_t k = 0; k < d->atoms.size(); ++k) {
      s.add(std::min(1.0, d->atoms[k] * d->atoms[k]) * d->weights[k]);
    }
    out.value = s.value();
    out.evaluations = static_cast<long>(d->atoms.size());
    return out;
  }
  const auto& s = std::get<JumpSeries>(triple.jumps);
  const double rho = s.weight_ratio;
  double last = 0.0;
  auto term = [&](long k) {
    last = std::min(1.0, static_cast<double>(k) * k) * s.weight(k);
    return last;
  };
  auto tail = [&](long) { return last * rho / (1.0 - rho); };
  out = sum_series(term, tail, tol);
  return out;
}

/// A scalar Levy channel: cumulant kappa on Theta, its Fenchel dual phi on
/// the input domain, the Levy triple, and the conditional output law
/// f_gamma(y|x). Immutable after construction; all members are pure.
class ChannelModel {
 public:
  const std::string& name() const { return name_; }
  const LevyTriple& triple() const { return triple_; }
  const Interval& theta_domain() const { return theta_domain_; }
  const Interval& input_domain() const { return input_domain_; }
  OutputKind output_kind() const { return output_kind_; }

  /// kappa(theta); kappa(0) = 0 by normalization.
  double cumulant(double theta) const {
    if (!theta_domain_.contains(theta)) {
      throw std::domain_error(name_ + ": theta outside natural domain");
    }
    return kappa_(theta);
  }
  double cumulant_prime(double theta) const {
    if (!theta_domain_.contains(theta)) {
      throw std::domain_error(name_ + ": theta outside natural domain");
    }
    return kappa_p_(theta);
  }
  double cumulant_second(double theta) const {
    if (!theta_domain_.contains(theta)) {
      throw std::domain_error(name_ + ": theta outside natural domain");
    }
    return kappa_pp_(theta);
  }

  /// phi(x) >= 0, the Fenchel-Legendre dual of kappa.
  double dual(double x) const {
    check_input(x);
    return phi_(x);
  }

  /// theta = phi'(x). May be -inf at a closed zero-input boundary
  /// (Poisson/NB at x = 0).
  double link(double x) const {
    check_input(x);
    return phi_p_(x);
  }

  /// The no-input point x = kappa'(0), where phi and phi' vanish.
  double no_input_point() const { return kappa_p_(0.0); }

  bool supports_output(double y) const {
    switch (output_kind_) {
      case OutputKind::kContinuousReal:
        return std::isfinite(y);
      case OutputKind::kContinuousPositive:
        return y > 0.0 && std::isfinite(y);
      case OutputKind::kCount:
        return y >= 0.0 && detail::is_integer_valued(y);
    }
    return false;
  }

  /// ln f_gamma(y|x); -inf where the conditional law assigns no mass.
  double log_cond(double x, double gamma, double y) const {
    check_input(x);
    check_gamma(gamma);
    check_output(y);
    return log_cond_(x, gamma, y);
  }
  double cond_law(double x, double gamma, double y) const {
    return std::exp(log_cond(x, gamma, y));
  }

  /// Output law in the absence of input: the conditional law at x = kappa'(0).
  double log_base(double gamma, double y) const {
    check_gamma(gamma);
    check_output(y);
    return log_cond_(no_input_point(), gamma, y);
  }
  double base_law(double gamma, double y) const {
    return std::exp(log_base(gamma, y));
  }

  /// ln P(Y <= y | x) deep in the lower tail of a positive-output law.
  /// Quadrature over (0, inf) needs it when the shape parameter is so small
  /// that the bulk of the output mass sits below the smallest normal double.
  bool has_lower_tail() const { return static_cast<bool>(log_lower_tail_); }
  double log_lower_tail(double x, double gamma, double y) const {
    if (!log_lower_tail_) {
      throw std::logic_error(name_ + ": no lower-tail law available");
    }
    return log_lower_tail_(x, gamma, y);
  }

  // ---- factories ----
  static ChannelModel gaussian();
  static ChannelModel poisson();
  static ChannelModel gamma();
  static ChannelModel negative_binomial();

  struct GenericSpec {
    std::string name = "generic";
    std::function<double(double)> kappa;
    Interval theta_domain;
    LevyTriple triple;
    Interval input_domain;
    OutputKind output_kind = OutputKind::kContinuousReal;
    // optional closed forms; derivatives default to central differences and
    // phi/phi' to numeric inversion of kappa'
    std::function<double(double)> kappa_prime;
    std::function<double(double)> kappa_second;
    // optional base-law log density/pmf (gamma, y); without it the
    // conditional law is unavailable
    std::function<double(double, double)> log_base;
  };
  static ChannelModel generic(GenericSpec spec);

 private:
  ChannelModel() = default;

  void check_input(double x) const {
    if (!input_domain_.contains(x)) {
      throw std::domain_error(name_ + ": input outside domain");
    }
  }
  static void check_gamma(double gamma) {
    if (!(gamma > 0.0)) throw std::domain_error("snr gamma must be > 0");
  }
  void check_output(double y) const {
    if (!supports_output(y)) {
      throw std::domain_error(name_ + ": y outside output support");
    }
  }

  std::string name_;
  LevyTriple triple_;
  Interval theta_domain_;
  Interval input_domain_;
  OutputKind output_kind_ = OutputKind::kContinuousReal;
  std::function<double(double)> kappa_, kappa_p_, kappa_pp_;
  std::function<double(double)> phi_, phi_p_;
  std::function<double(double, double, double)> log_cond_;
  std::function<double(double, double, double)> log_lower_tail_;
};

inline ChannelModel ChannelModel::gaussian() {
  ChannelModel ch;
  ch.name_ = "gaussian";
  ch.triple_.drift = 0.0;
  ch.triple_.volatility = 1.0;
  ch.theta_domain_ = Interval{};
  ch.input_domain_ = Interval{};
  ch.output_kind_ = OutputKind::kContinuousReal;
  ch.kappa_ = [](double t) { return 0.5 * t * t; };
  ch.kappa_p_ = [](double t) { return t; };
  ch.kappa_pp_ = [](double) { return 1.0; };
  ch.phi_ = [](double x) { return 0.5 * x * x; };
  ch.phi_p_ = [](double x) { return x; };
  ch.log_cond_ = [](double x, double g, double y) {
    const double d = y - g * x;
    return -0.5 * std::log(2.0 * std::numbers::pi * g) - d * d / (2.0 * g);
  };
  return ch;
}

inline ChannelModel ChannelModel::poisson() {
  ChannelModel ch;
  ch.name_ = "poisson";
  ch.triple_.drift = 1.0;
  ch.triple_.volatility = 0.0;
  ch.triple_.jumps = DiscreteJumpWeights{{1.0}, {1.0}};
  ch.theta_domain_ = Interval{};
  ch.input_domain_ = Interval{0.0, detail::kInf, true, false};
  ch.output_kind_ = OutputKind::kCount;
  ch.kappa_ = [](double t) { return std::expm1(t); };
  ch.kappa_p_ = [](double t) { return std::exp(t); };
  ch.kappa_pp_ = [](double t) { return std::exp(t); };
  ch.phi_ = [](double x) { return detail::xlogx(x) - x + 1.0; };
  ch.phi_p_ = [](double x) { return std::log(x); };  // -inf at x = 0
  ch.log_cond_ = [](double x, double g, double y) {
    const double mean = g * x;
    if (mean == 0.0) return y == 0.0 ? 0.0 : -detail::kInf;
    return y * std::log(mean) - mean - std::lgamma(y + 1.0);
  };
  return ch;
}

inline ChannelModel ChannelModel::gamma() {
  ChannelModel ch;
  ch.name_ = "gamma";
  ch.triple_.drift = 1.0 - std::exp(-1.0);
  ch.triple_.volatility = 0.0;
  ch.triple_.jumps = ContinuousJumpDensity{
      0.0, detail::kInf, [](double z) { return std::exp(-z) / z; }};
  ch.theta_domain_ = Interval{-detail::kInf, 1.0, false, false};
  ch.input_domain_ = Interval{0.0, detail::kInf, false, false};
  ch.output_kind_ = OutputKind::kContinuousPositive;
  ch.kappa_ = [](double t) { return -std::log1p(-t); };
  ch.kappa_p_ = [](double t) { return 1.0 / (1.0 - t); };
  ch.kappa_pp_ = [](double t) { return 1.0 / ((1.0 - t) * (1.0 - t)); };
  ch.phi_ = [](double x) { return x - 1.0 - std::log(x); };
  ch.phi_p_ = [](double x) { return 1.0 - 1.0 / x; };
  ch.log_cond_ = [](double x, double g, double y) {
    // shape g, scale x
    return (g - 1.0) * std::log(y) - y / x - g * std::log(x) - std::lgamma(g);
  };
  ch.log_lower_tail_ = [](double x, double g, double y) {
    return detail::log_lower_gamma_reg(g, std::log(y) - std::log(x));
  };
  return ch;
}

inline ChannelModel ChannelModel::negative_binomial() {
  ChannelModel ch;
  ch.name_ = "negative_binomial";
  ch.triple_.drift = 0.0;
  ch.triple_.volatility = 0.0;
  ch.triple_.jumps = JumpSeries{
      [](long k) { return std::pow(0.5, static_cast<double>(k)) / k; }, 0.5,
      0.5};
  ch.theta_domain_ = Interval{-detail::kInf, std::numbers::ln2, false, false};
  ch.input_domain_ = Interval{0.0, detail::kInf, true, false};
  ch.output_kind_ = OutputKind::kCount;
  ch.kappa_ = [](double t) {
    // ln( (1/2) / (1 - e^t/2) )
    return -std::numbers::ln2 - std::log1p(-0.5 * std::exp(t));
  };
  ch.kappa_p_ = [](double t) {
    const double q = 0.5 * std::exp(t);
    return q / (1.0 - q);
  };
  ch.kappa_pp_ = [](double t) {
    const double q = 0.5 * std::exp(t);
    return q / ((1.0 - q) * (1.0 - q));
  };
  ch.phi_ = [](double x) {
    return detail::xlogx(x) - detail::xlogx(1.0 + x) + x * std::numbers::ln2 +
           std::numbers::ln2;
  };
  ch.phi_p_ = [](double x) {
    if (x == 0.0) return -detail::kInf;
    return std::log(2.0 * x / (1.0 + x));
  };
  ch.log_cond_ = [](double x, double g, double y) {
    // NB(g, p) with p = x/(1+x); Gamma-function form, valid for real g > 0
    if (x == 0.0) return y == 0.0 ? 0.0 : -detail::kInf;
    const double lp = std::log(x) - std::log1p(x);
    const double l1mp = -std::log1p(x);
    return std::lgamma(y + g) - std::lgamma(y + 1.0) - std::lgamma(g) +
           g * l1mp + y * lp;
  };
  return ch;
}

inline ChannelModel ChannelModel::generic(GenericSpec spec) {
  if (!spec.kappa) throw std::invalid_argument("generic channel needs kappa");
  ChannelModel ch;
  ch.name_ = std::move(spec.name);
  ch.triple_ = std::move(spec.triple);
  ch.theta_domain_ = spec.theta_domain;
  ch.input_domain_ = spec.input_domain;
  ch.output_kind_ = spec.output_kind;
  ch.kappa_ = spec.kappa;

  auto kappa = spec.kappa;
  const Interval th = spec.theta_domain;
  auto fd_step = [th](double t) {
    double h = 1e-6 * std::max(1.0, std::abs(t));
    if (std::isfinite(th.hi)) h = std::min(h, 0.5 * (th.hi - t));
    if (std::isfinite(th.lo)) h = std::min(h, 0.5 * (t - th.lo));
    return h;
  };
  std::function<double(double)> kp = spec.kappa_prime;
  if (!kp) {
    kp = [kappa, fd_step](double t) {
      const double h = fd_step(t);
      return (kappa(t + h) - kappa(t - h)) / (2.0 * h);
    };
  }
  std::function<double(double)> kpp = spec.kappa_second;
  if (!kpp) {
    kpp = [kappa, fd_step](double t) {
      const double h = fd_step(t);
      return (kappa(t + h) - 2.0 * kappa(t) + kappa(t - h)) / (h * h);
    };
  }
  ch.kappa_p_ = kp;
  ch.kappa_pp_ = kpp;

  // phi'(x) inverts the monotone map kappa': bracket expansion inside Theta,
  // then bisection refined by Newton to ~1e-12 relative.
  auto link = [kp, th](double x) {
    double lo = 0.0, hi = 0.0;
    auto clamp_in = [&th](double t) {
      if (std::isfinite(th.hi) && t >= th.hi) t = th.hi - 1e-14 * std::max(1.0, std::abs(th.hi));
      if (std::isfinite(th.lo) && t <= th.lo) t = th.lo + 1e-14 * std::max(1.0, std::abs(th.lo));
      return t;
    };
    // expand a bracket around theta = 0
    double step = 0.5;
    lo = 0.0;
    hi = 0.0;
    if (kp(0.0) < x) {
      while (true) {
        double cand = std::isfinite(th.hi) ? th.hi - (th.hi - hi) * 0.5
                                           : hi + step;
        cand = clamp_in(cand);
        if (cand <= hi) break;
        hi = cand;
        step *= 2.0;
        if (kp(hi) >= x) break;
      }
      if (kp(hi) < x) throw std::domain_error("generic link: x unreachable");
    } else {
      while (true) {
        double cand = std::isfinite(th.lo) ? th.lo + (lo - th.lo) * 0.5
                                           : lo - step;
        cand = clamp_in(cand);
        if (cand >= lo) break;
        lo = cand;
        step *= 2.0;
        if (kp(lo) <= x) break;
      }
      if (kp(lo) > x) throw std::domain_error("generic link: x unreachable");
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double r = kp(t) - x;
      if (r > 0.0) hi = t; else lo = t;
      const double width = hi - lo;
      if (width <= 1e-13 * std::max(1.0, std::abs(t))) break;
      t = 0.5 * (lo + hi);
    }
    return t;
  };
  ch.phi_p_ = link;
  ch.phi_ = [link, kappa](double x) {
    const double t = link(x);
    return t * x - kappa(t);
  };

  if (spec.log_base) {
    auto log_base = spec.log_base;
    auto kph = kp;
    ch.log_cond_ = [log_base, link, kappa, kph](double x, double g, double y) {
      const double theta = link(x);
      return theta * y - g * kappa(theta) + log_base(g, y);
    };
  } else {
    ch.log_cond_ = [](double, double, double) -> double {
      throw std::logic_error(
          "generic channel: conditional law unavailable without a base law");
    };
  }
  return ch;
}

// Conditional law Y|X ~ Gamma(k, aX/k): the amplification parametrization of
// the Gamma model. Not a Levy channel in the SNR parameter; used only by the
// invariance check.
class GammaAmplified {
 public:
  GammaAmplified(double shape_k, double amp_a) : k_(shape_k), a_(amp_a) {
    if (!(shape_k > 0.0) || !(amp_a > 0.0)) {
      throw std::domain_error("gamma_amplified: k and a must be > 0");
    }
  }
  double shape() const { return k_; }
  double amplification() const { return a_; }
  double mean(double x) const { return a_ * x; }
  double log_cond(double x, double y) const {
    if (!(x > 0.0)) throw std::domain_error("gamma_amplified: x must be > 0");
    const double scale = a_ * x / k_;
    return (k_ - 1.0) * std::log(y) - y / scale - k_ * std::log(scale) -
           std::lgamma(k_);
  }
  double cond_law(double x, double y) const { return std::exp(log_cond(x, y)); }

 private:
  double k_;
  double a_;
};

inline GammaAmplified make_gamma_amplified(double k, double a) {
  return GammaAmplified(k, a);
}

}  // namespace levychan

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "levychan/channel.hpp"
#include "levychan/detail/math.hpp"
#include "levychan/loss.hpp"
#include "levychan/posterior.hpp"
#include "levychan/prior.hpp"

namespace levychan::mc {

// The generator is pinned by contract, not left to the standard library:
// xoshiro256++ state seeded through SplitMix64, with one independently
// derived stream per (atom, replicate) task so estimates are reproducible
// bit-for-bit and merge associatively.
inline constexpr const char* kGeneratorName = "xoshiro256++/splitmix64";

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = detail::splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  // uniform on (0, 1]
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }
  // uniform on [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Box-Muller (cosine branch only, rejection-free)
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  long poisson(double lambda) {
    if (!(lambda >= 0.0)) throw std::domain_error("poisson: lambda < 0");
    if (lambda == 0.0) return 0;
    if (lambda < 30.0) {
      // product-of-uniforms inversion
      const double limit = std::exp(-lambda);
      double prod = 1.0;
      long k = -1;
      do {
        prod *= uniform_pos();
        ++k;
      } while (prod > limit);
      return k;
    }
    // PTRS transformed rejection (Hoermann)
    const double b = 0.931 + 2.53 * std::sqrt(lambda);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_lambda = std::log(lambda);
    while (true) {
      const double u = uniform() - 0.5;
      const double v = uniform_pos();
      const double us = 0.5 - std::abs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          kf * log_lambda - lambda - std::lgamma(kf + 1.0)) {
        return static_cast<long>(kf);
      }
    }
  }

  // Marsaglia-Tsang, valid for any shape > 0 via the boost for shape < 1
  double gamma_shape(double shape) {
    if (!(shape > 0.0)) throw std::domain_error("gamma: shape <= 0");
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma_shape(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
        return d * v;
      }
    }
  }
  double gamma(double shape, double scale) {
    return gamma_shape(shape) * scale;
  }

  // NB(r, x/(1+x)) as a Gamma-Poisson mixture: Lambda ~ Gamma(r, scale x)
  long negative_binomial(double r, double x) {
    if (x == 0.0) return 0;
    return poisson(gamma(r, x));
  }

 private:
  std::uint64_t s_[4];
};

/// Stream seed for task (atom index, replicate index).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t atom,
                                 std::uint64_t replicate) {
  std::uint64_t sm = seed;
  std::uint64_t h = detail::splitmix64(sm);
  sm = h ^ (0xA0761D6478BD642Full * (atom + 1));
  h = detail::splitmix64(sm);
  sm = h ^ (0xE7037ED1A0B428DBull * (replicate + 1));
  return detail::splitmix64(sm);
}

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long n = 0;
  std::uint64_t seed = 0;
  std::string generator = kGeneratorName;
};

/// One channel-output draw from f_gamma(.|x).
inline double draw_output(const ChannelModel& ch, Rng& rng, double x,
                          double gamma) {
  if (ch.name() == "gaussian") {
    return gamma * x + std::sqrt(gamma) * rng.normal();
  }
  if (ch.name() == "poisson") {
    return static_cast<double>(rng.poisson(gamma * x));
  }
  if (ch.name() == "gamma") {
    return rng.gamma(gamma, x);
  }
  if (ch.name() == "negative_binomial") {
    return static_cast<double>(rng.negative_binomial(gamma, x));
  }
  throw std::invalid_argument("draw_output: no sampler for " + ch.name());
}

/// n i.i.d. draws from f_gamma(.|x), one stream per replicate.
inline std::vector<double> sample_output(const ChannelModel& ch, double x,
                                         double gamma, std::uint64_t seed,
                                         long n) {
  if (!ch.input_domain().contains(x)) {
    throw std::domain_error("sample_output: x outside input domain");
  }
  if (!(gamma > 0.0)) throw std::domain_error("sample_output: gamma <= 0");
  std::vector<double> ys(static_cast<std::size_t>(n));
  for (long r = 0; r < n; ++r) {
    Rng rng(stream_seed(seed, 0, static_cast<std::uint64_t>(r)));
    ys[static_cast<std::size_t>(r)] = draw_output(ch, rng, x, gamma);
  }
  return ys;
}

namespace detail {

// Stratified-by-atom Monte Carlo: n_i = n p_i draws (largest remainder),
// stream (i, r) for replicate r of atom i. The aggregate standard error is
// sqrt(sum_i p_i^2 s_i^2 / n_i).
template <class PerSample>
McEstimate stratified(const DiscretePrior& prior, std::uint64_t seed, long n,
                      const PerSample& value_of) {
  std::vector<long> counts(prior.size());
  std::vector<double> frac(prior.size());
  long assigned = 0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const double exact = prior.weights[i] * static_cast<double>(n);
    counts[i] = static_cast<long>(std::floor(exact));
    frac[i] = exact - std::floor(exact);
    assigned += counts[i];
  }
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < prior.size(); ++i) {
      if (frac[i] > frac[best]) best = i;
    }
    ++counts[best];
    frac[best] = -1.0;
    ++assigned;
  }

  McEstimate est;
  est.seed = seed;
  est.n = n;
  double var_total = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (counts[i] == 0) counts[i] = 1;
    levychan::detail::KahanSum sum, sumsq;
    for (long r = 0; r < counts[i]; ++r) {
      Rng rng(stream_seed(seed, i, static_cast<std::uint64_t>(r)));
      const double v = value_of(i, rng);
      sum.add(v);
      sumsq.add(v * v);
    }
    const double ni = static_cast<double>(counts[i]);
    const double mean = sum.value() / ni;
    const double var =
        counts[i] > 1
            ? std::max(0.0, sumsq.value() / ni - mean * mean) * ni / (ni - 1.0)
            : 0.0;
    est.value += prior.weights[i] * mean;
    var_total += prior.weights[i] * prior.weights[i] * var / ni;
  }
  est.std_error = std::sqrt(var_total);
  return est;
}

}  // namespace detail

/// MC estimate of E_P[ l_L(X, X^Q_gamma) ]: X ~ P, Y ~ f_gamma(.|X), average
/// of the loss at the Q-decoder reconstruction.
inline McEstimate mc_expected_loss(const ChannelModel& ch,
                                   const DiscretePrior& p,
                                   const DiscretePrior& q, double gamma,
                                   std::uint64_t seed, long n,
                                   double loss_tol = 1e-8) {
  return detail::stratified(p, seed, n, [&](std::size_t i, Rng& rng) {
    const double x = p.atoms[i];
    const double y = draw_output(ch, rng, x, gamma);
    const Reconstruction recon = optimal_reconstruction(ch, q, gamma, y);
    return levy_loss(ch, x, recon, loss_tol).value;
  });
}

/// MC estimate of I(X;Y_gamma) as the average of ln f(Y|X) - ln f_P(Y).
inline McEstimate mc_mutual_information(const ChannelModel& ch,
                                        const DiscretePrior& prior,
                                        double gamma, std::uint64_t seed,
                                        long n) {
  return detail::stratified(prior, seed, n, [&](std::size_t i, Rng& rng) {
    const double x = prior.atoms[i];
    const double y = draw_output(ch, rng, x, gamma);
    return ch.log_cond(x, gamma, y) -
           levychan::detail::log_mixture(ch, prior, gamma, y);
  });
}

}  // namespace levychan::mc

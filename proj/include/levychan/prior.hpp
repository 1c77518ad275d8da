#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "levychan/detail/math.hpp"
#include "levychan/errors.hpp"

namespace levychan {

/// Finite-support input law {(x_i, p_i)}: atoms sorted and distinct,
/// weights positive and summing to 1 within 1e-12.
struct DiscretePrior {
  std::vector<double> atoms;
  std::vector<double> weights;

  static DiscretePrior make(std::vector<double> xs, std::vector<double> ps) {
    if (xs.empty() || xs.size() != ps.size()) {
      throw std::invalid_argument("prior: atoms/weights size mismatch");
    }
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&xs](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    DiscretePrior p;
    p.atoms.reserve(xs.size());
    p.weights.reserve(xs.size());
    double total = 0.0;
    for (std::size_t i : idx) {
      if (!(ps[i] > 0.0)) {
        throw std::invalid_argument("prior: weights must be positive");
      }
      if (!p.atoms.empty() && !(xs[i] > p.atoms.back())) {
        throw std::invalid_argument("prior: atoms must be distinct");
      }
      p.atoms.push_back(xs[i]);
      p.weights.push_back(ps[i]);
      total += ps[i];
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("prior: weights must sum to 1");
    }
    return p;
  }

  static DiscretePrior point_mass(double x) { return make({x}, {1.0}); }

  std::size_t size() const { return atoms.size(); }

  double entropy() const {
    double h = 0.0;
    for (double p : weights) h -= detail::xlogx(p);
    return h;
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) m += weights[i] * atoms[i];
    return m;
  }

  double variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      v += weights[i] * (atoms[i] - m) * (atoms[i] - m);
    }
    return v;
  }
};

/// Atom-wise KL divergence; requires every P-atom to be a Q-atom.
inline double kl_divergence(const DiscretePrior& p, const DiscretePrior& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto it = std::lower_bound(q.atoms.begin(), q.atoms.end(), p.atoms[i]);
    if (it == q.atoms.end() || *it != p.atoms[i]) {
      throw SupportError("kl_divergence: P atom not in Q support");
    }
    const double qw = q.weights[static_cast<std::size_t>(it - q.atoms.begin())];
    d += p.weights[i] * std::log(p.weights[i] / qw);
  }
  return d;
}

/// True when every P-atom carries Q-mass (P << Q atom-wise).
inline bool absolutely_continuous(const DiscretePrior& p,
                                  const DiscretePrior& q) {
  for (double x : p.atoms) {
    auto it = std::lower_bound(q.atoms.begin(), q.atoms.end(), x);
    if (it == q.atoms.end() || *it != x) return false;
  }
  return true;
}

}  // namespace levychan

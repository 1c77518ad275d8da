#pragma once

#include <algorithm>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "levychan/channel.hpp"
#include "levychan/identities.hpp"
#include "levychan/prior.hpp"

namespace levychan {

inline ChannelModel make_channel(const std::string& name) {
  if (name == "gaussian") return ChannelModel::gaussian();
  if (name == "poisson") return ChannelModel::poisson();
  if (name == "gamma") return ChannelModel::gamma();
  if (name == "negative_binomial" || name == "nb" ||
      name == "negative-binomial") {
    return ChannelModel::negative_binomial();
  }
  throw std::invalid_argument("unknown channel: " + name);
}

/// Default two-atom prior used throughout the battery: {-1, 1} for the
/// Gaussian channel, {1, 2} elsewhere, equiprobable.
inline DiscretePrior default_prior(const ChannelModel& ch) {
  if (ch.name() == "gaussian") return DiscretePrior::make({-1.0, 1.0}, {0.5, 0.5});
  return DiscretePrior::make({1.0, 2.0}, {0.5, 0.5});
}

struct SuiteConfig {
  std::vector<std::string> channels = {"gaussian", "poisson", "gamma",
                                       "negative_binomial"};
  // empty selection = everything
  std::vector<IdentityId> identities;
  std::vector<double> immle_gammas = {0.5, 1.0, 2.0};
  std::vector<double> dmle_gammas = {0.5, 2.0};
  double slack_mult = 10.0;
  LossMutation mutation;
  double lhs_scale = 1.0;
  int jobs = 1;

  bool selected(IdentityId id) const {
    if (identities.empty()) return true;
    return std::find(identities.begin(), identities.end(), id) !=
           identities.end();
  }
};

/// Runs the configured identity battery. Items are independent and may run
/// concurrently; reports are sorted by (identity, config fingerprint) so the
/// output is order-independent.
inline std::vector<IdentityReport> run_suite(const SuiteConfig& cfg) {
  std::vector<std::function<std::vector<IdentityReport>()>> items;

  for (const std::string& name : cfg.channels) {
    const ChannelModel ch = make_channel(name);
    const DiscretePrior prior = default_prior(ch);
    const bool cheap_loss = !std::holds_alternative<ContinuousJumpDensity>(
        ch.triple().jumps);
    // 1e-5 everywhere keeps the pass bar (budget + 10 tol) tight enough to
    // catch a 1% systematic perturbation of either side
    const double immle_tol = 1e-5;

    if (cfg.selected(IdentityId::kImmle)) {
      for (double g : cfg.immle_gammas) {
        items.push_back([ch, prior, g, immle_tol, cfg] {
          return std::vector<IdentityReport>{check_immle(
              ch, prior, g, immle_tol, cfg.mutation, cfg.lhs_scale)};
        });
      }
    }
    if (cfg.selected(IdentityId::kDmle)) {
      const DiscretePrior q =
          DiscretePrior::make(prior.atoms, {0.8, 0.2});
      for (double g : cfg.dmle_gammas) {
        items.push_back([ch, prior, q, g, cfg] {
          return std::vector<IdentityReport>{
              check_dmle(ch, prior, q, g, 1e-4, cfg.mutation)};
        });
      }
    }
    if (cfg.selected(IdentityId::kEntropy) &&
        (name == "gaussian" || name == "poisson")) {
      items.push_back([ch, prior] {
        return std::vector<IdentityReport>{check_entropy(ch, prior, 5e-4)};
      });
      if (name == "poisson") {
        // zero input explicitly exercised
        const DiscretePrior zp = DiscretePrior::make({0.0, 3.0}, {0.5, 0.5});
        items.push_back([ch, zp] {
          return std::vector<IdentityReport>{check_entropy(ch, zp, 5e-4)};
        });
      }
    }
    if (cfg.selected(IdentityId::kRelent) &&
        (name == "poisson" || name == "gamma")) {
      const DiscretePrior p = DiscretePrior::make({1.0, 2.0}, {0.5, 0.5});
      const DiscretePrior q = DiscretePrior::make({1.0, 2.0}, {0.9, 0.1});
      items.push_back([ch, p, q] {
        return std::vector<IdentityReport>{check_relent(ch, p, q, 5e-4)};
      });
    }
    if (cfg.selected(IdentityId::kBregmanCollapse) ||
        cfg.selected(IdentityId::kBregmanSnrDeriv)) {
      const double collapse_tol =
          cheap_loss && name != "negative_binomial" ? 1e-11 : 1e-7;
      double x1 = 2.0, x2 = 1.0;
      if (name == "gaussian") { x1 = -1.0; x2 = 1.0; }
      if (name == "negative_binomial") { x1 = 1.0; x2 = 2.0; }
      if (cfg.selected(IdentityId::kBregmanCollapse)) {
        items.push_back([ch, x1, x2, collapse_tol] {
          return std::vector<IdentityReport>{
              check_bregman_collapse(ch, x1, x2, collapse_tol)};
        });
      }
      if (cfg.selected(IdentityId::kBregmanSnrDeriv)) {
        // the finite-difference side carries FD noise on top of quadrature
        items.push_back([ch, x1, x2] {
          return std::vector<IdentityReport>{
              check_bregman_snr_deriv(ch, x1, x2, 1.0, 1e-5)};
        });
      }
    }
    if (cfg.selected(IdentityId::kEsscher)) {
      std::vector<std::pair<double, double>> pts;  // (x, gamma)
      if (name == "gaussian") pts = {{1.0, 2.0}, {-0.5, 1.0}};
      if (name == "poisson") pts = {{0.0, 1.0}, {2.0, 1.0}};
      if (name == "gamma") pts = {{2.0, 0.5}, {1.5, 2.0}};
      if (name == "negative_binomial") pts = {{1.0, 2.0}, {0.0, 1.0}};
      for (auto [x, g] : pts) {
        std::vector<double> ys;
        if (ch.output_kind() == OutputKind::kCount) {
          for (int y = 0; y <= 20; ++y) ys.push_back(y);
        } else if (ch.output_kind() == OutputKind::kContinuousPositive) {
          for (int j = 1; j <= 20; ++j) ys.push_back(0.25 * j);
        } else {
          for (int j = -10; j <= 10; ++j) ys.push_back(0.5 * j);
        }
        items.push_back([ch, x, g, ys] {
          return std::vector<IdentityReport>{
              check_esscher(ch, x, g, ys, 1e-10)};
        });
      }
    }
    if (cfg.selected(IdentityId::kPythagorean)) {
      const DiscretePrior q = DiscretePrior::make(prior.atoms, {0.7, 0.3});
      items.push_back([ch, prior, q] {
        return std::vector<IdentityReport>{
            check_pythagorean(ch, prior, q, 1.0, 1.0, 1e-5)};
      });
    }
    if (cfg.selected(IdentityId::kFenchel)) {
      std::vector<double> xs;
      if (name == "gaussian") {
        xs = {-3.0, -1.0, -0.25, 0.0, 0.5, 1.0, 2.5};
      } else {
        xs = {0.2, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0};
      }
      items.push_back([ch, xs] {
        return std::vector<IdentityReport>{check_fenchel(ch, xs, 1e-12)};
      });
    }
    if (cfg.selected(IdentityId::kCondMean)) {
      const double x = name == "gaussian" ? 1.5 : 2.0;
      for (double g : {0.5, 2.0}) {
        items.push_back([ch, x, g] {
          return std::vector<IdentityReport>{check_cond_mean(ch, x, g, 1e-6)};
        });
      }
    }
  }

  if (cfg.selected(IdentityId::kGammaAmpInvariance)) {
    const DiscretePrior p = DiscretePrior::make({1.0, 2.0}, {0.5, 0.5});
    const DiscretePrior q = DiscretePrior::make({1.0, 2.0}, {0.9, 0.1});
    const std::vector<double> a_grid = {0.5, 1.0, 2.0, 4.0};
    for (double k : {1.0, 2.0}) {
      items.push_back([k, p, q, a_grid] {
        return std::vector<IdentityReport>{
            check_gamma_amp_invariance(k, p, q, a_grid, 1e-6)};
      });
    }
  }

  std::vector<IdentityReport> reports;
  std::mutex mu;
  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    for (auto& item : items) {
      auto rs = item();
      reports.insert(reports.end(), rs.begin(), rs.end());
    }
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex next_mu;
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        while (true) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lk(next_mu);
            if (next >= items.size()) return;
            i = next++;
          }
          auto rs = items[i]();
          std::lock_guard<std::mutex> lk(mu);
          reports.insert(reports.end(), rs.begin(), rs.end());
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  for (IdentityReport& r : reports) {
    r.config.slack_mult = cfg.slack_mult;
    r.slack = cfg.slack_mult * r.config.tol;
    if (r.id != IdentityId::kEsscher && r.id != IdentityId::kFenchel &&
        r.id != IdentityId::kGammaAmpInvariance) {
      r.passed = r.abs_gap <= r.error_budget + r.slack;
    }
  }
  std::sort(reports.begin(), reports.end(),
            [](const IdentityReport& a, const IdentityReport& b) {
              const std::string an = to_string(a.id), bn = to_string(b.id);
              if (an != bn) return an < bn;
              return a.fingerprint() < b.fingerprint();
            });
  return reports;
}

}  // namespace levychan

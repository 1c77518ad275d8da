#include <chrono>
#include <cstdio>
#include "levychan/levychan.hpp"
using namespace levychan;

int main() {
  auto tick = [] { return std::chrono::steady_clock::now(); };
  auto secs = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };

  const auto gauss = ChannelModel::gaussian();
  const auto pois = ChannelModel::poisson();
  const auto gam = ChannelModel::gamma();
  const auto nb = ChannelModel::negative_binomial();

  // D-MLE: D(P_Y||Q_Y) vs integral of excess
  for (const auto* ch : {&gauss, &pois, &gam, &nb}) {
    const DiscretePrior p = default_prior(*ch);
    const DiscretePrior q = DiscretePrior::make(p.atoms, {0.8, 0.2});
    for (double g : {0.5, 2.0}) {
      auto t0 = tick();
      auto rep = check_dmle(*ch, p, q, g, 1e-4);
      std::printf("DMLE  %-18s g=%.1f lhs=%.8f rhs=%.8f gap=%.2e budget=%.2e pass=%d (%.2fs)\n",
                  ch->name().c_str(), g, rep.lhs, rep.rhs, rep.abs_gap,
                  rep.error_budget, rep.passed, secs(t0, tick()));
    }
  }

  // entropy representation
  {
    auto t0 = tick();
    auto r1 = check_entropy(gauss, default_prior(gauss), 5e-4);
    std::printf("ENT   gaussian  lhs=%.8f want=%.8f gap=%.2e pass=%d (%.2fs)\n",
                r1.lhs, r1.rhs, r1.abs_gap, r1.passed, secs(t0, tick()));
    t0 = tick();
    auto r2 = check_entropy(pois, default_prior(pois), 5e-4);
    std::printf("ENT   poisson12 lhs=%.8f want=%.8f gap=%.2e pass=%d (%.2fs)\n",
                r2.lhs, r2.rhs, r2.abs_gap, r2.passed, secs(t0, tick()));
    t0 = tick();
    auto r3 = check_entropy(pois, DiscretePrior::make({0.0, 3.0}, {0.5, 0.5}), 5e-4);
    std::printf("ENT   poisson03 lhs=%.8f want=%.8f gap=%.2e pass=%d (%.2fs)\n",
                r3.lhs, r3.rhs, r3.abs_gap, r3.passed, secs(t0, tick()));
  }

  // relative entropy representation (Poisson + Gamma per criterion 4)
  for (const auto* ch : {&pois, &gam}) {
    const DiscretePrior p = DiscretePrior::make({1.0, 2.0}, {0.5, 0.5});
    const DiscretePrior q = DiscretePrior::make({1.0, 2.0}, {0.9, 0.1});
    auto t0 = tick();
    auto rep = check_relent(*ch, p, q, 5e-4);
    std::printf("RELENT %-17s lhs=%.8f want=%.8f gap=%.2e pass=%d (%.2fs)\n",
                ch->name().c_str(), rep.lhs, rep.rhs, rep.abs_gap, rep.passed,
                secs(t0, tick()));
  }

  // amplification invariance
  for (double k : {1.0, 2.0}) {
    const DiscretePrior p = DiscretePrior::make({1.0, 2.0}, {0.5, 0.5});
    const DiscretePrior q = DiscretePrior::make({1.0, 2.0}, {0.9, 0.1});
    auto t0 = tick();
    auto rep = check_gamma_amp_invariance(k, p, q, {0.5, 1.0, 2.0, 4.0}, 1e-6);
    std::printf("AMPINV k=%.0f spread=%.3e pass=%d (%.2fs)\n", k, rep.lhs,
                rep.passed, secs(t0, tick()));
  }

  // bregman snr-derivative + esscher + pythagorean + cond-mean quick look
  for (const auto* ch : {&gauss, &pois, &gam, &nb}) {
    double x1 = 2.0, x2 = 1.0;
    if (ch->name() == "gaussian") { x1 = -1.0; x2 = 1.0; }
    if (ch->name() == "negative_binomial") { x1 = 1.0; x2 = 2.0; }
    auto t0 = tick();
    auto rep = check_bregman_snr_deriv(*ch, x1, x2, 1.0, 1e-5);
    std::printf("BSNRD %-18s lhs=%.10f rhs=%.10f gap=%.2e pass=%d (%.2fs)\n",
                ch->name().c_str(), rep.lhs, rep.rhs, rep.abs_gap, rep.passed,
                secs(t0, tick()));
  }
  for (const auto* ch : {&gauss, &pois, &gam, &nb}) {
    const DiscretePrior p = default_prior(*ch);
    const DiscretePrior q = DiscretePrior::make(p.atoms, {0.7, 0.3});
    auto rep = check_pythagorean(*ch, p, q, 1.0, 1.0, 1e-5);
    std::printf("PYTH  %-18s worst=%.3e budget=%.2e pass=%d\n",
                ch->name().c_str(), rep.lhs, rep.error_budget, rep.passed);
  }
  return 0;
}

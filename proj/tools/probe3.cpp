#include <chrono>
#include <cstdio>
#include "levychan/levychan.hpp"
using namespace levychan;

int main() {
  const auto gauss = ChannelModel::gaussian();
  const auto pois = ChannelModel::poisson();
  const auto gam = ChannelModel::gamma();
  const auto nb = ChannelModel::negative_binomial();

  // MC vs quadrature at gamma = 1, n = 1e5
  for (const auto* ch : {&gauss, &pois, &gam, &nb}) {
    const DiscretePrior prior = default_prior(*ch);
    auto t0 = std::chrono::steady_clock::now();
    auto mcl = mc::mc_expected_loss(*ch, prior, prior, 1.0, 12345, 100000);
    auto ql = expected_levy_loss(*ch, prior, prior, 1.0, 1e-7);
    auto mci = mc::mc_mutual_information(*ch, prior, 1.0, 54321, 100000);
    auto qi = mutual_information(*ch, prior, 1.0, 1e-9);
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("MC %-18s loss mc=%.6f+-%.6f quad=%.6f z=%.2f | mi mc=%.6f+-%.6f quad=%.6f z=%.2f (%.2fs)\n",
                ch->name().c_str(), mcl.value, mcl.std_error, ql.value,
                (mcl.value - ql.value) / mcl.std_error, mci.value,
                mci.std_error, qi.value, (mci.value - qi.value) / mci.std_error, dt);
  }

  // sample moments
  for (const auto* ch : {&gauss, &pois, &gam, &nb}) {
    const double x = ch->name() == "gaussian" ? 1.5 : 2.0;
    auto ys = mc::sample_output(*ch, x, 2.0, 777, 100000);
    double m = 0, v = 0;
    for (double y : ys) m += y;
    m /= ys.size();
    for (double y : ys) v += (y - m) * (y - m);
    v /= (ys.size() - 1);
    const double th = ch->link(x);
    std::printf("MOM %-18s mean=%.4f want %.4f | var=%.4f want %.4f\n",
                ch->name().c_str(), m, 2.0 * x, v, 2.0 * ch->cumulant_second(th));
  }

  // esscher
  for (const auto* ch : {&gauss, &pois, &gam, &nb}) {
    std::vector<double> ys;
    if (ch->output_kind() == OutputKind::kCount) { for (int y = 0; y <= 20; ++y) ys.push_back(y); }
    else if (ch->output_kind() == OutputKind::kContinuousPositive) { for (int j = 1; j <= 20; ++j) ys.push_back(0.25 * j); }
    else { for (int j = -10; j <= 10; ++j) ys.push_back(0.5 * j); }
    const double x = ch->name() == "gaussian" ? 1.0 : 2.0;
    auto rep = check_esscher(*ch, x, 0.5, ys, 1e-10);
    std::printf("ESR %-18s max|dlog|=%.2e pass=%d\n", ch->name().c_str(), rep.lhs, rep.passed);
  }
  // esscher zero-input edge
  {
    auto rep = check_esscher(pois, 0.0, 1.0, {0.0}, 1e-10);
    std::printf("ESR poisson x=0      max|dlog|=%.2e pass=%d\n", rep.lhs, rep.passed);
  }

  // mutation sensitivity
  {
    auto r1 = check_immle(gauss, default_prior(gauss), 1.0, 1e-5, LossMutation{0.0, 1.0});
    std::printf("MUT drop-sigma gaussian: gap=%.3e pass=%d (expect fail)\n", r1.abs_gap, r1.passed);
    auto r2 = check_immle(gam, default_prior(gam), 1.0, 1e-4, LossMutation{1.0, 1.01});
    std::printf("MUT nu*1.01 gamma:       gap=%.3e pass=%d (expect fail)\n", r2.abs_gap, r2.passed);
    auto r3 = check_immle(nb, default_prior(nb), 1.0, 1e-4, LossMutation{1.0, 1.01});
    std::printf("MUT nu*1.01 nb:          gap=%.3e pass=%d (expect fail)\n", r3.abs_gap, r3.passed);
    auto r4 = check_immle(pois, default_prior(pois), 1.0, 1e-5, LossMutation{}, 1.01);
    std::printf("MUT lhs*1.01 poisson:    gap=%.3e pass=%d (expect fail)\n", r4.abs_gap, r4.passed);
  }

  // divergence detection: relent between distinct point masses
  try {
    auto r = relative_entropy_via_loss_integral(gam, DiscretePrior::point_mass(1.0),
                                                DiscretePrior::point_mass(2.0), 1e-3);
    std::printf("DIV: NO ERROR value=%.6f (BAD)\n", r.value);
  } catch (const DivergenceError& e) {
    std::printf("DIV: DivergenceError as expected\n");
  }

  // infinite loss detection
  try {
    auto r = expected_levy_loss(pois, DiscretePrior::point_mass(1.0),
                                DiscretePrior::point_mass(0.0), 1.0, 1e-6);
    std::printf("INF: NO ERROR value=%.6f (BAD)\n", r.value);
  } catch (const InfiniteLossError&) {
    std::printf("INF: InfiniteLossError as expected\n");
  } catch (const SupportError&) {
    std::printf("INF: SupportError as expected\n");
  }

  // small-gamma gamma-channel behavior (clamped head)
  for (double g : {1e-2, 1e-4, 1e-6}) {
    const DiscretePrior p = DiscretePrior::make({1.0, 2.0}, {0.5, 0.5});
    const DiscretePrior q = DiscretePrior::make({1.0, 2.0}, {0.9, 0.1});
    auto e = mismatch_excess(gam, p, q, g, 1e-6);
    std::printf("EXC gamma g=%.0e excess=%.8f err=%.1e\n", g, e.value, e.error_estimate);
  }
  // mmse small-gamma limit: E[l] -> Var/2 = 0.5 for gaussian +-1
  {
    auto e = expected_levy_loss(gauss, default_prior(gauss), default_prior(gauss), 1e-3, 1e-6);
    std::printf("GAUSS small-g E[l]=%.6f (want ~0.5)\n", e.value);
  }
  return 0;
}

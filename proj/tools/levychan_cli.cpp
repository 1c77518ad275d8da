// Command-line front end: channel cards, the four theorem-style checks as
// CSV/JSON emitting subcommands, representative-loss curve data, and the
// aggregated verification battery.
//
// Exit codes: 0 all checks passed, 1 identity failure, 2 configuration
// error, 3 numerical non-convergence.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "levychan/levychan.hpp"
#include "report_io.hpp"

namespace fs = std::filesystem;
using levychan_cli::CsvTable;
using levychan_cli::g17;
using levychan_cli::ordered_json;
using namespace levychan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIdentityFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNonConvergence = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string channel = "gaussian";
  std::optional<std::vector<double>> prior_atoms;
  std::optional<std::vector<double>> prior_weights;
  std::optional<std::vector<double>> q_weights;
  std::optional<std::vector<double>> q_atoms;
  std::vector<double> gammas;
  double tol = 0.0;  // 0 = subcommand default
  std::uint64_t seed = 20240927;
  std::string out_dir = ".";
  int jobs = 1;
  std::vector<std::string> suite;
  std::string mutation_kind = "none";
  double mutation_factor = 1.01;
  double x_ref = 1.0;
  std::vector<double> x_grid;

  ordered_json echo;  // the effective configuration, embedded in reports
};

void require_keys(const ordered_json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

std::vector<double> as_doubles(const ordered_json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(key + " must contain numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file: " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(is);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  require_keys(j,
               {"channel", "prior", "prior_q", "gammas", "tol", "seed",
                "out_dir", "jobs", "suite", "mutation", "x_ref", "x_grid"},
               "config");
  if (j.contains("channel")) cfg.channel = j["channel"].get<std::string>();
  if (j.contains("prior")) {
    require_keys(j["prior"], {"atoms", "weights"}, "prior");
    cfg.prior_atoms = as_doubles(j["prior"]["atoms"], "prior.atoms");
    cfg.prior_weights = as_doubles(j["prior"]["weights"], "prior.weights");
  }
  if (j.contains("prior_q")) {
    require_keys(j["prior_q"], {"atoms", "weights"}, "prior_q");
    if (j["prior_q"].contains("atoms")) {
      cfg.q_atoms = as_doubles(j["prior_q"]["atoms"], "prior_q.atoms");
    }
    cfg.q_weights = as_doubles(j["prior_q"]["weights"], "prior_q.weights");
  }
  if (j.contains("gammas")) cfg.gammas = as_doubles(j["gammas"], "gammas");
  if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
  if (j.contains("suite")) {
    for (const auto& s : j["suite"]) cfg.suite.push_back(s.get<std::string>());
  }
  if (j.contains("mutation")) {
    require_keys(j["mutation"], {"kind", "factor"}, "mutation");
    if (j["mutation"].contains("kind")) {
      cfg.mutation_kind = j["mutation"]["kind"].get<std::string>();
    }
    if (j["mutation"].contains("factor")) {
      cfg.mutation_factor = j["mutation"]["factor"].get<double>();
    }
  }
  if (j.contains("x_ref")) cfg.x_ref = j["x_ref"].get<double>();
  if (j.contains("x_grid")) cfg.x_grid = as_doubles(j["x_grid"], "x_grid");
  return cfg;
}

DiscretePrior config_prior(const RunConfig& cfg, const ChannelModel& ch) {
  if (cfg.prior_atoms) {
    if (!cfg.prior_weights) throw ConfigError("prior.weights missing");
    return DiscretePrior::make(*cfg.prior_atoms, *cfg.prior_weights);
  }
  return default_prior(ch);
}

DiscretePrior config_prior_q(const RunConfig& cfg, const DiscretePrior& p,
                             const std::vector<double>& default_weights) {
  const std::vector<double> atoms = cfg.q_atoms ? *cfg.q_atoms : p.atoms;
  const std::vector<double> w =
      cfg.q_weights ? *cfg.q_weights : default_weights;
  return DiscretePrior::make(atoms, w);
}

LossMutation config_mutation(const RunConfig& cfg) {
  LossMutation m;
  if (cfg.mutation_kind == "none") return m;
  if (cfg.mutation_kind == "drop_sigma") {
    m.sigma_scale = 0.0;
    return m;
  }
  if (cfg.mutation_kind == "scale_nu") {
    m.nu_scale = cfg.mutation_factor;
    return m;
  }
  if (cfg.mutation_kind == "scale_lhs") return m;  // applied to lhs instead
  throw ConfigError("unknown mutation kind: " + cfg.mutation_kind);
}

ordered_json config_echo(const RunConfig& cfg, const std::string& command,
                         double effective_tol) {
  ordered_json e;
  e["command"] = command;
  e["channel"] = cfg.channel;
  if (cfg.prior_atoms) {
    e["prior"] = {{"atoms", *cfg.prior_atoms},
                  {"weights", cfg.prior_weights ? *cfg.prior_weights
                                                : std::vector<double>{}}};
  }
  if (cfg.q_weights) {
    e["prior_q"] = {{"atoms", cfg.q_atoms ? *cfg.q_atoms
                                          : (cfg.prior_atoms
                                                 ? *cfg.prior_atoms
                                                 : std::vector<double>{})},
                    {"weights", *cfg.q_weights}};
  }
  e["gammas"] = cfg.gammas;
  e["tol"] = effective_tol;
  e["seed"] = cfg.seed;
  e["out_dir"] = cfg.out_dir;
  e["jobs"] = cfg.jobs;
  e["mutation"] = {{"kind", cfg.mutation_kind},
                   {"factor", cfg.mutation_factor}};
  return e;
}

void write_json_report(const fs::path& path, const ordered_json& echo,
                       const std::vector<IdentityReport>& reports) {
  ordered_json j;
  j["tool"] = "levychan";
  j["config"] = echo;
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) arr.push_back(levychan_cli::report_to_json(r));
  j["reports"] = arr;
  bool all = true;
  for (const auto& r : reports) all = all && r.passed;
  j["all_passed"] = all;
  levychan_cli::write_file(path, j.dump(2) + "\n");
}

int cmd_describe(const std::string& name) {
  const ChannelModel ch = make_channel(name);
  std::printf("channel: %s\n", ch.name().c_str());
  if (ch.name() == "gaussian") {
    std::printf("  kappa(theta) = theta^2 / 2 on Theta = R\n");
    std::printf("  phi(x) = x^2 / 2,  link theta = x,  X domain: R\n");
    std::printf("  triple: a = 0, sigma = 1, nu = 0 (no jumps)\n");
    std::printf("  Y_gamma | X ~ N(gamma X, gamma)\n");
  } else if (ch.name() == "poisson") {
    std::printf("  kappa(theta) = e^theta - 1 on Theta = R\n");
    std::printf(
        "  phi(x) = x ln x - x + 1,  link theta = ln x,  X domain: [0, inf)\n");
    std::printf("  triple: a = 1, sigma = 0, nu = delta_1\n");
    std::printf("  Y_gamma | X ~ Poisson(gamma X)\n");
  } else if (ch.name() == "gamma") {
    std::printf("  kappa(theta) = -ln(1 - theta) on Theta = (-inf, 1)\n");
    std::printf(
        "  phi(x) = x - 1 - ln x,  link theta = 1 - 1/x,  X domain: (0, "
        "inf)\n");
    std::printf(
        "  triple: a = 1 - e^-1, sigma = 0, nu(dz) = z^-1 e^-z dz on z > 0\n");
    std::printf("  Y_gamma | X ~ Gamma(shape gamma, scale X)\n");
  } else {
    std::printf(
        "  kappa(theta) = ln( (1/2) / (1 - e^theta/2) ) on Theta = (-inf, ln "
        "2)\n");
    std::printf(
        "  phi(x) = x ln x - (1+x) ln(1+x) + x ln 2 + ln 2,  link theta = "
        "ln(2x/(1+x)),  X domain: [0, inf)\n");
    std::printf("  triple: sigma = 0, nu(k) = 1/(k 2^k) on k = 1, 2, ...\n");
    std::printf("  Y_gamma | X ~ NB(gamma, X/(1+X))\n");
  }
  const auto x0 = ch.no_input_point();
  std::printf("  no-input point kappa'(0) = %s (phi and phi' vanish there)\n",
              g17(x0).c_str());
  return kExitOk;
}

int exit_from_reports(const std::vector<IdentityReport>& reports) {
  bool nonconverged = false;
  bool failed = false;
  for (const auto& r : reports) {
    nonconverged = nonconverged || !r.converged;
    failed = failed || !r.passed;
  }
  if (nonconverged) return kExitNonConvergence;
  return failed ? kExitIdentityFailure : kExitOk;
}

int cmd_immle(const RunConfig& cfg) {
  const ChannelModel ch = make_channel(cfg.channel);
  const DiscretePrior prior = config_prior(cfg, ch);
  const std::vector<double> gammas =
      cfg.gammas.empty() ? std::vector<double>{0.5, 1.0, 2.0} : cfg.gammas;
  const double tol = cfg.tol > 0.0 ? cfg.tol : 1e-5;
  const LossMutation mut = config_mutation(cfg);
  const double lhs_scale =
      cfg.mutation_kind == "scale_lhs" ? cfg.mutation_factor : 1.0;

  CsvTable csv({"gamma", "mi", "dmi_dgamma", "expected_loss", "abs_gap",
                "error_budget", "passed"});
  std::vector<IdentityReport> reports;
  for (double g : gammas) {
    const QuadResult mi = mutual_information(ch, prior, g, tol);
    IdentityReport rep = check_immle(ch, prior, g, tol, mut, lhs_scale);
    csv.add_row({g17(g), g17(mi.value), g17(rep.lhs), g17(rep.rhs),
                 g17(rep.abs_gap), g17(rep.error_budget),
                 rep.passed ? "1" : "0"});
    reports.push_back(std::move(rep));
  }
  const fs::path out(cfg.out_dir);
  levychan_cli::write_file(out / "immle.csv", csv.to_string());
  write_json_report(out / "immle.json", config_echo(cfg, "immle", tol),
                    reports);
  return exit_from_reports(reports);
}

int cmd_dmle(const RunConfig& cfg) {
  const ChannelModel ch = make_channel(cfg.channel);
  const DiscretePrior p = config_prior(cfg, ch);
  const DiscretePrior q = config_prior_q(cfg, p, {0.8, 0.2});
  const std::vector<double> gammas =
      cfg.gammas.empty() ? std::vector<double>{0.5, 2.0} : cfg.gammas;
  const double tol = cfg.tol > 0.0 ? cfg.tol : 1e-4;
  const LossMutation mut = config_mutation(cfg);

  CsvTable csv({"gamma", "relent", "integral_rhs", "abs_gap", "error_budget",
                "passed"});
  std::vector<IdentityReport> reports;
  for (double g : gammas) {
    IdentityReport rep = check_dmle(ch, p, q, g, tol, mut);
    csv.add_row({g17(g), g17(rep.lhs), g17(rep.rhs), g17(rep.abs_gap),
                 g17(rep.error_budget), rep.passed ? "1" : "0"});
    reports.push_back(std::move(rep));
  }
  const fs::path out(cfg.out_dir);
  levychan_cli::write_file(out / "dmle.csv", csv.to_string());
  write_json_report(out / "dmle.json", config_echo(cfg, "dmle", tol), reports);
  return exit_from_reports(reports);
}

int cmd_entropy(const RunConfig& cfg) {
  const ChannelModel ch = make_channel(cfg.channel);
  const DiscretePrior prior = config_prior(cfg, ch);
  const double tol = cfg.tol > 0.0 ? cfg.tol : 5e-4;
  IdentityReport rep = check_entropy(ch, prior, tol);
  CsvTable csv({"channel", "integral", "entropy_exact", "abs_gap",
                "error_budget", "passed"});
  csv.add_row({ch.name(), g17(rep.lhs), g17(rep.rhs), g17(rep.abs_gap),
               g17(rep.error_budget), rep.passed ? "1" : "0"});
  const fs::path out(cfg.out_dir);
  levychan_cli::write_file(out / "entropy.csv", csv.to_string());
  write_json_report(out / "entropy.json", config_echo(cfg, "entropy", tol),
                    {rep});
  return exit_from_reports({rep});
}

int cmd_relent(const RunConfig& cfg) {
  const ChannelModel ch = make_channel(cfg.channel);
  DiscretePrior p = cfg.prior_atoms
                        ? DiscretePrior::make(*cfg.prior_atoms,
                                              *cfg.prior_weights)
                        : DiscretePrior::make({1.0, 2.0}, {0.5, 0.5});
  const DiscretePrior q = config_prior_q(cfg, p, {0.9, 0.1});
  const double tol = cfg.tol > 0.0 ? cfg.tol : 5e-4;
  IdentityReport rep = check_relent(ch, p, q, tol);
  CsvTable csv({"channel", "integral", "kl_exact", "abs_gap", "error_budget",
                "passed"});
  csv.add_row({ch.name(), g17(rep.lhs), g17(rep.rhs), g17(rep.abs_gap),
               g17(rep.error_budget), rep.passed ? "1" : "0"});
  const fs::path out(cfg.out_dir);
  levychan_cli::write_file(out / "relent.csv", csv.to_string());
  write_json_report(out / "relent.json", config_echo(cfg, "relent", tol),
                    {rep});
  return exit_from_reports({rep});
}

int cmd_bregman_curve(const RunConfig& cfg) {
  const ChannelModel ch = make_channel(cfg.channel);
  std::vector<double> grid = cfg.x_grid;
  if (grid.empty()) {
    // matches the visualization range of the representative-loss figures
    for (int i = 1; i <= 100; ++i) grid.push_back(0.05 * i);
  }
  CsvTable csv({"x", "loss"});
  for (double x : grid) {
    csv.add_row({g17(x), g17(representative_loss(ch, cfg.x_ref, x))});
  }
  const fs::path out(cfg.out_dir);
  levychan_cli::write_file(out / "bregman_curve.csv", csv.to_string());
  return kExitOk;
}

int cmd_verify_all(const RunConfig& cfg) {
  SuiteConfig sc;
  sc.jobs = cfg.jobs;
  sc.mutation = config_mutation(cfg);
  if (cfg.mutation_kind == "scale_lhs") sc.lhs_scale = cfg.mutation_factor;
  if (!cfg.suite.empty()) {
    for (const auto& name : cfg.suite) {
      bool found = false;
      for (int i = 0; i <= static_cast<int>(IdentityId::kCondMean); ++i) {
        const auto id = static_cast<IdentityId>(i);
        if (name == to_string(id)) {
          sc.identities.push_back(id);
          found = true;
          break;
        }
      }
      if (!found) throw ConfigError("unknown suite identity: " + name);
    }
  }
  const std::vector<IdentityReport> reports = run_suite(sc);

  CsvTable csv({"identity", "channel", "gamma", "lhs", "rhs", "abs_gap",
                "error_budget", "slack", "passed"});
  bool all = true;
  for (const auto& r : reports) {
    csv.add_row({to_string(r.id), r.config.channel, g17(r.config.gamma),
                 g17(r.lhs), g17(r.rhs), g17(r.abs_gap), g17(r.error_budget),
                 g17(r.slack), r.passed ? "1" : "0"});
    all = all && r.passed;
  }
  const fs::path out(cfg.out_dir);
  levychan_cli::write_file(out / "verify_all.csv", csv.to_string());
  write_json_report(out / "verify_all.json",
                    config_echo(cfg, "verify-all", 0.0), reports);
  std::printf("%zu identity checks, %s\n", reports.size(),
              all ? "all passed" : "FAILURES present");
  return exit_from_reports(reports);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scalar Levy channels: information-estimation identity "
               "verification"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  double tol = 0.0;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string channel;
  std::string mutate;
  double mutate_factor = 1.01;
  double x_ref = 1.0;

  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--tol", tol, "tolerance override");
  app.add_option("--seed", seed, "RNG seed override");
  app.add_option("--jobs", jobs, "worker threads for suite runs");

  auto* describe = app.add_subcommand("describe", "print a channel card");
  describe->add_option("channel", channel, "channel name")->required();

  auto* immle = app.add_subcommand(
      "immle", "dI/dgamma vs expected Levy loss (CSV + JSON)");
  immle->add_option("--channel", channel, "channel name");
  auto* dmle = app.add_subcommand(
      "dmle", "output relative entropy vs integrated mismatch cost");
  dmle->add_option("--channel", channel, "channel name");
  auto* entropy =
      app.add_subcommand("entropy", "entropy as an SNR loss integral");
  entropy->add_option("--channel", channel, "channel name");
  auto* relent = app.add_subcommand(
      "relent", "relative entropy as an SNR loss integral");
  relent->add_option("--channel", channel, "channel name");
  auto* curve = app.add_subcommand(
      "bregman-curve", "representative-loss curve data l(x_ref, x)");
  curve->add_option("--channel", channel, "channel name");
  curve->add_option("--x-ref", x_ref, "reference input");
  auto* verify =
      app.add_subcommand("verify-all", "run the full identity battery");
  verify->add_option("--mutate", mutate,
                     "deliberate corruption: drop_sigma | scale_nu | "
                     "scale_lhs (suite must fail)");
  verify->add_option("--mutate-factor", mutate_factor,
                     "perturbation factor for scale mutations");

  // parent-level flags (--out, --tol, ...) remain usable after a subcommand
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  try {
    RunConfig cfg =
        config_path.empty() ? RunConfig{} : load_config(config_path);
    if (!channel.empty()) cfg.channel = channel;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (tol > 0.0) cfg.tol = tol;
    if (seed != 0) cfg.seed = seed;
    if (jobs > 0) cfg.jobs = jobs;
    if (!mutate.empty()) cfg.mutation_kind = mutate;
    if (verify->count("--mutate-factor") > 0) {
      cfg.mutation_factor = mutate_factor;
    }
    if (curve->count("--x-ref") > 0) cfg.x_ref = x_ref;

    if (describe->parsed()) return cmd_describe(cfg.channel);
    if (immle->parsed()) return cmd_immle(cfg);
    if (dmle->parsed()) return cmd_dmle(cfg);
    if (entropy->parsed()) return cmd_entropy(cfg);
    if (relent->parsed()) return cmd_relent(cfg);
    if (curve->parsed()) return cmd_bregman_curve(cfg);
    if (verify->parsed()) return cmd_verify_all(cfg);
    return kExitConfigError;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const QuadratureError& e) {
    std::fprintf(stderr, "numerical non-convergence: %s\n", e.what());
    return kExitNonConvergence;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "numerical non-convergence: %s\n", e.what());
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNonConvergence;
  }
}

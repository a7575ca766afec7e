#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mpmab/config.hpp"
#include "mpmab/env.hpp"
#include "mpmab/harness.hpp"
#include "mpmab/rng.hpp"
#include "mpmab/svg_plot.hpp"

namespace {

using namespace mpmab;

// "a", "a:b" (step 1) or "a:b:step".
std::vector<double> parse_range(const std::string& text, const char* what) {
  std::vector<double> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i)
    if (i == text.size() || text[i] == ':') {
      const std::string tok = text.substr(start, i - start);
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (tok.empty() || end != tok.c_str() + tok.size())
        throw CLI::ValidationError(std::string(what) + ": bad range '" + text + "'");
      parts.push_back(v);
      start = i + 1;
    }
  if (parts.size() == 1) return parts;
  if (parts.size() > 3 || parts[1] < parts[0] ||
      (parts.size() == 3 && !(parts[2] > 0)))
    throw CLI::ValidationError(std::string(what) + ": bad range '" + text + "'");
  const double step = parts.size() == 3 ? parts[2] : 1.0;
  std::vector<double> out;
  for (double v = parts[0]; v <= parts[1] + step * 1e-9; v += step)
    out.push_back(v);
  return out;
}

void print_config_errors(const std::string& path,
                         const std::vector<ConfigError>& errors) {
  for (const auto& e : errors) {
    if (e.line > 0)
      std::cerr << path << ':' << e.line << ": " << e.message << '\n';
    else
      std::cerr << path << ": " << e.message << '\n';
  }
}

struct RunCli {
  std::string config_path;
  std::string protocol, attack;
  int players = 0, arms = 0, horizon = 0, runs = 0, threads = 0;
  std::uint64_t seed = 0;
  double epsilon = 0;
  std::vector<int> checkpoints;
  std::string out_runs, out_aggregate, out_losses;
  CLI::Option *opt_protocol = nullptr, *opt_attack = nullptr, *opt_players = nullptr,
              *opt_arms = nullptr, *opt_horizon = nullptr, *opt_runs = nullptr,
              *opt_threads = nullptr, *opt_seed = nullptr, *opt_epsilon = nullptr,
              *opt_checkpoints = nullptr, *opt_out_runs = nullptr,
              *opt_out_aggregate = nullptr, *opt_out_losses = nullptr;
};

int cmd_run(const RunCli& cli) {
  std::ifstream in(cli.config_path);
  if (!in) {
    std::cerr << "cannot open config '" << cli.config_path << "'\n";
    return 1;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  ParseOutcome outcome = parse_config(buf.str());
  if (!outcome.errors.empty()) {
    print_config_errors(cli.config_path, outcome.errors);
    return 1;
  }
  ExperimentConfig cfg = *outcome.config;

  if (cli.opt_protocol->count()) {
    const auto p = protocol_from_string(cli.protocol);
    if (!p) {
      std::cerr << "unknown protocol '" << cli.protocol << "'\n";
      return 1;
    }
    cfg.protocol = *p;
  }
  if (cli.opt_players->count()) cfg.num_players = cli.players;
  if (cli.opt_arms->count()) cfg.num_arms = cli.arms;
  if (cli.opt_horizon->count()) cfg.horizon = cli.horizon;
  if (cli.opt_runs->count()) cfg.runs = cli.runs;
  if (cli.opt_threads->count()) cfg.threads = cli.threads;
  if (cli.opt_seed->count()) cfg.seed = cli.seed;
  if (cli.opt_epsilon->count()) cfg.epsilon = cli.epsilon;
  if (cli.opt_checkpoints->count()) cfg.checkpoints = cli.checkpoints;
  if (cli.opt_out_runs->count()) cfg.out_runs = cli.out_runs;
  if (cli.opt_out_aggregate->count()) cfg.out_aggregate = cli.out_aggregate;
  if (cli.opt_out_losses->count()) cfg.out_losses = cli.out_losses;
  if (cli.opt_attack->count()) {
    if (cli.attack == "auto") {
      cfg.attack_param = std::numeric_limits<double>::quiet_NaN();
    } else {
      char* end = nullptr;
      cfg.attack_param = std::strtod(cli.attack.c_str(), &end);
      if (end != cli.attack.c_str() + cli.attack.size()) {
        std::cerr << "--attack-param must be a number or 'auto'\n";
        return 1;
      }
    }
  }

  // Overrides can break cross-field constraints; validate the merged
  // config by round-tripping it through the parser.
  ParseOutcome merged = parse_config(serialize_config(cfg));
  if (!merged.errors.empty()) {
    print_config_errors("<merged config>", merged.errors);
    return 1;
  }

  const ExperimentSpec spec = to_experiment_spec(*merged.config);
  const RegretReport report = monte_carlo(spec);

  {
    std::ofstream out(cfg.out_runs);
    if (!out) {
      std::cerr << "cannot write '" << cfg.out_runs << "'\n";
      return 2;
    }
    write_runs_csv(out, report);
  }
  {
    std::ofstream out(cfg.out_aggregate);
    if (!out) {
      std::cerr << "cannot write '" << cfg.out_aggregate << "'\n";
      return 2;
    }
    write_aggregate_csv(out, report);
  }
  if (!cfg.out_losses.empty()) {
    // Same derivation the runner uses for run 0's adversary.
    const LossMatrix losses = cfg.adversary.realize(
        cfg.num_arms, cfg.horizon, Rng::mix(spec.run_seeds.at(0), 1));
    std::ofstream out(cfg.out_losses);
    if (!out) {
      std::cerr << "cannot write '" << cfg.out_losses << "'\n";
      return 2;
    }
    losses.to_csv(out);
  }

  std::cout << "protocol " << report.protocol_label << '\n';
  std::cout << "environment " << report.environment_label << '\n';
  std::cout << "runs " << report.n_runs << '\n';
  for (std::size_t i = 0; i < report.checkpoints.size(); ++i) {
    char line[160];
    std::snprintf(line, sizeof line, "checkpoint %d mean %.12g std %.12g",
                  report.checkpoints[i], report.mean_regret[i],
                  report.std_regret[i]);
    std::cout << line << '\n';
  }
  std::cout << "wrote " << cfg.out_runs << '\n';
  std::cout << "wrote " << cfg.out_aggregate << '\n';
  if (!cfg.out_losses.empty()) std::cout << "wrote " << cfg.out_losses << '\n';
  return 0;
}

struct BoundsCli {
  std::vector<std::string> models;
  std::string players_range = "2";
  int arms = 0;
  double horizon = 0;
  std::string attack_range = "0";
  double eps = 0.01;
  std::string out = "-";
};

int cmd_bounds(const BoundsCli& cli) {
  std::vector<BoundModel> models;
  for (const auto& name : cli.models) {
    const auto m = bound_model_from_string(name);
    if (!m) {
      std::cerr << "unknown bound model '" << name << "'\n";
      return 1;
    }
    models.push_back(*m);
  }
  const auto player_values = parse_range(cli.players_range, "-M");
  const auto attack_values = parse_range(cli.attack_range, "--attack");
  for (double p : player_values)
    if (p != std::floor(p)) {
      std::cerr << "-M range must step through integers\n";
      return 1;
    }

  std::ostringstream csv;
  csv << "model,M,K,T,attack_param,eps,bound\n";
  char row[256];
  for (const auto model : models)
    for (double p : player_values)
      for (double a : attack_values) {
        const double bound = theory_bound(model, static_cast<int>(p), cli.arms,
                                          cli.horizon, a, cli.eps);
        std::snprintf(row, sizeof row, "%s,%d,%d,%.12g,%.12g,%.12g,%.12g\n",
                      to_string(model).c_str(), static_cast<int>(p), cli.arms,
                      cli.horizon, a, cli.eps, bound);
        csv << row;
      }
  if (cli.out == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream out(cli.out);
    if (!out) {
      std::cerr << "cannot write '" << cli.out << "'\n";
      return 2;
    }
    out << csv.str();
    std::cout << "wrote " << cli.out << '\n';
  }
  return 0;
}

struct PlotCli {
  std::string input, output, title;
  int width = 800, height = 520;
  bool log_y = false;
};

int cmd_plot(const PlotCli& cli) {
  std::ifstream in(cli.input);
  if (!in) {
    std::cerr << "cannot open '" << cli.input << "'\n";
    return 1;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  PlotOptions options;
  options.title = cli.title;
  options.width = cli.width;
  options.height = cli.height;
  options.log_y = cli.log_y;
  const std::string svg = plot_from_aggregate_csv(buf.str(), options);
  std::ofstream out(cli.output);
  if (!out) {
    std::cerr << "cannot write '" << cli.output << "'\n";
    return 2;
  }
  out << svg;
  std::cout << "wrote " << cli.output << '\n';
  return 0;
}

struct ProbeCli {
  int players = 2, arms = 3, horizon = 400;
  double epsilon = 0.01;
  int trials = 10000;
  std::uint64_t seed = 7;
  int round = 1, follower = 2;
  bool no_attack = false;
};

int cmd_probe(const ProbeCli& cli) {
  std::optional<SyncAttack> attack;
  if (!cli.no_attack) attack = SyncAttack{cli.round, cli.follower};
  const double rate =
      sync_failure_probe(cli.players, cli.arms, cli.horizon, cli.epsilon,
                         attack, cli.trials, cli.seed);
  char line[96];
  std::cout << "trials " << cli.trials << '\n';
  if (attack) {
    // First-phase flag exchange runs a uniformly drawn number of rounds in
    // 1..ceil(sqrt(T)); only a hit on the final round splits the players.
    const long long rounds = ceil_power(cli.horizon, 0.5);
    std::snprintf(line, sizeof line, "expected_rate %.12g", 1.0 / rounds);
    std::cout << line << '\n';
  }
  std::snprintf(line, sizeof line, "diverged_fraction %.12g", rate);
  std::cout << line << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cooperative multi-player bandit simulator"};
  app.require_subcommand(1);

  RunCli run_cli;
  auto* run = app.add_subcommand("run", "run a Monte-Carlo experiment");
  run->add_option("-c,--config", run_cli.config_path, "experiment config file")
      ->required();
  run_cli.opt_protocol = run->add_option("--protocol", run_cli.protocol,
                                         "override the protocol");
  run_cli.opt_players = run->add_option("-M,--players", run_cli.players,
                                        "override player count");
  run_cli.opt_arms = run->add_option("-K,--arms", run_cli.arms,
                                     "override arm count");
  run_cli.opt_horizon = run->add_option("-T,--horizon", run_cli.horizon,
                                        "override horizon");
  run_cli.opt_runs = run->add_option("--runs", run_cli.runs, "override run count");
  run_cli.opt_threads = run->add_option("--threads", run_cli.threads,
                                        "override worker count");
  run_cli.opt_seed = run->add_option("--seed", run_cli.seed, "override master seed");
  run_cli.opt_attack = run->add_option(
      "--attack-param", run_cli.attack, "override attack parameter (number or 'auto')");
  run_cli.opt_epsilon = run->add_option("--epsilon", run_cli.epsilon,
                                        "override exponent margin");
  run_cli.opt_checkpoints = run->add_option("--checkpoints", run_cli.checkpoints,
                                            "override regret checkpoints");
  run_cli.opt_out_runs = run->add_option("--out-runs", run_cli.out_runs,
                                         "per-run CSV path");
  run_cli.opt_out_aggregate = run->add_option("--out-aggregate",
                                              run_cli.out_aggregate,
                                              "aggregate CSV path");
  run_cli.opt_out_losses = run->add_option("--out-losses", run_cli.out_losses,
                                           "dump run 0's loss matrix here");

  BoundsCli bounds_cli;
  bounds_cli.models = {"centralized",   "alpha_aware",  "beta_aware",
                       "alpha_unaware", "beta_unaware", "no_sensing_reference"};
  auto* bounds = app.add_subcommand("bounds", "tabulate worst-case growth rates");
  bounds->add_option("--models", bounds_cli.models, "bound models to tabulate");
  bounds->add_option("-M,--players", bounds_cli.players_range,
                     "player count or range lo:hi[:step]");
  bounds->add_option("-K,--arms", bounds_cli.arms, "arm count")->required();
  bounds->add_option("-T,--horizon", bounds_cli.horizon, "horizon")->required();
  bounds->add_option("--attack", bounds_cli.attack_range,
                     "attack exponent or range lo:hi[:step]");
  bounds->add_option("--eps", bounds_cli.eps, "exponent margin");
  bounds->add_option("-o,--out", bounds_cli.out, "output CSV path ('-' = stdout)");

  PlotCli plot_cli;
  auto* plot = app.add_subcommand("plot", "render an aggregate CSV as SVG");
  plot->add_option("-i,--input", plot_cli.input, "aggregate CSV path")->required();
  plot->add_option("-o,--output", plot_cli.output, "SVG path")->required();
  plot->add_option("--title", plot_cli.title, "plot title");
  plot->add_option("--width", plot_cli.width, "SVG width");
  plot->add_option("--height", plot_cli.height, "SVG height");
  plot->add_flag("--log-y", plot_cli.log_y, "logarithmic y axis");

  ProbeCli probe_cli;
  auto* probe = app.add_subcommand(
      "probe-sync", "measure the estimate-divergence rate under a planted attack");
  probe->add_option("-M,--players", probe_cli.players, "player count");
  probe->add_option("-K,--arms", probe_cli.arms, "arm count");
  probe->add_option("-T,--horizon", probe_cli.horizon, "horizon");
  probe->add_option("--epsilon", probe_cli.epsilon, "exponent margin");
  probe->add_option("--trials", probe_cli.trials, "number of trials");
  probe->add_option("--seed", probe_cli.seed, "master seed");
  probe->add_option("--round", probe_cli.round, "exchange round to corrupt");
  probe->add_option("--follower", probe_cli.follower, "player whose copy is corrupted");
  probe->add_flag("--no-attack", probe_cli.no_attack, "run clean (rate must be 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (run->parsed()) return cmd_run(run_cli);
    if (bounds->parsed()) return cmd_bounds(bounds_cli);
    if (plot->parsed()) return cmd_plot(plot_cli);
    if (probe->parsed()) return cmd_probe(probe_cli);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

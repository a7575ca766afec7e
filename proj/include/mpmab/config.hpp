#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mpmab/harness.hpp"

namespace mpmab {

// Experiment description as read from a config file. The format is
// line-oriented: `key = value` pairs, full-line # comments, blank lines,
// and two optional sections introduced by [protocol] and [adversary].
// Values never span lines; lists are whitespace-separated.
struct ExperimentConfig {
  ProtocolKind protocol = ProtocolKind::alpha_aware;
  int num_players = 0;  // key M
  int num_arms = 0;     // key K
  int horizon = 0;      // key T
  int runs = 1;
  std::uint64_t seed = 1;
  int threads = 1;
  std::vector<int> checkpoints;  // empty means {T}
  std::string out_runs = "runs.csv";
  std::string out_aggregate = "aggregate.csv";
  std::string out_losses;  // empty: don't dump the first run's matrix

  // [protocol]
  double attack_param = std::numeric_limits<double>::quiet_NaN();  // "auto"
  double epsilon = 0.01;

  // [adversary]
  AdversarySpec adversary;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

struct ConfigError {
  int line = 0;  // 0: not tied to one line
  std::string message;
};

struct ParseOutcome {
  std::optional<ExperimentConfig> config;  // set iff errors is empty
  std::vector<ConfigError> errors;         // every violation, by line
};

// Parses and validates. Collects every problem it can find instead of
// stopping at the first one.
ParseOutcome parse_config(std::string_view text);

// Canonical form; parse_config(serialize_config(c)) reproduces c exactly.
std::string serialize_config(const ExperimentConfig& config);

// Expands the config into a runnable spec: one derived seed per run,
// default checkpoint at T.
ExperimentSpec to_experiment_spec(const ExperimentConfig& config);

}  // namespace mpmab

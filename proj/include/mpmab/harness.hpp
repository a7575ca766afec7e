#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mpmab/env.hpp"
#include "mpmab/protocol.hpp"

namespace mpmab {

struct EpisodeOptions {
  std::vector<int> checkpoints;  // ascending, each in 1..T
  bool per_slot = false;         // keep per-slot records (memory-heavy)
};

struct SlotRecord {
  ActionProfile actions;
  std::vector<Observation> observations;
  std::vector<std::uint8_t> collided;
  std::vector<AgentDiag> diags;
};

// Everything the harness can see about a run. Diagnostics here come from
// the environment and the agents' ground-truth views; none of it is ever
// fed back into an agent.
struct RunTrace {
  int num_players = 0;
  int num_arms = 0;
  int horizon = 0;
  std::vector<int> checkpoints;
  std::vector<double> regret_at_checkpoint;
  std::vector<double> final_estimates;  // per player
  std::vector<long long> comm_slots;    // per player: assign + sync slots
  std::vector<long long> explore_slots; // per player
  long long total_comm_slots = 0;
  long long explore_collisions = 0;  // player-slots colliding while exploring
  long long decode_errors = 0;       // follower started a phase off-assignment
  long long sync_failures = 0;       // phases entered with diverged estimates
  std::vector<SlotRecord> slots;     // only with per_slot
};

// Plays one full episode. The loss matrix must match the configured K and
// T. Fully deterministic given the seeds in `config`.
RunTrace run_episode(const AgentConfig& config, const LossMatrix& losses,
                     const EpisodeOptions& options = {});

// How a run's adversary is produced. `realize` is deterministic in
// (K, T, seed), so a spec plus a seed list pins the whole experiment.
struct AdversarySpec {
  enum class Kind { burst, changepoint, csv };
  Kind kind = Kind::burst;
  // burst
  double c_low = 0.2;
  double c_high = 0.9;
  double l_high = 0.9;
  // shared burst planting
  int burst_len = 0;
  int n_bursts = 0;
  // changepoint
  std::vector<double> means_before;
  std::vector<double> means_after;
  int t_change = 1;
  double halfwidth = 0.0;
  // csv replay
  std::string csv_path;

  LossMatrix realize(int num_arms, int horizon, std::uint64_t seed) const;
  std::string label() const;
};

struct ExperimentSpec {
  ProtocolKind protocol = ProtocolKind::alpha_aware;
  int num_players = 0;
  int num_arms = 0;
  int horizon = 0;
  AdversarySpec adversary;
  // NaN asks the runner to compute the exact exponent of each realized
  // adversary (aware protocols only); ignored by the unaware variants.
  double attack_param = std::numeric_limits<double>::quiet_NaN();
  double epsilon = 0.01;
  std::vector<std::uint64_t> run_seeds;  // one run per seed
  std::vector<int> checkpoints;          // empty means {T}
  std::string protocol_label;            // CSV labels; default from fields
  std::string environment_label;
  int threads = 1;
};

struct RunResult {
  int run_id = 0;
  std::uint64_t seed = 0;
  std::vector<double> regret_at_checkpoint;
  double final_estimate = 0.0;  // leader's
  double attack_param_used = 0.0;
  long long comm_slots = 0;
  long long explore_collisions = 0;
  long long sync_failures = 0;
};

struct RegretReport {
  std::string protocol_label;
  std::string environment_label;
  std::vector<int> checkpoints;
  std::vector<double> mean_regret;  // per checkpoint, over runs
  std::vector<double> std_regret;   // sample standard deviation
  int n_runs = 0;
  std::vector<RunResult> runs;
};

// One run_episode per seed; per-run results are independent of seed order,
// so permuting the seed list permutes the rows. threads > 1 fans runs out
// across workers without changing any result.
RegretReport monte_carlo(const ExperimentSpec& spec);

// Worst-case regret growth rates with all constants and log factors set to
// 1, for shape comparisons only.
enum class BoundModel {
  centralized,
  alpha_aware,
  beta_aware,
  alpha_unaware,
  beta_unaware,
  no_sensing_reference,  // no-communication baseline rate
};

std::string to_string(BoundModel model);
std::optional<BoundModel> bound_model_from_string(const std::string& name);

double theory_bound(BoundModel model, int num_players, int num_arms, double horizon,
                    double attack_param, double eps);

// Plants loss-1 slots over exactly the downlink block of one follower in
// one round of the first phase's flag exchange (run-exponent-unaware
// protocol), then measures how often the players leave the phase with
// different estimates. Only an attack on what turns out to be the final
// round can split them, so with no attack the rate is 0 and with an attack
// on round r <= ceil(T^xi) it converges to 1/ceil(T^xi).
struct SyncAttack {
  int round = 1;     // round index within the first phase's exchange
  int follower = 2;  // player whose broadcast copy is corrupted
};
double sync_failure_probe(int num_players, int num_arms, int horizon,
                          double epsilon, std::optional<SyncAttack> attack,
                          int n_trials, std::uint64_t seed);

// Per-run rows: protocol,environment,run_id,seed,checkpoint_t,cum_regret,
// final_estimate,comm_slots,explore_collisions,sync_failures
void write_runs_csv(std::ostream& out, const RegretReport& report);
// Aggregate rows: protocol,environment,checkpoint_t,mean_regret,std_regret,
// n_runs
void write_aggregate_csv(std::ostream& out, const RegretReport& report);

}  // namespace mpmab

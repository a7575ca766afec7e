#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpmab/codec.hpp"
#include "mpmab/env.hpp"
#include "mpmab/rng.hpp"
#include "mpmab/selector.hpp"

namespace mpmab {

// Leader-follower cooperation without collision sensing: player 1 selects
// the phase's arm subset and streams each follower its assignment over the
// or-channel (player m listens on its own index arm m); corrupted blocks
// can only be flipped by adversarial loss-1 slots, and the two unaware
// variants additionally run flag exchanges to keep every player's attack
// estimate identical.

enum class ProtocolKind {
  alpha_aware,    // knows a bound on the longest loss-1 run
  beta_aware,     // knows a bound on the per-arm count of loss-1 slots
  alpha_unaware,  // estimates the run exponent online
  beta_unaware,   // estimates the count exponent online
  parallel_exp3,  // no cooperation; per-player importance-weighted baseline
};

std::string to_string(ProtocolKind kind);
std::optional<ProtocolKind> protocol_from_string(const std::string& name);

enum class Role : std::uint8_t { leader, follower };

enum class SlotKind : std::uint8_t {
  assign,         // leader -> follower arm assignments
  sync_uplink,    // follower -> leader flag reports
  sync_downlink,  // leader -> follower flag broadcasts
  explore,        // committed play on the assigned arm
};

// Phase-level constants. All ceilings are taken with a tiny negative guard
// so that analytically integral powers (T^0.5 at square T and friends) do
// not round up from floating-point dust.
struct ProtocolParams {
  int tau = 1;            // exploration slots per phase
  double eta = 0.0;       // exploration weight scale
  int h = 1;              // repetition length for run-resilient codes
  int k_code = 1;         // repetition length for count-resilient codes
  double xi = 0.0;        // sync length exponent (unaware variants)
  double nu = 0.0;        // count-code exponent (count-based variants)
  double epsilon_step = 0.0;  // coding margin / escalation step, if used
  int sync_len = 1;       // per-round flag codeword length (count-unaware)
  int update_period = 1;  // phases between estimate updates (count-unaware)
  long long attack_budget = 1;  // corruption counter threshold (count-unaware)
};

// ceil(base^exponent) with the rounding guard described above; result
// clamped into [1, 2^30].
long long ceil_power(double base, double exponent);

ProtocolParams params_alpha_aware(int num_players, int num_arms, int horizon,
                                  double alpha, double eps);
ProtocolParams params_beta_aware(int num_players, int num_arms, int horizon,
                                 double beta);
ProtocolParams params_alpha_unaware(int num_players, int num_arms, int horizon,
                                    double alpha_est);
ProtocolParams params_beta_unaware(int num_players, int num_arms, int horizon,
                                   double beta_est);

// Rounds in the next sync block: uniform on {1, ..., ceil(T^xi)}, drawn
// from the shared stream so every agent computes the same value. The random
// length is what makes a targeted attack on the final broadcast succeed
// only with probability 1/ceil(T^xi).
int sync_round_count(double xi, int horizon, Rng& shared);

// One estimate step up the grid {0, eps, 2*eps, ...}, capped at 1.
double escalate(double estimate, bool error_flag, double eps);

struct AgentConfig {
  ProtocolKind protocol = ProtocolKind::alpha_aware;
  int num_players = 0;
  int num_arms = 0;
  int horizon = 0;
  double attack_param = 0.0;  // alpha / beta for the aware variants
  double epsilon = 0.01;      // coding margin and escalation step
  std::uint64_t shared_seed = 0;
  // One seed per player; empty derives them from shared_seed.
  std::vector<std::uint64_t> private_seeds;
};

// Ground-truth view for the harness; never an input to any agent.
struct AgentDiag {
  SlotKind slot_kind = SlotKind::assign;
  int phase = 0;
  double estimate = 0.0;
  int assigned_arm = 0;
  bool explore_entry = false;  // first exploration slot of the phase
};

class Agent {
 public:
  Agent(const AgentConfig& config, int player_index, Role role);

  // Arm to pull at slot t. last_obs is this player's own observation from
  // slot t-1 (nothing at t=1); t must advance by exactly 1 per call.
  int step(const std::optional<Observation>& last_obs, int t);

  const AgentDiag& diag() const { return diag_; }
  Role role() const { return role_; }
  int player() const { return player_; }
  int phase() const { return phase_; }
  double estimate() const { return estimate_; }

  // Leader only: the arm each player was assigned this phase ([0] = own).
  const std::vector<int>& intended_assignment() const { return assignment_; }
  const EstimatorState& estimator() const { return est_state_; }

 private:
  enum class Op : std::uint8_t { send, listen, wait, explore };
  enum class SendForm : std::uint8_t { constant, index, onehot };
  enum class Stage : std::uint8_t {
    phase_begin,
    assign_send,
    assign_wait_pre,
    assign_listen,
    assign_wait_post,
    err_send,
    err_listen,
    sync_up_listen,
    sync_up_send,
    sync_down_send,
    sync_down_wait_pre,
    sync_down_listen,
    sync_down_wait_post,
    explore,
  };

  // Codewords are produced digit-by-digit at emission time, so a segment is
  // O(1) memory no matter how long its codeword is.
  struct Segment {
    Op op = Op::wait;
    SlotKind kind = SlotKind::assign;
    long long len = 0;
    long long emitted = 0;
    long long applied = 0;
    int arm = 0;  // send: receiver's index arm; explore: committed arm
    SendForm form = SendForm::constant;
    int payload = 0;  // constant: the bit; index/onehot: the arm value
    int rep = 1;      // repetition per digit
  };

  void consume(const Observation& obs);
  int emit();
  void advance();
  void advance_alpha_aware();
  void advance_beta_aware();
  void advance_alpha_unaware();
  void advance_beta_unaware();
  void advance_parallel_exp3();

  ProtocolParams compute_params() const;
  void begin_phase();
  void select_meta_arm_for_phase();
  void finish_explore(bool success);
  void decode_assignment_from_onehot();

  void seg_send_const(int bit, long long digits, int rep, int target_arm,
                      SlotKind kind);
  void seg_send_index(int arm_value, int target_arm, int rep);
  void seg_send_onehot(int arm_value, int target_arm, int rep);
  void seg_listen(long long len, SlotKind kind);
  void seg_wait(long long len, SlotKind kind);
  void seg_explore(int arm, long long len);

  ProtocolKind protocol_;
  Role role_;
  int player_;      // 1-based; also this player's index arm
  int num_players_;
  int num_arms_;
  int horizon_;
  double epsilon_;
  double estimate_;

  Rng rng_private_;
  Rng rng_shared_;

  ProtocolParams params_;
  EstimatorState est_state_;
  MetaArm meta_arm_;
  std::vector<int> assignment_;  // leader: arm per player for this phase
  double sel_marginal_ = 1.0;
  double explore_loss_ = 0.0;
  int assigned_ = 0;  // follower: decoded arm for this phase

  int phase_ = 0;
  Stage stage_ = Stage::phase_begin;
  Segment seg_;
  BitString rx_;
  std::vector<double> scratch_w_;
  int cur_target_ = 0;   // leader: follower being addressed
  int sync_rounds_ = 0;  // N for the current sync block
  int sync_q_ = 0;       // current round within the block
  int flag_ = 0;         // assignment-error flag (F / F1)
  int flag2_ = 0;        // counter-threshold flag (F2)
  long long corrupt_count_ = 0;  // C: corrupted slots charged so far
  int phases_since_update_ = 0;  // R
  long long slots_emitted_ = 0;
  int last_arm_ = 0;

  AgentDiag diag_;
};

// Player 1 is the leader, players 2..M followers; every player's index arm
// is its own player number. The cooperative variants require
// 2 <= M <= K; the baseline accepts 1 <= M <= K.
std::vector<Agent> make_agents(const AgentConfig& config);

// Convenience: M independent importance-weighted players, no communication.
std::vector<Agent> baseline_parallel_exp3(int num_players, int num_arms,
                                          int horizon, std::uint64_t seed);

}  // namespace mpmab

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace mpmab {

// Arms and players are 1-based everywhere in the public interface; slot
// indices t run 1..T.

// Oblivious adversary: the full K x T loss table is fixed before play and
// immutable afterwards. Entries live in [0,1].
class LossMatrix {
 public:
  LossMatrix() = default;

  // Validates K >= 1, T >= 1, values.size() == K*T, all entries in [0,1].
  // `values` is arm-major: value for (arm k, slot t) at (k-1)*T + (t-1).
  static LossMatrix from_values(int num_arms, int horizon,
                                std::vector<double> values);

  int num_arms() const { return num_arms_; }
  int horizon() const { return horizon_; }

  double loss(int arm, int t) const {
    return values_[static_cast<std::size_t>(arm - 1) * horizon_ + (t - 1)];
  }

  // Row view for scans; length == horizon().
  const double* row(int arm) const {
    return values_.data() + static_cast<std::size_t>(arm - 1) * horizon_;
  }

  // CSV with header "arm,t,loss", arm-major, doubles printed to
  // round-trip precision.
  void to_csv(std::ostream& out) const;
  static LossMatrix from_csv(std::istream& in);

 private:
  int num_arms_ = 0;
  int horizon_ = 0;
  std::vector<double> values_;
};

struct ActionProfile {
  std::vector<int> arms;  // arms[m-1] = arm pulled by player m, in 1..K
};

// The only feedback a player ever sees: the arm it pulled and the loss it
// was charged. Collisions are folded into the loss and not reported.
struct Observation {
  int arm = 0;
  double loss = 0.0;
};

// Longest all-one run (local) and largest per-arm count of exact-1 slots
// (global). Only losses equal to 1.0 count as attacks.
struct AttackabilityProfile {
  int local = 0;
  int global = 0;
};

// i.i.d.-per-arm base losses: per arm k a floor c_k ~ U[c_low, c_high] is
// drawn, then each slot gets U[c_k, l_high]; afterwards n_bursts runs of
// burst_len consecutive slots per arm are overwritten with exact 1.0.
// Bursts on one arm never overlap and, whenever the slack allows, keep at
// least one slot of separation so planted runs cannot merge. Requires
// c_low <= c_high <= l_high <= 1 and n_bursts*burst_len <= T.
LossMatrix gen_burst_adversary(int num_arms, int horizon, double c_low,
                               double c_high, double l_high, int burst_len,
                               int n_bursts, std::uint64_t seed);

// Piecewise-stationary: slot t draws U[a_k - halfwidth, a_k + halfwidth]
// where a_k comes from means_before for t < t_change and means_after for
// t >= t_change. Both mean vectors must have K entries with
// a_k +/- halfwidth inside [0,1]. Bursts are planted as above.
LossMatrix gen_changepoint_adversary(int num_arms, int horizon,
                                     const std::vector<double>& means_before,
                                     const std::vector<double>& means_after,
                                     int t_change, double halfwidth,
                                     int burst_len, int n_bursts,
                                     std::uint64_t seed);

int local_attackability(const LossMatrix& losses);
int global_attackability(const LossMatrix& losses);
AttackabilityProfile attackability(const LossMatrix& losses);

struct StepResult {
  std::vector<Observation> observations;  // per player
  // Diagnostics for the harness only; never forwarded to agents.
  std::vector<std::uint8_t> collided;
};

// One slot of play: every player on a contested arm is charged loss 1,
// everyone else the matrix entry.
StepResult step(const LossMatrix& losses, int t, const ActionProfile& actions);

// Allocation-free variant for hot loops; output vectors are resized to M.
void step_into(const LossMatrix& losses, int t, const ActionProfile& actions,
               std::vector<Observation>& observations,
               std::vector<std::uint8_t>& collided);

// Total loss of the best fixed assignment of M distinct arms over slots
// 1..t_end: the sum of the M smallest per-arm cumulative losses (a fixed
// collision-free allocation, so per-arm losses just add).
double best_allocation_loss(const LossMatrix& losses, int num_players,
                            int t_end);
double best_allocation_loss(const LossMatrix& losses, int num_players);

// Cumulative realized loss of the recorded play minus the best fixed
// allocation over the same prefix, evaluated at each checkpoint (ascending,
// within 1..actions.size()). Collisions charge 1 to every player involved.
std::vector<double> regret(const LossMatrix& losses,
                           const std::vector<ActionProfile>& actions_per_slot,
                           int num_players, const std::vector<int>& checkpoints);

// Streaming form of `regret` used by the episode loop: feed slots in order,
// read the value at any checkpoint. Both paths share the same arithmetic.
class RegretAccumulator {
 public:
  RegretAccumulator(const LossMatrix& losses, int num_players);

  // Advance to slot t (must be called with t = 1,2,...) given the losses the
  // players were actually charged this slot.
  void advance(int t, const std::vector<Observation>& observations);

  // Regret over the prefix 1..t for the last advanced slot t.
  double value() const;

 private:
  const LossMatrix* losses_;
  int num_players_;
  int last_t_ = 0;
  double realized_ = 0.0;
  std::vector<double> arm_cum_;
  mutable std::vector<double> scratch_;
};

}  // namespace mpmab

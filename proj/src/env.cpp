#include "mpmab/env.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mpmab/rng.hpp"

namespace mpmab {

namespace {

void check_dims(int num_arms, int horizon) {
  if (num_arms < 1) throw std::invalid_argument("env: need at least one arm");
  if (horizon < 1) throw std::invalid_argument("env: horizon must be >= 1");
}

void check_players(int num_players, int num_arms) {
  if (num_players < 1 || num_players > num_arms)
    throw std::invalid_argument("env: player count must be in 1..K");
}

void check_slot(int t, int horizon) {
  if (t < 1 || t > horizon)
    throw std::invalid_argument("env: slot " + std::to_string(t) +
                                " outside 1.." + std::to_string(horizon));
}

// Plants n_bursts non-overlapping all-one runs of length burst_len into one
// arm's row. Offsets are drawn by rejection; while slack allows, candidates
// touching an existing run are also rejected so runs cannot merge and the
// longest planted run stays exactly burst_len. If rejection stalls (dense
// packings), falls back to a uniform composition draw: sorted offsets with
// the minimum legal spacing, which always succeeds under
// n_bursts * burst_len <= T.
void plant_bursts(double* row, int horizon, int burst_len, int n_bursts,
                  Rng& rng) {
  if (n_bursts == 0) return;
  const bool gaps_fit =
      static_cast<long long>(n_bursts) * burst_len + (n_bursts - 1) <= horizon;

  std::vector<std::pair<int, int>> placed;  // [start, end] inclusive
  const int margin = gaps_fit ? 1 : 0;
  const int max_attempts = 300;
  bool stalled = false;
  for (int b = 0; b < n_bursts && !stalled; ++b) {
    int attempt = 0;
    for (; attempt < max_attempts; ++attempt) {
      const int start = rng.uniform_int(1, horizon - burst_len + 1);
      const int lo = start - margin;
      const int hi = start + burst_len - 1 + margin;
      bool free = true;
      for (const auto& iv : placed) {
        if (lo <= iv.second && iv.first <= hi) {
          free = false;
          break;
        }
      }
      if (free) {
        placed.emplace_back(start, start + burst_len - 1);
        break;
      }
    }
    if (attempt == max_attempts) stalled = true;
  }
  if (stalled) {
    // Composition fallback: starts s_i = u_(i) + (i-1)*spacing + 1 with
    // sorted u_i drawn from {0..slack}; spacing burst_len (+1 when a gap
    // still fits) keeps runs disjoint.
    const int spacing = gaps_fit ? burst_len + 1 : burst_len;
    const long long slack =
        static_cast<long long>(horizon) - static_cast<long long>(n_bursts - 1) * spacing -
        burst_len;
    std::vector<long long> u(static_cast<std::size_t>(n_bursts));
    for (auto& v : u) v = static_cast<long long>(rng.next_below(
                            static_cast<std::uint64_t>(slack) + 1));
    std::sort(u.begin(), u.end());
    placed.clear();
    for (int b = 0; b < n_bursts; ++b) {
      const int start = static_cast<int>(u[b] + static_cast<long long>(b) * spacing) + 1;
      placed.emplace_back(start, start + burst_len - 1);
    }
  }
  for (const auto& iv : placed)
    for (int t = iv.first; t <= iv.second; ++t) row[t - 1] = 1.0;
}

void check_burst_args(int horizon, int burst_len, int n_bursts) {
  if (burst_len < 0 || n_bursts < 0)
    throw std::invalid_argument("env: burst_len and n_bursts must be >= 0");
  if (n_bursts > 0 && burst_len == 0)
    throw std::invalid_argument("env: n_bursts > 0 needs burst_len >= 1");
  if (static_cast<long long>(burst_len) * n_bursts > horizon)
    throw std::invalid_argument("env: bursts do not fit the horizon");
}

}  // namespace

LossMatrix LossMatrix::from_values(int num_arms, int horizon,
                                   std::vector<double> values) {
  check_dims(num_arms, horizon);
  if (values.size() != static_cast<std::size_t>(num_arms) * horizon)
    throw std::invalid_argument("env: loss table size mismatch");
  for (double v : values)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("env: losses must lie in [0,1]");
  LossMatrix m;
  m.num_arms_ = num_arms;
  m.horizon_ = horizon;
  m.values_ = std::move(values);
  return m;
}

void LossMatrix::to_csv(std::ostream& out) const {
  out << "arm,t,loss\n";
  char buf[64];
  for (int k = 1; k <= num_arms_; ++k) {
    const double* r = row(k);
    for (int t = 1; t <= horizon_; ++t) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", k, t, r[t - 1]);
      out << buf;
    }
  }
}

LossMatrix LossMatrix::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("env: empty loss CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "arm,t,loss")
    throw std::invalid_argument("env: loss CSV must start with 'arm,t,loss'");
  struct Cell {
    int arm;
    int t;
    double loss;
  };
  std::vector<Cell> cells;
  int max_arm = 0, max_t = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Cell c{};
    char* end = nullptr;
    const char* s = line.c_str();
    c.arm = static_cast<int>(std::strtol(s, &end, 10));
    if (end == s || *end != ',')
      throw std::invalid_argument("env: bad loss CSV row at line " +
                                  std::to_string(line_no));
    s = end + 1;
    c.t = static_cast<int>(std::strtol(s, &end, 10));
    if (end == s || *end != ',')
      throw std::invalid_argument("env: bad loss CSV row at line " +
                                  std::to_string(line_no));
    s = end + 1;
    c.loss = std::strtod(s, &end);
    if (end == s)
      throw std::invalid_argument("env: bad loss CSV row at line " +
                                  std::to_string(line_no));
    if (c.arm < 1 || c.t < 1)
      throw std::invalid_argument("env: loss CSV indices must be >= 1");
    max_arm = std::max(max_arm, c.arm);
    max_t = std::max(max_t, c.t);
    cells.push_back(c);
  }
  if (cells.empty()) throw std::invalid_argument("env: loss CSV has no rows");
  if (cells.size() != static_cast<std::size_t>(max_arm) * max_t)
    throw std::invalid_argument("env: loss CSV must cover every (arm, t) once");
  std::vector<double> values(cells.size(),
                             -1.0);  // sentinel outside [0,1] catches repeats
  for (const Cell& c : cells) {
    auto& slot = values[static_cast<std::size_t>(c.arm - 1) * max_t + (c.t - 1)];
    if (slot >= 0.0)
      throw std::invalid_argument("env: loss CSV repeats an (arm, t) cell");
    slot = c.loss;
  }
  return from_values(max_arm, max_t, std::move(values));
}

LossMatrix gen_burst_adversary(int num_arms, int horizon, double c_low,
                               double c_high, double l_high, int burst_len,
                               int n_bursts, std::uint64_t seed) {
  check_dims(num_arms, horizon);
  check_burst_args(horizon, burst_len, n_bursts);
  if (!(0.0 <= c_low && c_low <= c_high && c_high <= l_high && l_high <= 1.0))
    throw std::invalid_argument(
        "env: need 0 <= c_low <= c_high <= l_high <= 1");
  std::vector<double> values(static_cast<std::size_t>(num_arms) * horizon);
  for (int k = 1; k <= num_arms; ++k) {
    Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(k)));
    double* row = values.data() + static_cast<std::size_t>(k - 1) * horizon;
    const double floor_k = rng.uniform(c_low, c_high);
    for (int t = 0; t < horizon; ++t) row[t] = rng.uniform(floor_k, l_high);
    plant_bursts(row, horizon, burst_len, n_bursts, rng);
  }
  return LossMatrix::from_values(num_arms, horizon, std::move(values));
}

LossMatrix gen_changepoint_adversary(int num_arms, int horizon,
                                     const std::vector<double>& means_before,
                                     const std::vector<double>& means_after,
                                     int t_change, double halfwidth,
                                     int burst_len, int n_bursts,
                                     std::uint64_t seed) {
  check_dims(num_arms, horizon);
  check_burst_args(horizon, burst_len, n_bursts);
  if (means_before.size() != static_cast<std::size_t>(num_arms) ||
      means_after.size() != static_cast<std::size_t>(num_arms))
    throw std::invalid_argument("env: mean vectors must have K entries");
  if (t_change < 1 || t_change > horizon)
    throw std::invalid_argument("env: t_change must lie in 1..T");
  if (halfwidth < 0.0)
    throw std::invalid_argument("env: halfwidth must be >= 0");
  for (const auto* means : {&means_before, &means_after})
    for (double a : *means)
      if (!(a - halfwidth >= 0.0 && a + halfwidth <= 1.0))
        throw std::invalid_argument(
            "env: mean +/- halfwidth must stay inside [0,1]");
  std::vector<double> values(static_cast<std::size_t>(num_arms) * horizon);
  for (int k = 1; k <= num_arms; ++k) {
    Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(k)));
    double* row = values.data() + static_cast<std::size_t>(k - 1) * horizon;
    const double before = means_before[static_cast<std::size_t>(k - 1)];
    const double after = means_after[static_cast<std::size_t>(k - 1)];
    for (int t = 1; t <= horizon; ++t) {
      const double a = t < t_change ? before : after;
      row[t - 1] = rng.uniform(a - halfwidth, a + halfwidth);
    }
    plant_bursts(row, horizon, burst_len, n_bursts, rng);
  }
  return LossMatrix::from_values(num_arms, horizon, std::move(values));
}

int local_attackability(const LossMatrix& losses) {
  int best = 0;
  for (int k = 1; k <= losses.num_arms(); ++k) {
    const double* row = losses.row(k);
    int run = 0;
    for (int t = 0; t < losses.horizon(); ++t) {
      run = row[t] == 1.0 ? run + 1 : 0;
      best = std::max(best, run);
    }
  }
  return best;
}

int global_attackability(const LossMatrix& losses) {
  int best = 0;
  for (int k = 1; k <= losses.num_arms(); ++k) {
    const double* row = losses.row(k);
    int count = 0;
    for (int t = 0; t < losses.horizon(); ++t) count += row[t] == 1.0;
    best = std::max(best, count);
  }
  return best;
}

AttackabilityProfile attackability(const LossMatrix& losses) {
  return {local_attackability(losses), global_attackability(losses)};
}

void step_into(const LossMatrix& losses, int t, const ActionProfile& actions,
               std::vector<Observation>& observations,
               std::vector<std::uint8_t>& collided) {
  check_slot(t, losses.horizon());
  const int m_count = static_cast<int>(actions.arms.size());
  check_players(m_count, losses.num_arms());
  observations.resize(static_cast<std::size_t>(m_count));
  collided.resize(static_cast<std::size_t>(m_count));
  for (int m = 0; m < m_count; ++m) {
    const int arm = actions.arms[static_cast<std::size_t>(m)];
    if (arm < 1 || arm > losses.num_arms())
      throw std::invalid_argument("env: action outside 1..K");
    bool hit = false;
    for (int n = 0; n < m_count; ++n)
      if (n != m && actions.arms[static_cast<std::size_t>(n)] == arm) {
        hit = true;
        break;
      }
    collided[static_cast<std::size_t>(m)] = hit;
    observations[static_cast<std::size_t>(m)] = {
        arm, hit ? 1.0 : losses.loss(arm, t)};
  }
}

StepResult step(const LossMatrix& losses, int t, const ActionProfile& actions) {
  StepResult r;
  step_into(losses, t, actions, r.observations, r.collided);
  return r;
}

double best_allocation_loss(const LossMatrix& losses, int num_players,
                            int t_end) {
  check_players(num_players, losses.num_arms());
  check_slot(t_end, losses.horizon());
  std::vector<double> cum(static_cast<std::size_t>(losses.num_arms()));
  for (int k = 1; k <= losses.num_arms(); ++k) {
    const double* row = losses.row(k);
    double s = 0.0;
    for (int t = 0; t < t_end; ++t) s += row[t];
    cum[static_cast<std::size_t>(k - 1)] = s;
  }
  std::nth_element(cum.begin(), cum.begin() + (num_players - 1), cum.end());
  double best = 0.0;
  for (int i = 0; i < num_players; ++i) best += cum[static_cast<std::size_t>(i)];
  return best;
}

double best_allocation_loss(const LossMatrix& losses, int num_players) {
  return best_allocation_loss(losses, num_players, losses.horizon());
}

std::vector<double> regret(const LossMatrix& losses,
                           const std::vector<ActionProfile>& actions_per_slot,
                           int num_players,
                           const std::vector<int>& checkpoints) {
  check_players(num_players, losses.num_arms());
  if (actions_per_slot.size() > static_cast<std::size_t>(losses.horizon()))
    throw std::invalid_argument("env: more action slots than the horizon");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const int cp = checkpoints[i];
    if (cp < 1 || cp > static_cast<int>(actions_per_slot.size()))
      throw std::invalid_argument("env: checkpoint outside recorded play");
    if (i > 0 && checkpoints[i - 1] >= cp)
      throw std::invalid_argument("env: checkpoints must be ascending");
  }
  RegretAccumulator acc(losses, num_players);
  std::vector<Observation> obs;
  std::vector<std::uint8_t> col;
  std::vector<double> out;
  out.reserve(checkpoints.size());
  std::size_t next_cp = 0;
  for (int t = 1; t <= static_cast<int>(actions_per_slot.size()); ++t) {
    const ActionProfile& a = actions_per_slot[static_cast<std::size_t>(t - 1)];
    if (static_cast<int>(a.arms.size()) != num_players)
      throw std::invalid_argument("env: action profile has wrong player count");
    step_into(losses, t, a, obs, col);
    acc.advance(t, obs);
    while (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
      out.push_back(acc.value());
      ++next_cp;
    }
  }
  return out;
}

RegretAccumulator::RegretAccumulator(const LossMatrix& losses, int num_players)
    : losses_(&losses), num_players_(num_players) {
  check_players(num_players, losses.num_arms());
  arm_cum_.assign(static_cast<std::size_t>(losses.num_arms()), 0.0);
}

void RegretAccumulator::advance(int t, const std::vector<Observation>& observations) {
  if (t != last_t_ + 1)
    throw std::invalid_argument("env: regret accumulator fed out of order");
  last_t_ = t;
  for (const Observation& o : observations) realized_ += o.loss;
  for (int k = 1; k <= losses_->num_arms(); ++k)
    arm_cum_[static_cast<std::size_t>(k - 1)] += losses_->loss(k, t);
}

double RegretAccumulator::value() const {
  scratch_ = arm_cum_;
  std::nth_element(scratch_.begin(), scratch_.begin() + (num_players_ - 1),
                   scratch_.end());
  double best = 0.0;
  for (int i = 0; i < num_players_; ++i)
    best += scratch_[static_cast<std::size_t>(i)];
  return realized_ - best;
}

}  // namespace mpmab

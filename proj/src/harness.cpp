#include "mpmab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace mpmab {

namespace {

void check_checkpoints(const std::vector<int>& checkpoints, int horizon) {
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || checkpoints[i] > horizon)
      throw std::invalid_argument("harness: checkpoint outside 1..T");
    if (i > 0 && checkpoints[i - 1] >= checkpoints[i])
      throw std::invalid_argument("harness: checkpoints must be ascending");
  }
}

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Exponent x with base^x matching `value` exactly at the recorded horizon;
// the exact attackability parameter of a realized adversary.
double exponent_of(long long value, int horizon) {
  if (value <= 1 || horizon <= 1) return 0.0;
  const double e = std::log(static_cast<double>(value)) /
                   std::log(static_cast<double>(horizon));
  return std::min(e, 1.0);
}

}  // namespace

RunTrace run_episode(const AgentConfig& config, const LossMatrix& losses,
                     const EpisodeOptions& options) {
  if (losses.num_arms() != config.num_arms ||
      losses.horizon() != config.horizon)
    throw std::invalid_argument(
        "harness: loss matrix does not match the configured K and T");
  check_checkpoints(options.checkpoints, config.horizon);

  std::vector<Agent> agents = make_agents(config);
  const int m_count = config.num_players;
  const bool cooperative = config.protocol != ProtocolKind::parallel_exp3;

  RunTrace trace;
  trace.num_players = m_count;
  trace.num_arms = config.num_arms;
  trace.horizon = config.horizon;
  trace.checkpoints = options.checkpoints;
  trace.comm_slots.assign(static_cast<std::size_t>(m_count), 0);
  trace.explore_slots.assign(static_cast<std::size_t>(m_count), 0);
  if (options.per_slot)
    trace.slots.reserve(static_cast<std::size_t>(config.horizon));

  ActionProfile actions;
  actions.arms.assign(static_cast<std::size_t>(m_count), 0);
  std::vector<Observation> observations;
  std::vector<std::uint8_t> collided;
  std::vector<std::optional<Observation>> previous(
      static_cast<std::size_t>(m_count));
  RegretAccumulator acc(losses, m_count);
  std::size_t next_cp = 0;

  for (int t = 1; t <= config.horizon; ++t) {
    for (int m = 0; m < m_count; ++m)
      actions.arms[static_cast<std::size_t>(m)] =
          agents[static_cast<std::size_t>(m)].step(
              previous[static_cast<std::size_t>(m)], t);
    step_into(losses, t, actions, observations, collided);
    for (int m = 0; m < m_count; ++m)
      previous[static_cast<std::size_t>(m)] =
          observations[static_cast<std::size_t>(m)];
    acc.advance(t, observations);
    while (next_cp < options.checkpoints.size() &&
           options.checkpoints[next_cp] == t) {
      trace.regret_at_checkpoint.push_back(acc.value());
      ++next_cp;
    }

    const AgentDiag& lead = agents[0].diag();
    for (int m = 0; m < m_count; ++m) {
      const AgentDiag& d = agents[static_cast<std::size_t>(m)].diag();
      if (d.slot_kind == SlotKind::explore) {
        ++trace.explore_slots[static_cast<std::size_t>(m)];
        if (collided[static_cast<std::size_t>(m)]) ++trace.explore_collisions;
      } else {
        ++trace.comm_slots[static_cast<std::size_t>(m)];
      }
      if (cooperative && m > 0 && d.explore_entry &&
          (d.phase != lead.phase ||
           d.assigned_arm != agents[0].intended_assignment()
                                 [static_cast<std::size_t>(m)]))
        ++trace.decode_errors;
    }
    if (cooperative && lead.explore_entry) {
      for (int m = 1; m < m_count; ++m)
        if (agents[static_cast<std::size_t>(m)].estimate() !=
            agents[0].estimate()) {
          ++trace.sync_failures;
          break;
        }
    }

    if (options.per_slot) {
      SlotRecord rec;
      rec.actions = actions;
      rec.observations = observations;
      rec.collided = collided;
      rec.diags.reserve(static_cast<std::size_t>(m_count));
      for (int m = 0; m < m_count; ++m)
        rec.diags.push_back(agents[static_cast<std::size_t>(m)].diag());
      trace.slots.push_back(std::move(rec));
    }
  }

  for (int m = 0; m < m_count; ++m) {
    trace.final_estimates.push_back(
        agents[static_cast<std::size_t>(m)].estimate());
    trace.total_comm_slots += trace.comm_slots[static_cast<std::size_t>(m)];
  }
  return trace;
}

LossMatrix AdversarySpec::realize(int num_arms, int horizon,
                                  std::uint64_t seed) const {
  switch (kind) {
    case Kind::burst:
      return gen_burst_adversary(num_arms, horizon, c_low, c_high, l_high,
                                 burst_len, n_bursts, seed);
    case Kind::changepoint:
      return gen_changepoint_adversary(num_arms, horizon, means_before,
                                       means_after, t_change, halfwidth,
                                       burst_len, n_bursts, seed);
    case Kind::csv: {
      std::ifstream in(csv_path);
      if (!in)
        throw std::runtime_error("harness: cannot open loss CSV " + csv_path);
      LossMatrix losses = LossMatrix::from_csv(in);
      if (losses.num_arms() != num_arms || losses.horizon() != horizon)
        throw std::invalid_argument("harness: loss CSV " + csv_path +
                                    " does not match the configured K and T");
      return losses;
    }
  }
  throw std::logic_error("harness: unknown adversary kind");
}

std::string AdversarySpec::label() const {
  switch (kind) {
    case Kind::burst: return "burst";
    case Kind::changepoint: return "changepoint";
    case Kind::csv: return "csv";
  }
  return "unknown";
}

namespace {

RunResult execute_run(const ExperimentSpec& spec, int run_id) {
  const std::uint64_t run_seed = spec.run_seeds[static_cast<std::size_t>(run_id)];
  const LossMatrix losses =
      spec.adversary.realize(spec.num_arms, spec.horizon, Rng::mix(run_seed, 1));

  double attack = spec.attack_param;
  if (std::isnan(attack)) {
    if (spec.protocol == ProtocolKind::alpha_aware)
      attack = exponent_of(local_attackability(losses), spec.horizon);
    else if (spec.protocol == ProtocolKind::beta_aware)
      attack = exponent_of(global_attackability(losses), spec.horizon);
    else
      attack = 0.0;
  }

  AgentConfig config;
  config.protocol = spec.protocol;
  config.num_players = spec.num_players;
  config.num_arms = spec.num_arms;
  config.horizon = spec.horizon;
  config.attack_param = attack;
  config.epsilon = spec.epsilon;
  config.shared_seed = Rng::mix(run_seed, 2);

  EpisodeOptions options;
  options.checkpoints = spec.checkpoints;
  const RunTrace trace = run_episode(config, losses, options);

  RunResult r;
  r.run_id = run_id;
  r.seed = run_seed;
  r.regret_at_checkpoint = trace.regret_at_checkpoint;
  r.final_estimate = trace.final_estimates[0];
  r.attack_param_used = attack;
  r.comm_slots = trace.total_comm_slots;
  r.explore_collisions = trace.explore_collisions;
  r.sync_failures = trace.sync_failures;
  return r;
}

}  // namespace

RegretReport monte_carlo(const ExperimentSpec& spec) {
  if (spec.run_seeds.empty())
    throw std::invalid_argument("harness: need at least one run seed");
  ExperimentSpec local = spec;
  if (local.checkpoints.empty()) local.checkpoints = {local.horizon};
  check_checkpoints(local.checkpoints, local.horizon);
  if (local.protocol_label.empty()) local.protocol_label = to_string(local.protocol);
  if (local.environment_label.empty())
    local.environment_label = local.adversary.label();

  const int n_runs = static_cast<int>(local.run_seeds.size());
  std::vector<RunResult> results(static_cast<std::size_t>(n_runs));
  const int workers =
      std::max(1, std::min(local.threads, n_runs));
  if (workers == 1) {
    for (int i = 0; i < n_runs; ++i)
      results[static_cast<std::size_t>(i)] = execute_run(local, i);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto work = [&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_runs || failed.load()) return;
        try {
          results[static_cast<std::size_t>(i)] = execute_run(local, i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(failure);
  }

  RegretReport report;
  report.protocol_label = local.protocol_label;
  report.environment_label = local.environment_label;
  report.checkpoints = local.checkpoints;
  report.n_runs = n_runs;
  report.runs = std::move(results);
  const std::size_t n_cp = local.checkpoints.size();
  report.mean_regret.assign(n_cp, 0.0);
  report.std_regret.assign(n_cp, 0.0);
  for (std::size_t c = 0; c < n_cp; ++c) {
    double mean = 0.0;
    for (const RunResult& r : report.runs) mean += r.regret_at_checkpoint[c];
    mean /= n_runs;
    double var = 0.0;
    for (const RunResult& r : report.runs) {
      const double d = r.regret_at_checkpoint[c] - mean;
      var += d * d;
    }
    report.mean_regret[c] = mean;
    report.std_regret[c] = n_runs > 1 ? std::sqrt(var / (n_runs - 1)) : 0.0;
  }
  return report;
}

std::string to_string(BoundModel model) {
  switch (model) {
    case BoundModel::centralized: return "centralized";
    case BoundModel::alpha_aware: return "alpha_aware";
    case BoundModel::beta_aware: return "beta_aware";
    case BoundModel::alpha_unaware: return "alpha_unaware";
    case BoundModel::beta_unaware: return "beta_unaware";
    case BoundModel::no_sensing_reference: return "no_sensing_reference";
  }
  return "unknown";
}

std::optional<BoundModel> bound_model_from_string(const std::string& name) {
  if (name == "centralized") return BoundModel::centralized;
  if (name == "alpha_aware") return BoundModel::alpha_aware;
  if (name == "beta_aware") return BoundModel::beta_aware;
  if (name == "alpha_unaware") return BoundModel::alpha_unaware;
  if (name == "beta_unaware") return BoundModel::beta_unaware;
  if (name == "no_sensing_reference") return BoundModel::no_sensing_reference;
  return std::nullopt;
}

double theory_bound(BoundModel model, int num_players, int num_arms,
                    double horizon, double attack_param, double eps) {
  // The bound formulas are plain scaling expressions, so M > K is allowed
  // here; only simulations require M <= K.
  if (num_players < 1 || num_arms < 1)
    throw std::invalid_argument("harness: bound needs M >= 1 and K >= 1");
  if (!(horizon >= 1.0))
    throw std::invalid_argument("harness: bound needs T >= 1");
  if (!(attack_param >= 0.0 && attack_param <= 1.0))
    throw std::invalid_argument("harness: attack parameter must lie in [0,1]");
  if (!(eps >= 0.0))
    throw std::invalid_argument("harness: eps must be >= 0");
  const double m = num_players;
  const double k = num_arms;
  const double t = horizon;
  switch (model) {
    case BoundModel::centralized:
      return std::sqrt(m * k * t);
    case BoundModel::alpha_aware:
      return std::pow(m, 4.0 / 3.0) * std::cbrt(k) *
             std::pow(t, (2.0 + attack_param + eps) / 3.0);
    case BoundModel::beta_aware:
      return m * m * std::pow(k, 2.0 / 3.0) *
             std::pow(t, std::max((1.0 + attack_param) / 2.0, 2.0 / 3.0));
    case BoundModel::alpha_unaware:
      return std::pow(m, 4.0 / 3.0) * std::cbrt(k) *
             std::pow(t, (5.0 + attack_param + eps) / 6.0);
    case BoundModel::beta_unaware:
      return m * m * std::cbrt(k) *
             std::pow(t, std::max((2.0 + attack_param + eps) / 3.0, 3.0 / 4.0));
    case BoundModel::no_sensing_reference:
      return m * std::pow(k, 1.5) * std::pow(t, 1.0 - 1.0 / (2.0 * m));
  }
  throw std::logic_error("harness: unknown bound model");
}

double sync_failure_probe(int num_players, int num_arms, int horizon,
                          double epsilon, std::optional<SyncAttack> attack,
                          int n_trials, std::uint64_t seed) {
  if (n_trials < 1)
    throw std::invalid_argument("harness: probe needs at least one trial");
  if (num_players < 2 || num_players > num_arms)
    throw std::invalid_argument("harness: probe needs 2 <= M <= K");

  // First phase at estimate 0: repetition length 1, so the assignment takes
  // (M-1)*K slots and each exchange round M slots (1 uplink, M-1 downlink).
  const long long assign_len =
      static_cast<long long>(num_players - 1) * num_arms;
  std::vector<double> values(
      static_cast<std::size_t>(num_arms) * horizon, 0.0);
  if (attack) {
    if (attack->round < 1)
      throw std::invalid_argument("harness: attack round must be >= 1");
    if (attack->follower < 2 || attack->follower > num_players)
      throw std::invalid_argument("harness: attacked follower must be 2..M");
    // Downlink slot of this follower in the attacked round; with repetition
    // length 1 corrupting it flips the whole broadcast copy.
    const long long slot = assign_len +
                           static_cast<long long>(attack->round - 1) * num_players +
                           1 + (attack->follower - 1);
    if (slot > horizon)
      throw std::invalid_argument("harness: attacked round beyond the horizon");
    values[static_cast<std::size_t>(attack->follower - 1) * horizon +
           static_cast<std::size_t>(slot - 1)] = 1.0;
  }
  const LossMatrix losses =
      LossMatrix::from_values(num_arms, horizon, std::move(values));

  int diverged = 0;
  for (int trial = 0; trial < n_trials; ++trial) {
    AgentConfig config;
    config.protocol = ProtocolKind::alpha_unaware;
    config.num_players = num_players;
    config.num_arms = num_arms;
    config.horizon = horizon;
    config.epsilon = epsilon;
    config.shared_seed = Rng::mix(seed, static_cast<std::uint64_t>(trial) + 1);
    const RunTrace trace = run_episode(config, losses);
    if (trace.sync_failures > 0) ++diverged;
  }
  return static_cast<double>(diverged) / n_trials;
}

void write_runs_csv(std::ostream& out, const RegretReport& report) {
  out << "protocol,environment,run_id,seed,checkpoint_t,cum_regret,"
         "final_estimate,comm_slots,explore_collisions,sync_failures\n";
  for (const RunResult& r : report.runs) {
    for (std::size_t c = 0; c < report.checkpoints.size(); ++c) {
      out << report.protocol_label << ',' << report.environment_label << ','
          << r.run_id << ',' << r.seed << ',' << report.checkpoints[c] << ','
          << format_double(r.regret_at_checkpoint[c]) << ','
          << format_double(r.final_estimate) << ',' << r.comm_slots << ','
          << r.explore_collisions << ',' << r.sync_failures << '\n';
    }
  }
}

void write_aggregate_csv(std::ostream& out, const RegretReport& report) {
  out << "protocol,environment,checkpoint_t,mean_regret,std_regret,n_runs\n";
  for (std::size_t c = 0; c < report.checkpoints.size(); ++c) {
    out << report.protocol_label << ',' << report.environment_label << ','
        << report.checkpoints[c] << ',' << format_double(report.mean_regret[c])
        << ',' << format_double(report.std_regret[c]) << ',' << report.n_runs
        << '\n';
  }
}

}  // namespace mpmab

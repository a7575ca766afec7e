#include "mpmab/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpmab {

namespace {

void check_core(int num_players, int num_arms, int horizon) {
  if (num_arms < 2 || num_players < 2 || num_players > num_arms)
    throw std::invalid_argument("protocol: cooperative play needs 2 <= M <= K");
  if (horizon < 1) throw std::invalid_argument("protocol: horizon must be >= 1");
}

// ceil with a tiny downward guard so that powers that are integers
// analytically (pow can land a few ulp above them) do not round up.
long long ceil_guarded(double v) {
  const double g = std::ceil(v - 4e-9 * (std::fabs(v) + 1.0));
  if (g > 1073741824.0) return 1LL << 30;
  const long long r = static_cast<long long>(g);
  return r < 1 ? 1 : r;
}

double phase_eta(int num_players, int num_arms, int horizon, int tau) {
  return std::sqrt(log_binomial(num_arms, num_players) * tau /
                   (static_cast<double>(num_players) * num_arms * horizon));
}

}  // namespace

std::string to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::alpha_aware: return "alpha_aware";
    case ProtocolKind::beta_aware: return "beta_aware";
    case ProtocolKind::alpha_unaware: return "alpha_unaware";
    case ProtocolKind::beta_unaware: return "beta_unaware";
    case ProtocolKind::parallel_exp3: return "parallel_exp3";
  }
  return "unknown";
}

std::optional<ProtocolKind> protocol_from_string(const std::string& name) {
  if (name == "alpha_aware") return ProtocolKind::alpha_aware;
  if (name == "beta_aware") return ProtocolKind::beta_aware;
  if (name == "alpha_unaware") return ProtocolKind::alpha_unaware;
  if (name == "beta_unaware") return ProtocolKind::beta_unaware;
  if (name == "parallel_exp3") return ProtocolKind::parallel_exp3;
  return std::nullopt;
}

long long ceil_power(double base, double exponent) {
  if (!(base >= 1.0))
    throw std::invalid_argument("protocol: power base must be >= 1");
  return ceil_guarded(std::pow(base, exponent));
}

ProtocolParams params_alpha_aware(int num_players, int num_arms, int horizon,
                                  double alpha, double eps) {
  check_core(num_players, num_arms, horizon);
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("protocol: run exponent must lie in [0,1]");
  if (!(eps > 0.0))
    throw std::invalid_argument("protocol: coding margin must be > 0");
  const double ln_k = std::log(static_cast<double>(num_arms));
  ProtocolParams p;
  p.tau = static_cast<int>(ceil_guarded(
      std::pow(num_players, 2.0 / 3.0) * std::pow(num_arms, -1.0 / 3.0) *
      std::cbrt(ln_k) *
      std::pow(horizon, (1.0 + 2.0 * alpha + 2.0 * eps) / 3.0)));
  p.h = static_cast<int>(ceil_power(horizon, alpha + eps));
  p.eta = phase_eta(num_players, num_arms, horizon, p.tau);
  p.epsilon_step = eps;
  return p;
}

ProtocolParams params_beta_aware(int num_players, int num_arms, int horizon,
                                 double beta) {
  check_core(num_players, num_arms, horizon);
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("protocol: count exponent must lie in [0,1]");
  const double ln_k = std::log(static_cast<double>(num_arms));
  ProtocolParams p;
  p.tau = static_cast<int>(ceil_guarded(
      std::pow(num_arms, 1.0 / 3.0) / std::cbrt(ln_k) *
      std::pow(horizon, std::max(beta, 1.0 / 3.0))));
  p.nu = std::max((3.0 * beta - 1.0) / 2.0, 0.0);
  p.k_code = static_cast<int>(ceil_power(horizon, p.nu));
  p.eta = phase_eta(num_players, num_arms, horizon, p.tau);
  return p;
}

ProtocolParams params_alpha_unaware(int num_players, int num_arms, int horizon,
                                    double alpha_est) {
  check_core(num_players, num_arms, horizon);
  if (!(alpha_est >= 0.0 && alpha_est <= 1.0))
    throw std::invalid_argument(
        "protocol: run exponent estimate must lie in [0,1]");
  const double ln_k = std::log(static_cast<double>(num_arms));
  ProtocolParams p;
  p.tau = static_cast<int>(ceil_guarded(
      std::pow(num_players, 2.0 / 3.0) * std::pow(num_arms, -1.0 / 3.0) /
      std::cbrt(ln_k) * std::pow(horizon, (2.0 + alpha_est) / 3.0)));
  p.xi = (1.0 - alpha_est) / 2.0;
  p.h = static_cast<int>(ceil_power(horizon, alpha_est));
  p.eta = phase_eta(num_players, num_arms, horizon, p.tau);
  return p;
}

ProtocolParams params_beta_unaware(int num_players, int num_arms, int horizon,
                                   double beta_est) {
  check_core(num_players, num_arms, horizon);
  if (!(beta_est >= 0.25 && beta_est <= 1.0))
    throw std::invalid_argument(
        "protocol: count exponent estimate must lie in [1/4, 1]");
  const double ln_k = std::log(static_cast<double>(num_arms));
  ProtocolParams p;
  p.tau = static_cast<int>(ceil_guarded(
      std::pow(num_arms, -1.0 / 3.0) / std::cbrt(ln_k) *
      std::pow(horizon, (1.0 + 2.0 * beta_est) / 3.0)));
  p.nu = (4.0 * beta_est - 1.0) / 3.0;
  p.k_code = static_cast<int>(ceil_power(horizon, p.nu));
  p.xi = (2.0 - 2.0 * beta_est) / 3.0;
  p.sync_len = static_cast<int>(ceil_power(horizon, beta_est));
  p.attack_budget = ceil_power(horizon, beta_est);
  p.update_period = static_cast<int>(
      ceil_guarded(std::pow(horizon, beta_est) / p.k_code));
  p.eta = phase_eta(num_players, num_arms, horizon, p.tau);
  return p;
}

int sync_round_count(double xi, int horizon, Rng& shared) {
  if (!(xi >= 0.0))
    throw std::invalid_argument("protocol: sync exponent must be >= 0");
  if (horizon < 1) throw std::invalid_argument("protocol: horizon must be >= 1");
  const long long n_max = ceil_power(horizon, xi);
  return 1 + static_cast<int>(
                 shared.next_below(static_cast<std::uint64_t>(n_max)));
}

double escalate(double estimate, bool error_flag, double eps) {
  if (!(eps > 0.0))
    throw std::invalid_argument("protocol: escalation step must be > 0");
  if (!(estimate >= 0.0 && estimate <= 1.0))
    throw std::invalid_argument("protocol: estimate must lie in [0,1]");
  return error_flag ? std::min(estimate + eps, 1.0) : estimate;
}

Agent::Agent(const AgentConfig& config, int player_index, Role role)
    : protocol_(config.protocol),
      role_(role),
      player_(player_index),
      num_players_(config.num_players),
      num_arms_(config.num_arms),
      horizon_(config.horizon),
      epsilon_(config.epsilon),
      estimate_(0.0),
      rng_private_(config.private_seeds.empty()
                       ? Rng::mix(config.shared_seed ^ 0x70a2c2u,
                                  static_cast<std::uint64_t>(player_index))
                       : config.private_seeds[static_cast<std::size_t>(
                             player_index - 1)]),
      rng_shared_(config.shared_seed),
      est_state_(make_estimator(config.num_arms)) {
  switch (protocol_) {
    case ProtocolKind::alpha_aware:
    case ProtocolKind::beta_aware:
      estimate_ = config.attack_param;
      break;
    case ProtocolKind::alpha_unaware:
    case ProtocolKind::parallel_exp3:
      estimate_ = 0.0;
      break;
    case ProtocolKind::beta_unaware:
      estimate_ = 0.25;
      break;
  }
  assignment_.assign(static_cast<std::size_t>(num_players_), 0);
  params_ = compute_params();  // fail fast on a bad configuration
}

int Agent::step(const std::optional<Observation>& last_obs, int t) {
  if (t != static_cast<int>(slots_emitted_) + 1)
    throw std::logic_error("protocol: slot index must advance by exactly 1");
  if (last_obs.has_value() != (t > 1))
    throw std::logic_error(
        "protocol: each slot after the first needs the previous observation");
  if (last_obs) {
    if (last_obs->arm != last_arm_)
      throw std::logic_error("protocol: observation is for a different arm");
    consume(*last_obs);
  }
  while (seg_.applied >= seg_.len) advance();
  return emit();
}

void Agent::consume(const Observation& obs) {
  ++seg_.applied;
  if (seg_.op == Op::listen)
    rx_.push_back(obs.loss == 1.0 ? 1 : 0);
  else if (seg_.op == Op::explore)
    explore_loss_ += obs.loss;
}

int Agent::emit() {
  int arm = player_;
  bool entry = false;
  switch (seg_.op) {
    case Op::send: {
      const int digit = static_cast<int>(seg_.emitted / seg_.rep);
      int bit = 0;
      switch (seg_.form) {
        case SendForm::constant:
          bit = seg_.payload;
          break;
        case SendForm::index: {
          const int width = index_bits(num_arms_);
          bit = ((seg_.payload - 1) >> (width - 1 - digit)) & 1;
          break;
        }
        case SendForm::onehot:
          bit = digit == seg_.payload - 1;
          break;
      }
      // Bit 1: pull the receiver's listening arm; bit 0: stay home.
      arm = bit ? seg_.arm : player_;
      break;
    }
    case Op::listen:
    case Op::wait:
      arm = player_;
      break;
    case Op::explore:
      arm = seg_.arm;
      entry = seg_.emitted == 0;
      break;
  }
  ++seg_.emitted;
  ++slots_emitted_;
  last_arm_ = arm;
  diag_.slot_kind = seg_.kind;
  diag_.phase = phase_;
  diag_.estimate = estimate_;
  diag_.assigned_arm = role_ == Role::leader ? assignment_[0] : assigned_;
  diag_.explore_entry = entry;
  return arm;
}

void Agent::advance() {
  switch (protocol_) {
    case ProtocolKind::alpha_aware: advance_alpha_aware(); break;
    case ProtocolKind::beta_aware: advance_beta_aware(); break;
    case ProtocolKind::alpha_unaware: advance_alpha_unaware(); break;
    case ProtocolKind::beta_unaware: advance_beta_unaware(); break;
    case ProtocolKind::parallel_exp3: advance_parallel_exp3(); break;
  }
}

ProtocolParams Agent::compute_params() const {
  switch (protocol_) {
    case ProtocolKind::alpha_aware:
      return params_alpha_aware(num_players_, num_arms_, horizon_, estimate_,
                                epsilon_);
    case ProtocolKind::beta_aware:
      return params_beta_aware(num_players_, num_arms_, horizon_, estimate_);
    case ProtocolKind::alpha_unaware:
      return params_alpha_unaware(num_players_, num_arms_, horizon_, estimate_);
    case ProtocolKind::beta_unaware:
      return params_beta_unaware(num_players_, num_arms_, horizon_, estimate_);
    case ProtocolKind::parallel_exp3: {
      ProtocolParams p;
      p.tau = 1;
      p.eta = phase_eta(1, num_arms_, horizon_, 1);
      return p;
    }
  }
  throw std::logic_error("protocol: unknown kind");
}

void Agent::begin_phase() {
  ++phase_;
  params_ = compute_params();
  explore_loss_ = 0.0;
  flag_ = 0;
  if (role_ == Role::leader) select_meta_arm_for_phase();
}

void Agent::select_meta_arm_for_phase() {
  const int subset = protocol_ == ProtocolKind::parallel_exp3 ? 1 : num_players_;
  if (subset == 1) {
    // Single-arm draw: plain categorical over the exponential weights.
    const auto& cum = est_state_.cum_est;
    double best = cum[0];
    for (double c : cum) best = std::min(best, c);
    double total = 0.0;
    scratch_w_.resize(cum.size());
    for (std::size_t i = 0; i < cum.size(); ++i) {
      scratch_w_[i] = std::exp(-params_.eta * (cum[i] - best));
      total += scratch_w_[i];
    }
    double u = rng_private_.next_double() * total;
    int arm = static_cast<int>(cum.size());
    for (std::size_t i = 0; i < cum.size(); ++i) {
      if (u < scratch_w_[i]) {
        arm = static_cast<int>(i) + 1;
        break;
      }
      u -= scratch_w_[i];
    }
    meta_arm_.arms.assign(1, arm);
    assignment_[0] = arm;
    sel_marginal_ =
        std::max(scratch_w_[static_cast<std::size_t>(arm - 1)] / total, 1e-300);
    return;
  }
  const WeightVector w = weights_from_estimates(est_state_, params_.eta);
  meta_arm_ = sample_meta_arm(w, subset, rng_private_);
  // Uniform permutation decides who plays which of the chosen arms; the
  // leader keeps position 1.
  std::vector<int> perm = meta_arm_.arms;
  for (int i = static_cast<int>(perm.size()) - 1; i > 0; --i) {
    const int j = static_cast<int>(
        rng_private_.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  for (int m = 0; m < subset; ++m)
    assignment_[static_cast<std::size_t>(m)] = perm[static_cast<std::size_t>(m)];
  sel_marginal_ = marginal(w, subset, assignment_[0]);
}

void Agent::finish_explore(bool success) {
  const int mult = protocol_ == ProtocolKind::parallel_exp3 ? 1 : num_players_;
  update_estimator(est_state_, meta_arm_, assignment_[0], explore_loss_,
                   params_.tau, sel_marginal_, mult, success);
}

void Agent::decode_assignment_from_onehot() {
  const int rep = protocol_ == ProtocolKind::alpha_unaware ? params_.h
                                                           : params_.k_code;
  const std::vector<int> s = e_decode(rx_, num_arms_, rep);
  // |S| = 1 is a clean decode; |S| > 1 a detected corruption. |S| = 0 can
  // only happen when this player has drifted out of step with the leader;
  // fall back to the home arm so play stays defined.
  if (s.size() == 1) {
    assigned_ = s[0];
  } else if (s.size() > 1) {
    assigned_ = s[static_cast<std::size_t>(
        rng_private_.next_below(static_cast<std::uint64_t>(s.size())))];
  } else {
    assigned_ = player_;
  }
  flag_ = s.size() > 1 ? 1 : 0;
  if (protocol_ == ProtocolKind::beta_unaware && s.size() > 1)
    corrupt_count_ +=
        static_cast<long long>(s.size() - 1) * params_.k_code;
}

void Agent::seg_send_const(int bit, long long digits, int rep, int target_arm,
                           SlotKind kind) {
  seg_ = {};
  seg_.op = Op::send;
  seg_.kind = kind;
  seg_.len = digits * rep;
  seg_.arm = target_arm;
  seg_.form = SendForm::constant;
  seg_.payload = bit;
  seg_.rep = rep;
}

void Agent::seg_send_index(int arm_value, int target_arm, int rep) {
  seg_ = {};
  seg_.op = Op::send;
  seg_.kind = SlotKind::assign;
  seg_.len = static_cast<long long>(index_bits(num_arms_)) * rep;
  seg_.arm = target_arm;
  seg_.form = SendForm::index;
  seg_.payload = arm_value;
  seg_.rep = rep;
}

void Agent::seg_send_onehot(int arm_value, int target_arm, int rep) {
  seg_ = {};
  seg_.op = Op::send;
  seg_.kind = SlotKind::assign;
  seg_.len = static_cast<long long>(num_arms_) * rep;
  seg_.arm = target_arm;
  seg_.form = SendForm::onehot;
  seg_.payload = arm_value;
  seg_.rep = rep;
}

void Agent::seg_listen(long long len, SlotKind kind) {
  seg_ = {};
  seg_.op = Op::listen;
  seg_.kind = kind;
  seg_.len = len;
  rx_.clear();
}

void Agent::seg_wait(long long len, SlotKind kind) {
  seg_ = {};
  seg_.op = Op::wait;
  seg_.kind = kind;
  seg_.len = len;
}

void Agent::seg_explore(int arm, long long len) {
  seg_ = {};
  seg_.op = Op::explore;
  seg_.kind = SlotKind::explore;
  seg_.arm = arm;
  seg_.len = len;
}

void Agent::advance_alpha_aware() {
  if (role_ == Role::leader) {
    switch (stage_) {
      case Stage::phase_begin:
        begin_phase();
        cur_target_ = 2;
        stage_ = Stage::assign_send;
        seg_send_index(assignment_[static_cast<std::size_t>(cur_target_ - 1)],
                       cur_target_, params_.h);
        break;
      case Stage::assign_send:
        if (cur_target_ < num_players_) {
          ++cur_target_;
          seg_send_index(assignment_[static_cast<std::size_t>(cur_target_ - 1)],
                         cur_target_, params_.h);
        } else {
          stage_ = Stage::explore;
          seg_explore(assignment_[0], params_.tau);
        }
        break;
      case Stage::explore:
        finish_explore(true);
        stage_ = Stage::phase_begin;
        seg_ = {};
        break;
      default:
        throw std::logic_error("protocol: bad leader stage");
    }
    return;
  }
  const long long block =
      static_cast<long long>(index_bits(num_arms_)) * params_.h;
  switch (stage_) {
    case Stage::phase_begin:
      begin_phase();
      stage_ = Stage::assign_wait_pre;
      seg_wait((player_ - 2) *
                   (static_cast<long long>(index_bits(num_arms_)) * params_.h),
               SlotKind::assign);
      break;
    case Stage::assign_wait_pre:
      stage_ = Stage::assign_listen;
      seg_listen(block, SlotKind::assign);
      break;
    case Stage::assign_listen:
      assigned_ = r_decode_index(rx_, num_arms_, params_.h);
      stage_ = Stage::assign_wait_post;
      seg_wait((num_players_ - player_) * block, SlotKind::assign);
      break;
    case Stage::assign_wait_post:
      stage_ = Stage::explore;
      seg_explore(assigned_, params_.tau);
      break;
    case Stage::explore:
      stage_ = Stage::phase_begin;
      seg_ = {};
      break;
    default:
      throw std::logic_error("protocol: bad follower stage");
  }
}

void Agent::advance_beta_aware() {
  if (role_ == Role::leader) {
    switch (stage_) {
      case Stage::phase_begin:
        begin_phase();
        cur_target_ = 2;
        stage_ = Stage::assign_send;
        seg_send_onehot(assignment_[static_cast<std::size_t>(cur_target_ - 1)],
                        cur_target_, params_.k_code);
        break;
      case Stage::assign_send:
        if (cur_target_ < num_players_) {
          ++cur_target_;
          seg_send_onehot(
              assignment_[static_cast<std::size_t>(cur_target_ - 1)],
              cur_target_, params_.k_code);
        } else {
          stage_ = Stage::err_listen;
          seg_listen(params_.k_code, SlotKind::sync_uplink);
        }
        break;
      case Stage::err_listen:
        flag_ = r_decode(rx_);
        stage_ = Stage::explore;
        seg_explore(assignment_[0], params_.tau);
        break;
      case Stage::explore:
        finish_explore(flag_ == 0);
        stage_ = Stage::phase_begin;
        seg_ = {};
        break;
      default:
        throw std::logic_error("protocol: bad leader stage");
    }
    return;
  }
  const long long block = static_cast<long long>(num_arms_) * params_.k_code;
  switch (stage_) {
    case Stage::phase_begin:
      begin_phase();
      stage_ = Stage::assign_wait_pre;
      seg_wait((player_ - 2) *
                   (static_cast<long long>(num_arms_) * params_.k_code),
               SlotKind::assign);
      break;
    case Stage::assign_wait_pre:
      stage_ = Stage::assign_listen;
      seg_listen(block, SlotKind::assign);
      break;
    case Stage::assign_listen:
      decode_assignment_from_onehot();
      stage_ = Stage::assign_wait_post;
      seg_wait((num_players_ - player_) * block, SlotKind::assign);
      break;
    case Stage::assign_wait_post:
      stage_ = Stage::err_send;
      seg_send_const(flag_, 1, params_.k_code, 1, SlotKind::sync_uplink);
      break;
    case Stage::err_send:
      stage_ = Stage::explore;
      seg_explore(assigned_, params_.tau);
      break;
    case Stage::explore:
      stage_ = Stage::phase_begin;
      seg_ = {};
      break;
    default:
      throw std::logic_error("protocol: bad follower stage");
  }
}

void Agent::advance_alpha_unaware() {
  if (role_ == Role::leader) {
    switch (stage_) {
      case Stage::phase_begin:
        begin_phase();
        cur_target_ = 2;
        stage_ = Stage::assign_send;
        seg_send_onehot(assignment_[static_cast<std::size_t>(cur_target_ - 1)],
                        cur_target_, params_.h);
        break;
      case Stage::assign_send:
        if (cur_target_ < num_players_) {
          ++cur_target_;
          seg_send_onehot(
              assignment_[static_cast<std::size_t>(cur_target_ - 1)],
              cur_target_, params_.h);
        } else {
          sync_rounds_ = sync_round_count(params_.xi, horizon_, rng_shared_);
          sync_q_ = 1;
          stage_ = Stage::sync_up_listen;
          seg_listen(params_.h, SlotKind::sync_uplink);
        }
        break;
      case Stage::sync_up_listen:
        flag_ = r_decode(rx_);
        cur_target_ = 2;
        stage_ = Stage::sync_down_send;
        seg_send_const(flag_, 1, params_.h, cur_target_, SlotKind::sync_downlink);
        break;
      case Stage::sync_down_send:
        if (cur_target_ < num_players_) {
          ++cur_target_;
          seg_send_const(flag_, 1, params_.h, cur_target_,
                         SlotKind::sync_downlink);
        } else if (++sync_q_ <= sync_rounds_) {
          stage_ = Stage::sync_up_listen;
          seg_listen(params_.h, SlotKind::sync_uplink);
        } else {
          estimate_ = escalate(estimate_, flag_ != 0, epsilon_);
          stage_ = Stage::explore;
          seg_explore(assignment_[0], params_.tau);
        }
        break;
      case Stage::explore:
        finish_explore(flag_ == 0);
        stage_ = Stage::phase_begin;
        seg_ = {};
        break;
      default:
        throw std::logic_error("protocol: bad leader stage");
    }
    return;
  }
  const long long block = static_cast<long long>(num_arms_) * params_.h;
  switch (stage_) {
    case Stage::phase_begin:
      begin_phase();
      stage_ = Stage::assign_wait_pre;
      seg_wait((player_ - 2) * (static_cast<long long>(num_arms_) * params_.h),
               SlotKind::assign);
      break;
    case Stage::assign_wait_pre:
      stage_ = Stage::assign_listen;
      seg_listen(block, SlotKind::assign);
      break;
    case Stage::assign_listen:
      decode_assignment_from_onehot();
      stage_ = Stage::assign_wait_post;
      seg_wait((num_players_ - player_) * block, SlotKind::assign);
      break;
    case Stage::assign_wait_post:
      sync_rounds_ = sync_round_count(params_.xi, horizon_, rng_shared_);
      sync_q_ = 1;
      stage_ = Stage::sync_up_send;
      seg_send_const(flag_, 1, params_.h, 1, SlotKind::sync_uplink);
      break;
    case Stage::sync_up_send:
      stage_ = Stage::sync_down_wait_pre;
      seg_wait(static_cast<long long>(player_ - 2) * params_.h,
               SlotKind::sync_downlink);
      break;
    case Stage::sync_down_wait_pre:
      stage_ = Stage::sync_down_listen;
      seg_listen(params_.h, SlotKind::sync_downlink);
      break;
    case Stage::sync_down_listen:
      flag_ = r_decode(rx_);
      stage_ = Stage::sync_down_wait_post;
      seg_wait(static_cast<long long>(num_players_ - player_) * params_.h,
               SlotKind::sync_downlink);
      break;
    case Stage::sync_down_wait_post:
      if (++sync_q_ <= sync_rounds_) {
        stage_ = Stage::sync_up_send;
        seg_send_const(flag_, 1, params_.h, 1, SlotKind::sync_uplink);
      } else {
        estimate_ = escalate(estimate_, flag_ != 0, epsilon_);
        stage_ = Stage::explore;
        seg_explore(assigned_, params_.tau);
      }
      break;
    case Stage::explore:
      stage_ = Stage::phase_begin;
      seg_ = {};
      break;
    default:
      throw std::logic_error("protocol: bad follower stage");
  }
}

void Agent::advance_beta_unaware() {
  if (role_ == Role::leader) {
    switch (stage_) {
      case Stage::phase_begin:
        begin_phase();
        ++phases_since_update_;
        cur_target_ = 2;
        stage_ = Stage::assign_send;
        seg_send_onehot(assignment_[static_cast<std::size_t>(cur_target_ - 1)],
                        cur_target_, params_.k_code);
        break;
      case Stage::assign_send:
        if (cur_target_ < num_players_) {
          ++cur_target_;
          seg_send_onehot(
              assignment_[static_cast<std::size_t>(cur_target_ - 1)],
              cur_target_, params_.k_code);
        } else {
          stage_ = Stage::err_listen;
          seg_listen(params_.k_code, SlotKind::sync_uplink);
        }
        break;
      case Stage::err_listen:
        flag_ = r_decode(rx_);
        if (flag_) corrupt_count_ += params_.k_code;
        if (phases_since_update_ >= params_.update_period) {
          flag2_ = corrupt_count_ >= params_.attack_budget ? 1 : 0;
          sync_rounds_ = sync_round_count(params_.xi, horizon_, rng_shared_);
          sync_q_ = 1;
          cur_target_ = 2;
          stage_ = Stage::sync_down_send;
          seg_send_const(flag2_, 1, params_.sync_len, cur_target_,
                         SlotKind::sync_downlink);
        } else {
          stage_ = Stage::explore;
          seg_explore(assignment_[0], params_.tau);
        }
        break;
      case Stage::sync_down_send:
        if (cur_target_ < num_players_) {
          ++cur_target_;
          seg_send_const(flag2_, 1, params_.sync_len, cur_target_,
                         SlotKind::sync_downlink);
        } else {
          stage_ = Stage::sync_up_listen;
          seg_listen(params_.sync_len, SlotKind::sync_uplink);
        }
        break;
      case Stage::sync_up_listen:
        flag2_ = r_decode(rx_);
        if (++sync_q_ <= sync_rounds_) {
          cur_target_ = 2;
          stage_ = Stage::sync_down_send;
          seg_send_const(flag2_, 1, params_.sync_len, cur_target_,
                         SlotKind::sync_downlink);
        } else {
          phases_since_update_ = 0;
          estimate_ = escalate(estimate_, flag2_ != 0, epsilon_);
          stage_ = Stage::explore;
          seg_explore(assignment_[0], params_.tau);
        }
        break;
      case Stage::explore:
        finish_explore(flag_ == 0);
        stage_ = Stage::phase_begin;
        seg_ = {};
        break;
      default:
        throw std::logic_error("protocol: bad leader stage");
    }
    return;
  }
  const long long block = static_cast<long long>(num_arms_) * params_.k_code;
  switch (stage_) {
    case Stage::phase_begin:
      begin_phase();
      ++phases_since_update_;
      stage_ = Stage::assign_wait_pre;
      seg_wait((player_ - 2) *
                   (static_cast<long long>(num_arms_) * params_.k_code),
               SlotKind::assign);
      break;
    case Stage::assign_wait_pre:
      stage_ = Stage::assign_listen;
      seg_listen(block, SlotKind::assign);
      break;
    case Stage::assign_listen:
      decode_assignment_from_onehot();
      stage_ = Stage::assign_wait_post;
      seg_wait((num_players_ - player_) * block, SlotKind::assign);
      break;
    case Stage::assign_wait_post:
      stage_ = Stage::err_send;
      seg_send_const(flag_, 1, params_.k_code, 1, SlotKind::sync_uplink);
      break;
    case Stage::err_send:
      if (phases_since_update_ >= params_.update_period) {
        flag2_ = corrupt_count_ >= params_.attack_budget ? 1 : 0;
        sync_rounds_ = sync_round_count(params_.xi, horizon_, rng_shared_);
        sync_q_ = 1;
        stage_ = Stage::sync_down_wait_pre;
        seg_wait(static_cast<long long>(player_ - 2) * params_.sync_len,
                 SlotKind::sync_downlink);
      } else {
        stage_ = Stage::explore;
        seg_explore(assigned_, params_.tau);
      }
      break;
    case Stage::sync_down_wait_pre:
      stage_ = Stage::sync_down_listen;
      seg_listen(params_.sync_len, SlotKind::sync_downlink);
      break;
    case Stage::sync_down_listen:
      flag2_ = std::max(flag2_, static_cast<int>(r_decode(rx_)));
      stage_ = Stage::sync_down_wait_post;
      seg_wait(static_cast<long long>(num_players_ - player_) * params_.sync_len,
               SlotKind::sync_downlink);
      break;
    case Stage::sync_down_wait_post:
      stage_ = Stage::sync_up_send;
      seg_send_const(flag2_, 1, params_.sync_len, 1, SlotKind::sync_uplink);
      break;
    case Stage::sync_up_send:
      if (++sync_q_ <= sync_rounds_) {
        stage_ = Stage::sync_down_wait_pre;
        seg_wait(static_cast<long long>(player_ - 2) * params_.sync_len,
                 SlotKind::sync_downlink);
      } else {
        phases_since_update_ = 0;
        estimate_ = escalate(estimate_, flag2_ != 0, epsilon_);
        flag2_ = 0;
        stage_ = Stage::explore;
        seg_explore(assigned_, params_.tau);
      }
      break;
    case Stage::explore:
      stage_ = Stage::phase_begin;
      seg_ = {};
      break;
    default:
      throw std::logic_error("protocol: bad follower stage");
  }
}

void Agent::advance_parallel_exp3() {
  switch (stage_) {
    case Stage::phase_begin:
      begin_phase();
      stage_ = Stage::explore;
      seg_explore(assignment_[0], 1);
      break;
    case Stage::explore:
      finish_explore(true);
      stage_ = Stage::phase_begin;
      seg_ = {};
      break;
    default:
      throw std::logic_error("protocol: bad baseline stage");
  }
}

std::vector<Agent> make_agents(const AgentConfig& config) {
  if (config.num_arms < 1)
    throw std::invalid_argument("protocol: need at least one arm");
  const bool cooperative = config.protocol != ProtocolKind::parallel_exp3;
  if (cooperative) {
    if (config.num_players < 2 || config.num_players > config.num_arms)
      throw std::invalid_argument(
          "protocol: cooperative play needs 2 <= M <= K");
  } else if (config.num_players < 1 || config.num_players > config.num_arms) {
    throw std::invalid_argument("protocol: player count must lie in 1..K");
  }
  if (config.horizon < 1)
    throw std::invalid_argument("protocol: horizon must be >= 1");
  if (!config.private_seeds.empty() &&
      config.private_seeds.size() != static_cast<std::size_t>(config.num_players))
    throw std::invalid_argument("protocol: need one private seed per player");
  switch (config.protocol) {
    case ProtocolKind::alpha_aware:
      if (!(config.attack_param >= 0.0 && config.attack_param <= 1.0))
        throw std::invalid_argument(
            "protocol: run exponent must lie in [0,1]");
      if (!(config.epsilon > 0.0))
        throw std::invalid_argument("protocol: coding margin must be > 0");
      break;
    case ProtocolKind::beta_aware:
      if (!(config.attack_param >= 0.0 && config.attack_param <= 1.0))
        throw std::invalid_argument(
            "protocol: count exponent must lie in [0,1]");
      break;
    case ProtocolKind::alpha_unaware:
    case ProtocolKind::beta_unaware:
      if (!(config.epsilon > 0.0))
        throw std::invalid_argument("protocol: escalation step must be > 0");
      break;
    case ProtocolKind::parallel_exp3:
      break;
  }
  std::vector<Agent> agents;
  agents.reserve(static_cast<std::size_t>(config.num_players));
  for (int m = 1; m <= config.num_players; ++m) {
    const Role role =
        cooperative && m > 1 ? Role::follower : Role::leader;
    agents.emplace_back(config, m, role);
  }
  return agents;
}

std::vector<Agent> baseline_parallel_exp3(int num_players, int num_arms,
                                          int horizon, std::uint64_t seed) {
  AgentConfig c;
  c.protocol = ProtocolKind::parallel_exp3;
  c.num_players = num_players;
  c.num_arms = num_arms;
  c.horizon = horizon;
  c.shared_seed = seed;
  return make_agents(c);
}

}  // namespace mpmab

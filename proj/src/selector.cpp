#include "mpmab/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mpmab/scaled_real.hpp"

namespace mpmab {

namespace {

void check_subset_size(int subset_size, int num_arms) {
  if (subset_size < 0 || subset_size > num_arms)
    throw std::invalid_argument("selector: subset size must lie in 0..K");
}

std::vector<ScaledReal> scaled_weights(const WeightVector& weights) {
  std::vector<ScaledReal> w;
  w.reserve(weights.log_weights.size());
  for (double lw : weights.log_weights) w.push_back(ScaledReal::from_log(lw));
  return w;
}

// Suffix table: table[j][i] = e_j(w_i, ..., w_{K-1}) for j = 0..subset_size,
// i = 0..K (e_0 = 1, empty suffix contributes 0 for j >= 1). Laid out as
// (subset_size + 1) rows of (K + 1) entries.
std::vector<ScaledReal> suffix_table(const std::vector<ScaledReal>& w,
                                     int subset_size) {
  const int k_count = static_cast<int>(w.size());
  std::vector<ScaledReal> table(
      static_cast<std::size_t>(subset_size + 1) * (k_count + 1));
  auto at = [&](int j, int i) -> ScaledReal& {
    return table[static_cast<std::size_t>(j) * (k_count + 1) + i];
  };
  for (int i = 0; i <= k_count; ++i) at(0, i) = ScaledReal::one();
  for (int j = 1; j <= subset_size; ++j)
    for (int i = k_count - 1; i >= 0; --i)
      at(j, i) = at(j, i + 1) + w[static_cast<std::size_t>(i)] * at(j - 1, i + 1);
  return table;
}

}  // namespace

EstimatorState make_estimator(int num_arms) {
  if (num_arms < 1) throw std::invalid_argument("selector: need at least one arm");
  EstimatorState s;
  s.cum_est.assign(static_cast<std::size_t>(num_arms), 0.0);
  return s;
}

WeightVector weights_from_estimates(const EstimatorState& state, double eta) {
  if (!(eta >= 0.0))
    throw std::invalid_argument("selector: eta must be >= 0");
  if (state.cum_est.empty())
    throw std::invalid_argument("selector: estimator has no arms");
  WeightVector w;
  w.log_weights.resize(state.cum_est.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < state.cum_est.size(); ++i) {
    w.log_weights[i] = -eta * state.cum_est[i];
    best = std::max(best, w.log_weights[i]);
  }
  for (double& lw : w.log_weights) lw -= best;
  return w;
}

std::vector<double> elementary_symmetric(const std::vector<double>& weights,
                                         int subset_size) {
  check_subset_size(subset_size, static_cast<int>(weights.size()));
  for (double v : weights)
    if (!(v >= 0.0))
      throw std::invalid_argument("selector: weights must be >= 0");
  std::vector<ScaledReal> e(static_cast<std::size_t>(subset_size) + 1);
  e[0] = ScaledReal::one();
  int seen = 0;
  for (double v : weights) {
    const ScaledReal w = ScaledReal::from_double(v);
    ++seen;
    for (int j = std::min(subset_size, seen); j >= 1; --j)
      e[static_cast<std::size_t>(j)] =
          e[static_cast<std::size_t>(j)] + w * e[static_cast<std::size_t>(j - 1)];
  }
  std::vector<double> out(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) out[j] = e[j].to_double();
  return out;
}

MetaArm sample_meta_arm(const WeightVector& weights, int subset_size, Rng& rng) {
  const int k_count = static_cast<int>(weights.log_weights.size());
  if (subset_size < 1 || subset_size > k_count)
    throw std::invalid_argument("selector: subset size must lie in 1..K");
  const auto w = scaled_weights(weights);
  const auto table = suffix_table(w, subset_size);
  auto at = [&](int j, int i) -> const ScaledReal& {
    return table[static_cast<std::size_t>(j) * (k_count + 1) + i];
  };
  if (at(subset_size, 0).is_zero())
    throw std::invalid_argument(
        "selector: fewer than M arms carry nonzero weight");
  MetaArm meta;
  meta.arms.reserve(static_cast<std::size_t>(subset_size));
  int need = subset_size;
  for (int i = 0; i < k_count && need > 0; ++i) {
    // P(include arm i+1 | prefix) = w_i * e_{need-1}(suffix) / e_need(suffix)
    const ScaledReal numer = w[static_cast<std::size_t>(i)] * at(need - 1, i + 1);
    const double p = numer.ratio(at(need, i));
    if (rng.next_double() < p) {
      meta.arms.push_back(i + 1);
      --need;
    }
  }
  // When only `need` arms remain the inclusion probability is exactly 1, so
  // the loop always fills the subset; guard the |A| = M invariant anyway.
  for (int i = k_count; need > 0; --i) {
    if (std::find(meta.arms.begin(), meta.arms.end(), i) == meta.arms.end()) {
      meta.arms.push_back(i);
      --need;
    }
  }
  std::sort(meta.arms.begin(), meta.arms.end());
  return meta;
}

double marginal(const WeightVector& weights, int subset_size, int arm) {
  const int k_count = static_cast<int>(weights.log_weights.size());
  if (subset_size < 1 || subset_size > k_count)
    throw std::invalid_argument("selector: subset size must lie in 1..K");
  if (arm < 1 || arm > k_count)
    throw std::invalid_argument("selector: arm out of range");
  const auto w = scaled_weights(weights);
  // e_M over all arms.
  std::vector<ScaledReal> full(static_cast<std::size_t>(subset_size) + 1);
  std::vector<ScaledReal> rest(static_cast<std::size_t>(subset_size) + 1);
  full[0] = ScaledReal::one();
  rest[0] = ScaledReal::one();
  for (int i = 0; i < k_count; ++i) {
    for (int j = subset_size; j >= 1; --j) {
      full[static_cast<std::size_t>(j)] =
          full[static_cast<std::size_t>(j)] +
          w[static_cast<std::size_t>(i)] * full[static_cast<std::size_t>(j - 1)];
      if (i != arm - 1)
        rest[static_cast<std::size_t>(j)] =
            rest[static_cast<std::size_t>(j)] +
            w[static_cast<std::size_t>(i)] * rest[static_cast<std::size_t>(j - 1)];
    }
  }
  if (full[static_cast<std::size_t>(subset_size)].is_zero())
    throw std::invalid_argument(
        "selector: fewer than M arms carry nonzero weight");
  const ScaledReal numer =
      w[static_cast<std::size_t>(arm - 1)] *
      rest[static_cast<std::size_t>(subset_size - 1)];
  // The chosen arm was sampled, so its true inclusion probability is
  // positive; keep the double strictly positive for the importance weight.
  const double p = numer.ratio(full[static_cast<std::size_t>(subset_size)]);
  return std::max(p, 1e-300);
}

double log_binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n)
    throw std::invalid_argument("selector: bad binomial arguments");
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void update_estimator(EstimatorState& state, const MetaArm& chosen,
                      int leader_arm, double observed_cum_loss, int tau,
                      double selection_marginal, int num_players,
                      bool success) {
  const int k_count = static_cast<int>(state.cum_est.size());
  if (leader_arm < 1 || leader_arm > k_count)
    throw std::invalid_argument("selector: leader arm out of range");
  if (std::find(chosen.arms.begin(), chosen.arms.end(), leader_arm) ==
      chosen.arms.end())
    throw std::invalid_argument("selector: leader arm not in the chosen subset");
  if (tau < 1) throw std::invalid_argument("selector: tau must be >= 1");
  if (num_players < 1)
    throw std::invalid_argument("selector: player count must be >= 1");
  // Allow a whisper of accumulated rounding above the exact bound tau.
  if (!(observed_cum_loss >= 0.0 &&
        observed_cum_loss <= tau * (1.0 + 1e-12) + 1e-12))
    throw std::invalid_argument("selector: observed loss outside [0, tau]");
  if (success) {
    if (!(selection_marginal > 0.0 && selection_marginal <= 1.0 + 1e-12))
      throw std::invalid_argument("selector: marginal must lie in (0, 1]");
    state.cum_est[static_cast<std::size_t>(leader_arm - 1)] +=
        (static_cast<double>(num_players) / tau) * observed_cum_loss /
        selection_marginal;
  }
  ++state.phase;
}

}  // namespace mpmab

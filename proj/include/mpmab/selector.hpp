#pragma once

#include <vector>

#include "mpmab/rng.hpp"

namespace mpmab {

// The leader picks M distinct arms per phase with probability proportional
// to the product of per-arm exponential weights exp(-eta * cum_est). That
// distribution factorizes through elementary symmetric polynomials, which
// gives O(K*M) exact sampling and marginals without enumerating all C(K,M)
// subsets.

struct MetaArm {
  std::vector<int> arms;  // distinct, ascending, each in 1..K
};

struct EstimatorState {
  std::vector<double> cum_est;  // cumulative loss estimate per arm, index k-1
  int phase = 0;                // completed update count
};

// Per-arm log weights, shifted so the maximum is 0; the shift cancels in
// every probability.
struct WeightVector {
  std::vector<double> log_weights;
};

EstimatorState make_estimator(int num_arms);

// eta >= 0; eta = 0 gives uniform weights.
WeightVector weights_from_estimates(const EstimatorState& state, double eta);

// e_0..e_M of the given nonnegative weights. e_0 = 1. Requires
// 0 <= subset_size <= weights.size().
std::vector<double> elementary_symmetric(const std::vector<double>& weights,
                                         int subset_size);

// Draws an M-subset with P(A) = prod_{k in A} w_k / e_M(w). Requires at
// least M arms with nonzero weight.
MetaArm sample_meta_arm(const WeightVector& weights, int subset_size, Rng& rng);

// P(arm in A) = w_arm * e_{M-1}(w without arm) / e_M(w).
double marginal(const WeightVector& weights, int subset_size, int arm);

// log C(n, k) via lgamma.
double log_binomial(int n, int k);

// Importance-weighted phase update: on success adds
// (M / tau) * observed_cum_loss / selection_marginal to the leader's arm
// and nothing elsewhere; on failure (detected corruption) adds zero. The
// phase counter advances either way. leader_arm must belong to the chosen
// subset; observed_cum_loss is the sum of tau per-slot losses, so it must
// lie in [0, tau]; selection_marginal is the inclusion probability of
// leader_arm recorded when the subset was drawn.
void update_estimator(EstimatorState& state, const MetaArm& chosen,
                      int leader_arm, double observed_cum_loss, int tau,
                      double selection_marginal, int num_players, bool success);

}  // namespace mpmab

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mpmab/config.hpp"

using namespace mpmab;

namespace {

bool has_error(const ParseOutcome& outcome, int line, const char* needle) {
  return std::any_of(outcome.errors.begin(), outcome.errors.end(),
                     [&](const ConfigError& e) {
                       return e.line == line &&
                              e.message.find(needle) != std::string::npos;
                     });
}

}  // namespace

TEST_CASE("full config parses with every field") {
  const char* text =
      "# experiment\n"
      "protocol = beta_unaware\n"
      "M = 3\n"
      "K = 8\n"
      "T = 5000\n"
      "runs = 4\n"
      "seed = 99\n"
      "threads = 2\n"
      "checkpoints = 1000 2500 5000\n"
      "out_runs = a.csv\n"
      "out_aggregate = b.csv\n"
      "out_losses = l.csv\n"
      "\n"
      "[protocol]\n"
      "epsilon = 0.02\n"
      "\n"
      "[adversary]\n"
      "generator = burst\n"
      "c_low = 0.1\n"
      "c_high = 0.4\n"
      "l_high = 0.8\n"
      "burst_len = 12\n"
      "n_bursts = 7\n";
  const auto outcome = parse_config(text);
  REQUIRE(outcome.errors.empty());
  const auto& cfg = *outcome.config;
  CHECK(cfg.protocol == ProtocolKind::beta_unaware);
  CHECK(cfg.num_players == 3);
  CHECK(cfg.num_arms == 8);
  CHECK(cfg.horizon == 5000);
  CHECK(cfg.runs == 4);
  CHECK(cfg.seed == 99);
  CHECK(cfg.threads == 2);
  CHECK(cfg.checkpoints == std::vector<int>{1000, 2500, 5000});
  CHECK(cfg.out_runs == "a.csv");
  CHECK(cfg.out_aggregate == "b.csv");
  CHECK(cfg.out_losses == "l.csv");
  CHECK(std::isnan(cfg.attack_param));
  CHECK(cfg.epsilon == 0.02);
  CHECK(cfg.adversary.kind == AdversarySpec::Kind::burst);
  CHECK(cfg.adversary.c_low == 0.1);
  CHECK(cfg.adversary.c_high == 0.4);
  CHECK(cfg.adversary.l_high == 0.8);
  CHECK(cfg.adversary.burst_len == 12);
  CHECK(cfg.adversary.n_bursts == 7);
}

TEST_CASE("minimal config fills defaults") {
  const auto outcome = parse_config(
      "protocol = alpha_aware\nM = 2\nK = 5\nT = 100\n"
      "[protocol]\nattack_param = 0.3\n"
      "[adversary]\ngenerator = burst\nburst_len = 2\nn_bursts = 1\n");
  REQUIRE(outcome.errors.empty());
  const auto& cfg = *outcome.config;
  CHECK(cfg.runs == 1);
  CHECK(cfg.seed == 1);
  CHECK(cfg.threads == 1);
  CHECK(cfg.checkpoints.empty());
  CHECK(cfg.out_runs == "runs.csv");
  CHECK(cfg.out_aggregate == "aggregate.csv");
  CHECK(cfg.out_losses.empty());
  CHECK(cfg.attack_param == 0.3);
  CHECK(cfg.epsilon == 0.01);
  CHECK(cfg.adversary.c_low == 0.2);
  CHECK(cfg.adversary.c_high == 0.9);
  CHECK(cfg.adversary.l_high == 0.9);
}

TEST_CASE("every violation is reported with its line") {
  const char* text =
      "protocol = alpha_aware\n"   // 1
      "M = 6\n"                    // 2: exceeds K
      "K = 5\n"                    // 3
      "T = 100\n"                  // 4
      "runs = 0\n"                 // 5: must be >= 1
      "checkpoints = 50 20\n"      // 6: not ascending
      "[protocol]\n"               // 7
      "attack_param = 1.4\n"       // 8: out of range
      "epsilon = -1\n"             // 9: must be > 0
      "[adversary]\n"              // 10
      "generator = burst\n"        // 11
      "burst_len = 12\n"           // 12
      "n_bursts = 12\n";           // 13: 144 > T
  const auto outcome = parse_config(text);
  CHECK(!outcome.config.has_value());
  CHECK(outcome.errors.size() == 6);
  CHECK(has_error(outcome, 2, "M must not exceed K"));
  CHECK(has_error(outcome, 5, "runs"));
  CHECK(has_error(outcome, 6, "ascending"));
  CHECK(has_error(outcome, 8, "attack_param"));
  CHECK(has_error(outcome, 9, "epsilon"));
  CHECK(has_error(outcome, 13, "fit"));
}

TEST_CASE("syntax problems carry line numbers") {
  const auto outcome = parse_config(
      "protocol = alpha_aware\n"
      "M = 2\n"
      "K = 5\n"
      "K = 6\n"
      "T = ten\n"
      "what\n"
      "mystery = 3\n"
      "[nope]\n"
      "T = 100\n");
  CHECK(has_error(outcome, 4, "duplicate key 'K'"));
  // 'T = ten' counts as providing T, so there is no missing-key error on top.
  CHECK(has_error(outcome, 5, "must be an integer"));
  CHECK(has_error(outcome, 6, "expected 'key = value'"));
  CHECK(has_error(outcome, 7, "unknown key 'mystery'"));
  CHECK(has_error(outcome, 8, "unknown section [nope]"));

  // A key that only ever appears inside an unknown section does not count.
  const auto swallowed = parse_config(
      "protocol = alpha_aware\n"
      "M = 2\n"
      "K = 5\n"
      "[nope]\n"
      "T = 100\n"
      "[adversary]\n"
      "generator = burst\n");
  CHECK(has_error(swallowed, 4, "unknown section [nope]"));
  CHECK(has_error(swallowed, 0, "missing required key 'T'"));
}

TEST_CASE("missing required keys are reported") {
  const auto outcome = parse_config("M = 2\n");
  CHECK(has_error(outcome, 0, "missing required key 'protocol'"));
  CHECK(has_error(outcome, 0, "missing required key 'K'"));
  CHECK(has_error(outcome, 0, "missing required key 'T'"));
  CHECK(has_error(outcome, 0, "missing required key 'adversary.generator'"));
}

TEST_CASE("attack parameter rules by protocol") {
  const char* base =
      "M = 2\nK = 5\nT = 100\n"
      "[adversary]\ngenerator = burst\nburst_len = 2\nn_bursts = 1\n";
  {
    const auto outcome = parse_config(
        std::string("protocol = alpha_unaware\n") + base +
        "[protocol]\nattack_param = 0.5\n");
    CHECK(has_error(outcome, 10, "does not apply"));
  }
  {
    const auto outcome = parse_config(
        std::string("protocol = alpha_unaware\n") + base +
        "[protocol]\nattack_param = auto\n");
    CHECK(outcome.errors.empty());
  }
  {
    const auto outcome = parse_config(
        std::string("protocol = beta_aware\n") + base +
        "[protocol]\nattack_param = 0.5\n");
    CHECK(outcome.errors.empty());
    CHECK(outcome.config->attack_param == 0.5);
  }
}

TEST_CASE("generator-specific keys are checked") {
  const auto outcome = parse_config(
      "protocol = alpha_aware\nM = 2\nK = 2\nT = 100\n"
      "[protocol]\nattack_param = 0.3\n"
      "[adversary]\ngenerator = changepoint\n"
      "means_before = 0.2 0.8\n"
      "means_after = 0.8 0.2\n"
      "t_change = 50\n"
      "c_low = 0.5\n");
  CHECK(has_error(outcome, 12, "does not apply"));

  const auto wrong_size = parse_config(
      "protocol = alpha_aware\nM = 2\nK = 3\nT = 100\n"
      "[protocol]\nattack_param = 0.3\n"
      "[adversary]\ngenerator = changepoint\n"
      "means_before = 0.2 0.8\n"
      "means_after = 0.8 0.2\n");
  CHECK(has_error(wrong_size, 9, "K values"));

  const auto csv_needs_path = parse_config(
      "protocol = alpha_aware\nM = 2\nK = 3\nT = 100\n"
      "[protocol]\nattack_param = 0.3\n"
      "[adversary]\ngenerator = csv\n");
  CHECK(has_error(csv_needs_path, 8, "needs a path"));
}

TEST_CASE("serialization round trips exactly") {
  ExperimentConfig cfg;
  cfg.protocol = ProtocolKind::beta_unaware;
  cfg.num_players = 3;
  cfg.num_arms = 7;
  cfg.horizon = 12345;
  cfg.runs = 9;
  cfg.seed = 0xDEADBEEF;
  cfg.threads = 4;
  cfg.checkpoints = {100, 12345};
  cfg.out_losses = "l.csv";
  cfg.epsilon = 0.037;
  cfg.adversary.kind = AdversarySpec::Kind::burst;
  cfg.adversary.c_low = 1.0 / 3.0;
  cfg.adversary.c_high = 0.5;
  cfg.adversary.l_high = 0.875;
  cfg.adversary.burst_len = 11;
  cfg.adversary.n_bursts = 13;
  {
    const auto outcome = parse_config(serialize_config(cfg));
    REQUIRE(outcome.errors.empty());
    CHECK(*outcome.config == cfg);
  }

  cfg.protocol = ProtocolKind::alpha_aware;
  cfg.attack_param = 0.3;
  // Fields the changepoint serializer does not emit must sit at defaults.
  cfg.adversary = AdversarySpec{};
  cfg.adversary.kind = AdversarySpec::Kind::changepoint;
  cfg.adversary.means_before = {0.25, 0.7, 0.1, 0.2, 0.3, 0.4, 0.5};
  cfg.adversary.means_after = {0.7, 0.25, 0.1, 0.2, 0.3, 0.4, 0.5};
  cfg.adversary.t_change = 6000;
  cfg.adversary.halfwidth = 0.05;
  {
    const auto outcome = parse_config(serialize_config(cfg));
    REQUIRE(outcome.errors.empty());
    CHECK(*outcome.config == cfg);
  }

  cfg.protocol = ProtocolKind::parallel_exp3;
  cfg.attack_param = std::numeric_limits<double>::quiet_NaN();
  cfg.adversary = AdversarySpec{};
  cfg.adversary.kind = AdversarySpec::Kind::csv;
  cfg.adversary.csv_path = "some/losses.csv";
  {
    const auto outcome = parse_config(serialize_config(cfg));
    REQUIRE(outcome.errors.empty());
    CHECK(*outcome.config == cfg);
  }
}

TEST_CASE("cooperative protocols need two players") {
  const auto outcome = parse_config(
      "protocol = beta_aware\nM = 1\nK = 5\nT = 100\n"
      "[protocol]\nattack_param = 0.5\n"
      "[adversary]\ngenerator = burst\nburst_len = 2\nn_bursts = 1\n");
  CHECK(has_error(outcome, 2, "M >= 2"));

  const auto baseline = parse_config(
      "protocol = parallel_exp3\nM = 1\nK = 5\nT = 100\n"
      "[adversary]\ngenerator = burst\nburst_len = 2\nn_bursts = 1\n");
  CHECK(baseline.errors.empty());
}

TEST_CASE("checkpoints must lie within the horizon") {
  const auto outcome = parse_config(
      "protocol = beta_aware\nM = 2\nK = 5\nT = 100\n"
      "checkpoints = 60 200\n"
      "[protocol]\nattack_param = 0.5\n"
      "[adversary]\ngenerator = burst\nburst_len = 2\nn_bursts = 1\n");
  CHECK(has_error(outcome, 5, "1..T"));
}

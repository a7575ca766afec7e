#include "mpmab/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <set>
#include <sstream>

namespace mpmab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::string real_to_string(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) == v) return buf;
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool nan_equal(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return a == b;
}

}  // namespace

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.protocol == b.protocol && a.num_players == b.num_players &&
         a.num_arms == b.num_arms && a.horizon == b.horizon &&
         a.runs == b.runs && a.seed == b.seed && a.threads == b.threads &&
         a.checkpoints == b.checkpoints && a.out_runs == b.out_runs &&
         a.out_aggregate == b.out_aggregate && a.out_losses == b.out_losses &&
         nan_equal(a.attack_param, b.attack_param) && a.epsilon == b.epsilon &&
         a.adversary.kind == b.adversary.kind &&
         a.adversary.c_low == b.adversary.c_low &&
         a.adversary.c_high == b.adversary.c_high &&
         a.adversary.l_high == b.adversary.l_high &&
         a.adversary.burst_len == b.adversary.burst_len &&
         a.adversary.n_bursts == b.adversary.n_bursts &&
         a.adversary.means_before == b.adversary.means_before &&
         a.adversary.means_after == b.adversary.means_after &&
         a.adversary.t_change == b.adversary.t_change &&
         a.adversary.halfwidth == b.adversary.halfwidth &&
         a.adversary.csv_path == b.adversary.csv_path;
}

ParseOutcome parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::vector<ConfigError> errors;
  std::map<std::string, int> key_line;  // qualified key -> defining line

  auto fail = [&](int line, std::string message) {
    errors.push_back({line, std::move(message)});
  };
  auto line_of = [&](const std::string& key) {
    const auto it = key_line.find(key);
    return it == key_line.end() ? 0 : it->second;
  };

  auto parse_integer = [&](const std::string& value, int line,
                           const std::string& key) -> std::optional<long long> {
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(value.c_str(), &end, 10);
    if (errno != 0 || end != value.c_str() + value.size()) {
      fail(line, "value for '" + key + "' must be an integer");
      return std::nullopt;
    }
    return x;
  };
  auto parse_real = [&](const std::string& value, int line,
                        const std::string& key) -> std::optional<double> {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (errno != 0 || end != value.c_str() + value.size() || std::isnan(x)) {
      fail(line, "value for '" + key + "' must be a real number");
      return std::nullopt;
    }
    return x;
  };
  auto parse_u64 = [&](const std::string& value, int line,
                       const std::string& key) -> std::optional<std::uint64_t> {
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(value.c_str(), &end, 10);
    if (errno != 0 || end != value.c_str() + value.size() ||
        value.find('-') != std::string::npos) {
      fail(line, "value for '" + key + "' must be a nonnegative integer");
      return std::nullopt;
    }
    return x;
  };
  auto parse_int_list = [&](const std::string& value, int line,
                            const std::string& key) -> std::optional<std::vector<int>> {
    std::istringstream in{value};
    std::vector<int> out;
    std::string token;
    while (in >> token) {
      const auto x = parse_integer(token, line, key);
      if (!x) return std::nullopt;
      out.push_back(static_cast<int>(*x));
    }
    return out;
  };
  auto parse_real_list = [&](const std::string& value, int line,
                             const std::string& key)
      -> std::optional<std::vector<double>> {
    std::istringstream in{value};
    std::vector<double> out;
    std::string token;
    while (in >> token) {
      const auto x = parse_real(token, line, key);
      if (!x) return std::nullopt;
      out.push_back(*x);
    }
    return out;
  };

  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  bool generator_set = false;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                      : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        fail(line_no, "unterminated section header");
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "protocol" && section != "adversary")
        fail(line_no, "unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(line_no, "expected 'key = value'");
      continue;
    }
    const std::string key{trim(line.substr(0, eq))};
    const std::string value{trim(line.substr(eq + 1))};
    if (key.empty()) {
      fail(line_no, "missing key before '='");
      continue;
    }
    if (value.empty()) {
      fail(line_no, "empty value for '" + key + "'");
      continue;
    }
    const std::string qualified = section.empty() ? key : section + "." + key;
    if (key_line.count(qualified)) {
      fail(line_no, "duplicate key '" + qualified + "'");
      continue;
    }
    key_line[qualified] = line_no;

    if (section.empty()) {
      if (key == "protocol") {
        const auto p = protocol_from_string(value);
        if (!p)
          fail(line_no,
               "unknown protocol '" + value +
                   "' (alpha_aware, beta_aware, alpha_unaware, beta_unaware, "
                   "parallel_exp3)");
        else
          cfg.protocol = *p;
      } else if (key == "M") {
        if (const auto x = parse_integer(value, line_no, key))
          cfg.num_players = static_cast<int>(*x);
      } else if (key == "K") {
        if (const auto x = parse_integer(value, line_no, key))
          cfg.num_arms = static_cast<int>(*x);
      } else if (key == "T") {
        if (const auto x = parse_integer(value, line_no, key))
          cfg.horizon = static_cast<int>(*x);
      } else if (key == "runs") {
        if (const auto x = parse_integer(value, line_no, key))
          cfg.runs = static_cast<int>(*x);
      } else if (key == "seed") {
        if (const auto x = parse_u64(value, line_no, key)) cfg.seed = *x;
      } else if (key == "threads") {
        if (const auto x = parse_integer(value, line_no, key))
          cfg.threads = static_cast<int>(*x);
      } else if (key == "checkpoints") {
        if (const auto x = parse_int_list(value, line_no, key))
          cfg.checkpoints = *x;
      } else if (key == "out_runs") {
        cfg.out_runs = value;
      } else if (key == "out_aggregate") {
        cfg.out_aggregate = value;
      } else if (key == "out_losses") {
        cfg.out_losses = value;
      } else {
        fail(line_no, "unknown key '" + key + "'");
      }
    } else if (section == "protocol") {
      if (key == "attack_param") {
        if (value == "auto") {
          cfg.attack_param = std::numeric_limits<double>::quiet_NaN();
        } else if (const auto x = parse_real(value, line_no, key)) {
          cfg.attack_param = *x;
        }
      } else if (key == "epsilon") {
        if (const auto x = parse_real(value, line_no, key)) cfg.epsilon = *x;
      } else {
        fail(line_no, "unknown key '" + key + "' in [protocol]");
      }
    } else if (section == "adversary") {
      if (key == "generator") {
        if (value == "burst") {
          cfg.adversary.kind = AdversarySpec::Kind::burst;
          generator_set = true;
        } else if (value == "changepoint") {
          cfg.adversary.kind = AdversarySpec::Kind::changepoint;
          generator_set = true;
        } else if (value == "csv") {
          cfg.adversary.kind = AdversarySpec::Kind::csv;
          generator_set = true;
        } else {
          fail(line_no, "unknown generator '" + value +
                            "' (burst, changepoint, csv)");
        }
      } else if (key == "c_low") {
        if (const auto x = parse_real(value, line_no, key))
          cfg.adversary.c_low = *x;
      } else if (key == "c_high") {
        if (const auto x = parse_real(value, line_no, key))
          cfg.adversary.c_high = *x;
      } else if (key == "l_high") {
        if (const auto x = parse_real(value, line_no, key))
          cfg.adversary.l_high = *x;
      } else if (key == "burst_len") {
        if (const auto x = parse_integer(value, line_no, key))
          cfg.adversary.burst_len = static_cast<int>(*x);
      } else if (key == "n_bursts") {
        if (const auto x = parse_integer(value, line_no, key))
          cfg.adversary.n_bursts = static_cast<int>(*x);
      } else if (key == "means_before") {
        if (const auto x = parse_real_list(value, line_no, key))
          cfg.adversary.means_before = *x;
      } else if (key == "means_after") {
        if (const auto x = parse_real_list(value, line_no, key))
          cfg.adversary.means_after = *x;
      } else if (key == "t_change") {
        if (const auto x = parse_integer(value, line_no, key))
          cfg.adversary.t_change = static_cast<int>(*x);
      } else if (key == "halfwidth") {
        if (const auto x = parse_real(value, line_no, key))
          cfg.adversary.halfwidth = *x;
      } else if (key == "path") {
        cfg.adversary.csv_path = value;
      } else {
        fail(line_no, "unknown key '" + key + "' in [adversary]");
      }
    }
  }

  // Required keys.
  for (const char* required : {"protocol", "M", "K", "T"})
    if (!key_line.count(required))
      fail(0, std::string("missing required key '") + required + "'");
  if (!key_line.count("adversary.generator"))
    fail(0, "missing required key 'adversary.generator'");

  // Cross-field validation. Attribute each problem to the defining line.
  const bool cooperative = cfg.protocol != ProtocolKind::parallel_exp3;
  if (key_line.count("M") && key_line.count("protocol")) {
    if (cooperative && cfg.num_players < 2)
      fail(line_of("M"), "cooperative protocols need M >= 2");
    if (!cooperative && cfg.num_players < 1) fail(line_of("M"), "M must be >= 1");
  }
  if (key_line.count("M") && key_line.count("K") && cfg.num_players > cfg.num_arms)
    fail(line_of("M"), "M must not exceed K");
  if (key_line.count("K") && cfg.num_arms < 1) fail(line_of("K"), "K must be >= 1");
  if (key_line.count("T") && cfg.horizon < 1) fail(line_of("T"), "T must be >= 1");
  if (cfg.runs < 1) fail(line_of("runs"), "runs must be >= 1");
  if (cfg.threads < 1) fail(line_of("threads"), "threads must be >= 1");
  for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
    const int cp = cfg.checkpoints[i];
    if (cp < 1 || (cfg.horizon >= 1 && cp > cfg.horizon)) {
      fail(line_of("checkpoints"), "checkpoints must lie in 1..T");
      break;
    }
    if (i > 0 && cfg.checkpoints[i - 1] >= cp) {
      fail(line_of("checkpoints"), "checkpoints must be strictly ascending");
      break;
    }
  }
  if (!(cfg.epsilon > 0.0))
    fail(line_of("protocol.epsilon"), "epsilon must be > 0");
  if (!std::isnan(cfg.attack_param)) {
    if (!(cfg.attack_param >= 0.0 && cfg.attack_param <= 1.0))
      fail(line_of("protocol.attack_param"),
           "attack_param must lie in [0,1] or be 'auto'");
    if (cfg.protocol == ProtocolKind::alpha_unaware ||
        cfg.protocol == ProtocolKind::beta_unaware ||
        cfg.protocol == ProtocolKind::parallel_exp3)
      fail(line_of("protocol.attack_param"),
           "attack_param does not apply to protocol '" +
               to_string(cfg.protocol) + "'");
  }

  if (generator_set) {
    const auto inapplicable = [&](const char* key, bool applies) {
      const std::string qualified = std::string("adversary.") + key;
      if (!applies && key_line.count(qualified))
        fail(line_of(qualified),
             std::string("key '") + key + "' does not apply to generator '" +
                 cfg.adversary.label() + "'");
    };
    const bool is_burst = cfg.adversary.kind == AdversarySpec::Kind::burst;
    const bool is_change = cfg.adversary.kind == AdversarySpec::Kind::changepoint;
    const bool is_csv = cfg.adversary.kind == AdversarySpec::Kind::csv;
    inapplicable("c_low", is_burst);
    inapplicable("c_high", is_burst);
    inapplicable("l_high", is_burst);
    inapplicable("burst_len", !is_csv);
    inapplicable("n_bursts", !is_csv);
    inapplicable("means_before", is_change);
    inapplicable("means_after", is_change);
    inapplicable("t_change", is_change);
    inapplicable("halfwidth", is_change);
    inapplicable("path", is_csv);

    if (is_burst) {
      if (!(0.0 <= cfg.adversary.c_low && cfg.adversary.c_low <= cfg.adversary.c_high &&
            cfg.adversary.c_high <= cfg.adversary.l_high &&
            cfg.adversary.l_high <= 1.0))
        fail(line_of("adversary.c_low"),
             "need 0 <= c_low <= c_high <= l_high <= 1");
    }
    if (is_change) {
      if (cfg.adversary.means_before.size() !=
              static_cast<std::size_t>(cfg.num_arms) ||
          cfg.adversary.means_after.size() !=
              static_cast<std::size_t>(cfg.num_arms))
        fail(line_of("adversary.means_before"),
             "means_before and means_after must list K values");
      if (cfg.adversary.halfwidth < 0.0)
        fail(line_of("adversary.halfwidth"), "halfwidth must be >= 0");
      for (const auto* means :
           {&cfg.adversary.means_before, &cfg.adversary.means_after})
        for (double a : *means)
          if (!(a - cfg.adversary.halfwidth >= 0.0 &&
                a + cfg.adversary.halfwidth <= 1.0)) {
            fail(line_of("adversary.means_before"),
                 "mean +/- halfwidth must stay inside [0,1]");
            goto means_checked;
          }
    means_checked:
      if (cfg.horizon >= 1 &&
          (cfg.adversary.t_change < 1 || cfg.adversary.t_change > cfg.horizon))
        fail(line_of("adversary.t_change"), "t_change must lie in 1..T");
    }
    if (is_csv && cfg.adversary.csv_path.empty())
      fail(line_of("adversary.generator"), "generator 'csv' needs a path");
    if (!is_csv) {
      if (cfg.adversary.burst_len < 0 || cfg.adversary.n_bursts < 0)
        fail(line_of("adversary.burst_len"),
             "burst_len and n_bursts must be >= 0");
      else if (cfg.adversary.n_bursts > 0 && cfg.adversary.burst_len == 0)
        fail(line_of("adversary.n_bursts"), "n_bursts > 0 needs burst_len >= 1");
      else if (cfg.horizon >= 1 &&
               static_cast<long long>(cfg.adversary.burst_len) *
                       cfg.adversary.n_bursts >
                   cfg.horizon)
        fail(line_of("adversary.n_bursts"), "bursts do not fit the horizon");
    }
  }

  // Line-specific problems first, file-level ones last.
  std::stable_sort(errors.begin(), errors.end(),
                   [](const ConfigError& a, const ConfigError& b) {
                     const int la = a.line == 0 ? INT32_MAX : a.line;
                     const int lb = b.line == 0 ? INT32_MAX : b.line;
                     return la < lb;
                   });

  ParseOutcome outcome;
  outcome.errors = std::move(errors);
  if (outcome.errors.empty()) outcome.config = std::move(cfg);
  return outcome;
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "protocol = " << to_string(config.protocol) << '\n';
  out << "M = " << config.num_players << '\n';
  out << "K = " << config.num_arms << '\n';
  out << "T = " << config.horizon << '\n';
  out << "runs = " << config.runs << '\n';
  out << "seed = " << config.seed << '\n';
  out << "threads = " << config.threads << '\n';
  if (!config.checkpoints.empty()) {
    out << "checkpoints =";
    for (int cp : config.checkpoints) out << ' ' << cp;
    out << '\n';
  }
  if (!config.out_runs.empty()) out << "out_runs = " << config.out_runs << '\n';
  if (!config.out_aggregate.empty())
    out << "out_aggregate = " << config.out_aggregate << '\n';
  if (!config.out_losses.empty())
    out << "out_losses = " << config.out_losses << '\n';
  out << "\n[protocol]\n";
  if (std::isnan(config.attack_param)) {
    out << "attack_param = auto\n";
  } else {
    out << "attack_param = " << real_to_string(config.attack_param) << '\n';
  }
  out << "epsilon = " << real_to_string(config.epsilon) << '\n';
  out << "\n[adversary]\n";
  out << "generator = " << config.adversary.label() << '\n';
  switch (config.adversary.kind) {
    case AdversarySpec::Kind::burst:
      out << "c_low = " << real_to_string(config.adversary.c_low) << '\n';
      out << "c_high = " << real_to_string(config.adversary.c_high) << '\n';
      out << "l_high = " << real_to_string(config.adversary.l_high) << '\n';
      out << "burst_len = " << config.adversary.burst_len << '\n';
      out << "n_bursts = " << config.adversary.n_bursts << '\n';
      break;
    case AdversarySpec::Kind::changepoint: {
      auto emit_means = [&](const char* key, const std::vector<double>& v) {
        out << key << " =";
        for (double a : v) out << ' ' << real_to_string(a);
        out << '\n';
      };
      emit_means("means_before", config.adversary.means_before);
      emit_means("means_after", config.adversary.means_after);
      out << "t_change = " << config.adversary.t_change << '\n';
      out << "halfwidth = " << real_to_string(config.adversary.halfwidth) << '\n';
      out << "burst_len = " << config.adversary.burst_len << '\n';
      out << "n_bursts = " << config.adversary.n_bursts << '\n';
      break;
    }
    case AdversarySpec::Kind::csv:
      out << "path = " << config.adversary.csv_path << '\n';
      break;
  }
  return out.str();
}

ExperimentSpec to_experiment_spec(const ExperimentConfig& config) {
  ExperimentSpec spec;
  spec.protocol = config.protocol;
  spec.num_players = config.num_players;
  spec.num_arms = config.num_arms;
  spec.horizon = config.horizon;
  spec.adversary = config.adversary;
  spec.attack_param = config.attack_param;
  spec.epsilon = config.epsilon;
  spec.checkpoints =
      config.checkpoints.empty() ? std::vector<int>{config.horizon}
                                 : config.checkpoints;
  spec.threads = config.threads;
  Rng rng(config.seed);
  spec.run_seeds.reserve(static_cast<std::size_t>(config.runs));
  for (int r = 0; r < config.runs; ++r) spec.run_seeds.push_back(rng.next_u64());
  return spec;
}

}  // namespace mpmab

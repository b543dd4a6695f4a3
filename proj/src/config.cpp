#include "jeesdp/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <variant>

namespace jeesdp {

namespace {

using Field = std::variant<int TrainConfig::*, double TrainConfig::*, bool TrainConfig::*,
                           std::uint64_t TrainConfig::*>;

struct Entry {
  const char* key;
  Field field;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> kEntries = {
      {"max_length", &TrainConfig::max_length},
      {"word_dim", &TrainConfig::word_dim},
      {"contextual_dim", &TrainConfig::contextual_dim},
      {"pos_dim", &TrainConfig::pos_dim},
      {"dep_dim", &TrainConfig::dep_dim},
      {"entity_dim", &TrainConfig::entity_dim},
      {"position_dim", &TrainConfig::position_dim},
      {"sdp_length_dim", &TrainConfig::sdp_length_dim},
      {"argument_type_dim", &TrainConfig::argument_type_dim},
      {"lstm_hidden", &TrainConfig::lstm_hidden},
      {"trigger_hidden", &TrainConfig::trigger_hidden},
      {"filters", &TrainConfig::filters},
      {"window", &TrainConfig::window},
      {"max_sdp_length", &TrainConfig::max_sdp_length},
      {"identification_hidden", &TrainConfig::identification_hidden},
      {"role_hidden", &TrainConfig::role_hidden},
      {"batch_size", &TrainConfig::batch_size},
      {"dropout", &TrainConfig::dropout},
      {"l2", &TrainConfig::l2},
      {"learning_rate", &TrainConfig::learning_rate},
      {"adam_beta1", &TrainConfig::adam_beta1},
      {"adam_beta2", &TrainConfig::adam_beta2},
      {"adam_epsilon", &TrainConfig::adam_epsilon},
      {"epochs", &TrainConfig::epochs},
      {"patience", &TrainConfig::patience},
      {"seed", &TrainConfig::seed},
      {"threads", &TrainConfig::threads},
      {"init_scale", &TrainConfig::init_scale},
      {"sdp_mask", &TrainConfig::sdp_mask},
      {"gcn", &TrainConfig::gcn},
      {"attention", &TrainConfig::attention},
      {"identification_head", &TrainConfig::identification_head},
      {"hard_trigger_onehot", &TrainConfig::hard_trigger_onehot},
      {"entity_projection", &TrainConfig::entity_projection},
      {"use_contextual", &TrainConfig::use_contextual},
      {"use_word", &TrainConfig::use_word},
      {"use_entity", &TrainConfig::use_entity},
      {"use_pos", &TrainConfig::use_pos},
      {"use_dep", &TrainConfig::use_dep},
      {"word_vectors_trainable", &TrainConfig::word_vectors_trainable},
  };
  return kEntries;
}

const std::vector<std::pair<const char*, std::string RunConfig::*>>& path_entries() {
  static const std::vector<std::pair<const char*, std::string RunConfig::*>> kPaths = {
      {"corpus", &RunConfig::corpus},
      {"dev", &RunConfig::dev},
      {"test", &RunConfig::test},
      {"word_vectors", &RunConfig::word_vectors},
      {"contextual_vectors", &RunConfig::contextual_vectors},
      {"checkpoint_out", &RunConfig::checkpoint_out},
      {"metrics_out", &RunConfig::metrics_out},
  };
  return kPaths;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string render(const TrainConfig& cfg, const Field& f) {
  return std::visit(
      [&](auto member) -> std::string {
        using T = std::remove_cvref_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<T, bool>) {
          return (cfg.*member) ? "on" : "off";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(cfg.*member);
        } else {
          return std::to_string(cfg.*member);
        }
      },
      f);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError("invalid value '" + text + "' for key '" + key + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "on" || text == "true" || text == "1" || text == "yes") return true;
  if (text == "off" || text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("invalid boolean '" + text + "' for key '" + key + "' (use on/off)");
}

void assign(TrainConfig& cfg, const std::string& key, const Field& f, const std::string& text) {
  std::visit(
      [&](auto member) {
        using T = std::remove_cvref_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<T, bool>) {
          cfg.*member = parse_bool(key, text);
        } else {
          cfg.*member = parse_number<T>(key, text);
        }
      },
      f);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void check(const TrainConfig& c) {
  auto positive = [](const char* key, double v) {
    if (!(v > 0)) throw ConfigError(std::string("key '") + key + "' must be positive");
  };
  positive("max_length", c.max_length);
  positive("lstm_hidden", c.lstm_hidden);
  positive("trigger_hidden", c.trigger_hidden);
  positive("filters", c.filters);
  positive("window", c.window);
  positive("batch_size", c.batch_size);
  positive("learning_rate", c.learning_rate);
  positive("threads", c.threads);
  if (c.window % 2 == 0) throw ConfigError("key 'window' must be odd");
  if (c.dropout < 0 || c.dropout >= 1) throw ConfigError("key 'dropout' must be in [0, 1)");
  if (c.l2 < 0) throw ConfigError("key 'l2' must be non-negative");
  if (c.max_sdp_length < 0) throw ConfigError("key 'max_sdp_length' must be non-negative");
  if (c.epochs < 0 || c.patience < 0) throw ConfigError("keys 'epochs' and 'patience' must be non-negative");
}

}  // namespace

std::vector<std::pair<std::string, std::string>> config_defaults() {
  std::vector<std::pair<std::string, std::string>> out;
  const RunConfig defaults;
  for (const auto& [key, member] : path_entries()) out.emplace_back(key, defaults.*member);
  for (const auto& e : entries()) out.emplace_back(e.key, render(defaults.train, e.field));
  return out;
}

std::string describe_config_keys() {
  std::ostringstream os;
  for (const auto& [k, v] : config_defaults()) os << "  " << k << " = " << (v.empty() ? "(unset)" : v) << '\n';
  return os.str();
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, member] : path_entries()) {
    if (key == name) {
      cfg.*member = value;
      return;
    }
  }
  for (const auto& e : entries()) {
    if (key == e.key) {
      assign(cfg.train, key, e.field, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  check(cfg.train);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_run_config(in);
}

std::map<std::string, std::string> to_key_values(const TrainConfig& cfg) {
  std::map<std::string, std::string> kv;
  for (const auto& e : entries()) kv[e.key] = render(cfg, e.field);
  return kv;
}

TrainConfig from_key_values(const std::map<std::string, std::string>& kv) {
  TrainConfig cfg;
  for (const auto& [k, v] : kv) {
    bool found = false;
    for (const auto& e : entries()) {
      if (k == e.key) {
        assign(cfg, k, e.field, v);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("unknown config key '" + k + "'");
  }
  check(cfg);
  return cfg;
}

}  // namespace jeesdp

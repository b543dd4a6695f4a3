// Training/model configuration and the flat key=value run-config format.
#ifndef JEESDP_CONFIG_HPP_
#define JEESDP_CONFIG_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace jeesdp {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Defaults follow the published hyperparameter table.
struct TrainConfig {
  // widths
  int max_length = 50;
  int word_dim = 300;
  int contextual_dim = 768;
  int pos_dim = 15;
  int dep_dim = 15;
  int entity_dim = 10;
  int position_dim = 10;
  int sdp_length_dim = 10;
  int argument_type_dim = 10;
  int lstm_hidden = 64;
  int trigger_hidden = 256;
  int filters = 50;
  int window = 3;
  int max_sdp_length = 10;
  int identification_hidden = 256;
  int role_hidden = 512;

  // optimisation
  int batch_size = 32;
  double dropout = 0.5;
  double l2 = 1e-4;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int epochs = 100;
  int patience = 10;
  std::uint64_t seed = 1;
  int threads = 1;
  double init_scale = 0.05;

  // architecture switches
  bool sdp_mask = true;
  bool gcn = true;
  bool attention = true;
  bool identification_head = false;
  bool hard_trigger_onehot = false;
  bool entity_projection = true;

  // input channels
  bool use_contextual = true;
  bool use_word = true;
  bool use_entity = true;
  bool use_pos = true;
  bool use_dep = true;
  bool word_vectors_trainable = false;  // applies to vectors loaded from a file

  int bio_width(int num_subtypes) const { return 2 * num_subtypes + 1; }
};

// TrainConfig plus file locations, as read from a run-config file.
struct RunConfig {
  TrainConfig train;
  std::string corpus;
  std::string dev;
  std::string test;
  std::string word_vectors;
  std::string contextual_vectors;
  std::string checkpoint_out = "model.jsdp";
  std::string metrics_out = "metrics.jsonl";
};

// Every key with its default rendered as text, in a stable order.
std::vector<std::pair<std::string, std::string>> config_defaults();
std::string describe_config_keys();

// `#` starts a comment; blank lines are ignored; unknown keys are errors.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

// Model/optimiser keys only (no paths), as stored in checkpoints.
std::map<std::string, std::string> to_key_values(const TrainConfig& cfg);
TrainConfig from_key_values(const std::map<std::string, std::string>& kv);

}  // namespace jeesdp

#endif  // JEESDP_CONFIG_HPP_

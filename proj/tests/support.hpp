// Shared fixtures for the unit tests and the acceptance binary.
#ifndef JEESDP_TESTS_SUPPORT_HPP_
#define JEESDP_TESTS_SUPPORT_HPP_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jeesdp/config.hpp"
#include "jeesdp/corpus.hpp"

namespace jeesdp::testing {

inline std::string data_path(const std::string& name) { return std::string(JEESDP_TEST_DATA) + "/" + name; }

// The Bush/Putin/summit sentence with its three events.
inline Sentence running_example() { return load_corpus(data_path("running_example.jsonl")).sentences.at(0); }

inline int token_index(const Sentence& s, const std::string& text) {
  for (int i = 0; i < s.size(); ++i) {
    if (s.tokens[static_cast<std::size_t>(i)].text == text) return i;
  }
  return -1;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("jeesdp-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& contents) const {
    std::ofstream(file(name), std::ios::binary) << contents;
    return file(name);
  }

 private:
  std::filesystem::path path_;
};

// Narrow widths so whole-model tests run in well under a second per epoch.
inline TrainConfig micro_config() {
  TrainConfig c;
  c.max_length = 20;
  c.use_contextual = false;
  c.word_dim = 8;
  c.pos_dim = 4;
  c.dep_dim = 4;
  c.entity_dim = 4;
  c.position_dim = 4;
  c.sdp_length_dim = 4;
  c.argument_type_dim = 4;
  c.lstm_hidden = 8;
  c.trigger_hidden = 16;
  c.filters = 8;
  c.role_hidden = 16;
  c.identification_hidden = 8;
  c.dropout = 0.0;
  c.l2 = 0.0;
  c.batch_size = 8;
  c.learning_rate = 0.01;
  c.epochs = 5;
  c.patience = 100;
  return c;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace jeesdp::testing

#endif  // JEESDP_TESTS_SUPPORT_HPP_

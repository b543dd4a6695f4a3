// Binary model files: "JSDP", u32 little-endian header length, JSON header,
// then every parameter as little-endian float32 in manifest order.
#ifndef JEESDP_CHECKPOINT_HPP_
#define JEESDP_CHECKPOINT_HPP_

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "jeesdp/model.hpp"

namespace jeesdp {

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ManifestEntry {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
};

std::string serialize_checkpoint(const Model& model);
std::unique_ptr<Model> deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Model& model, const std::string& path);
std::unique_ptr<Model> load_checkpoint(const std::string& path);

// Header fields without reading the payload into a model.
std::vector<ManifestEntry> checkpoint_manifest(const std::string& bytes);

}  // namespace jeesdp

#endif  // JEESDP_CHECKPOINT_HPP_

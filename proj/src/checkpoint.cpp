#include "jeesdp/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "jeesdp/io.hpp"
#include "json.hpp"

namespace jeesdp {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr char kMagic[4] = {'J', 'S', 'D', 'P'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

ordered_json header_of(const Model& m) {
  ordered_json h;
  h["format_version"] = kCheckpointVersion;
  ordered_json cfg;
  for (const auto& [k, v] : to_key_values(m.config())) cfg[k] = v;
  h["config"] = cfg;
  const auto& voc = m.vocab();
  h["vocab"] = {{"trigger_subtypes", voc.trigger_subtypes()},
                {"roles", std::vector<std::string>(voc.roles().begin() + 1, voc.roles().end())},
                {"entity_types", voc.entity_types()},
                {"pos_tags", voc.pos_tags()},
                {"dep_rels", voc.dep_rels()}};
  h["words"] = m.words().words;
  ordered_json manifest = ordered_json::array();
  const auto& ps = m.params();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    manifest.push_back({{"name", ps[i].name},
                        {"shape", {ps[i].value.rows(), ps[i].value.cols()}},
                        {"trainable", ps[i].trainable}});
  }
  h["manifest"] = manifest;
  return h;
}

struct Parsed {
  json header;
  std::size_t payload_offset = 0;
};

Parsed parse(const std::string& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw CheckpointError("not a JSDP checkpoint");
  const std::uint32_t len = get_u32(bytes, 4);
  if (bytes.size() < 8 + static_cast<std::size_t>(len)) throw CheckpointError("truncated checkpoint header");
  Parsed p;
  try {
    p.header = json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint header: ") + e.what());
  }
  p.payload_offset = 8 + len;
  if (p.header.value("format_version", 0) != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint format version");
  }
  return p;
}

}  // namespace

std::string serialize_checkpoint(const Model& model) {
  static_assert(std::endian::native == std::endian::little, "payload layout assumes a little-endian host");
  const std::string header = header_of(model).dump();
  std::string out(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  const auto& ps = model.params();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& v = ps[i].value;  // row-major
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      const float f = static_cast<float>(v.data()[k]);
      char buf[4];
      std::memcpy(buf, &f, 4);
      out.append(buf, 4);
    }
  }
  return out;
}

std::vector<ManifestEntry> checkpoint_manifest(const std::string& bytes) {
  const auto p = parse(bytes);
  std::vector<ManifestEntry> out;
  for (const auto& e : p.header.at("manifest")) {
    out.push_back({e.at("name").get<std::string>(), e.at("shape").at(0).get<Eigen::Index>(),
                   e.at("shape").at(1).get<Eigen::Index>()});
  }
  return out;
}

std::unique_ptr<Model> deserialize_checkpoint(const std::string& bytes) {
  const auto p = parse(bytes);
  const auto& h = p.header;
  std::unique_ptr<Model> model;
  try {
    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : h.at("config").items()) kv[k] = v.get<std::string>();
    const auto cfg = from_key_values(kv);
    const auto& v = h.at("vocab");
    LabelVocab vocab(v.at("trigger_subtypes").get<std::vector<std::string>>(),
                     v.at("roles").get<std::vector<std::string>>(),
                     v.at("entity_types").get<std::vector<std::string>>(),
                     v.at("pos_tags").get<std::vector<std::string>>(),
                     v.at("dep_rels").get<std::vector<std::string>>());
    WordVectors words;
    words.dim = cfg.word_dim;
    for (const auto& w : h.at("words")) words.add(w.get<std::string>());
    model = std::make_unique<Model>(cfg, std::move(vocab), std::move(words));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint header: ") + e.what());
  }

  auto& ps = model->params();
  const auto& manifest = h.at("manifest");
  if (manifest.size() != ps.size()) {
    throw CheckpointError("checkpoint lists " + std::to_string(manifest.size()) + " parameters but the configured model has " +
                          std::to_string(ps.size()));
  }
  std::size_t offset = p.payload_offset;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& e = manifest[i];
    auto& param = ps[i];
    const auto rows = e.at("shape").at(0).get<Eigen::Index>();
    const auto cols = e.at("shape").at(1).get<Eigen::Index>();
    if (e.at("name").get<std::string>() != param.name || rows != param.value.rows() || cols != param.value.cols()) {
      throw CheckpointError("width mismatch at parameter '" + param.name + "': checkpoint has " +
                            e.at("name").get<std::string>() + " " + std::to_string(rows) + "x" + std::to_string(cols) +
                            ", model expects " + std::to_string(param.value.rows()) + "x" +
                            std::to_string(param.value.cols()));
    }
    param.trainable = e.value("trainable", true);
    const auto count = static_cast<std::size_t>(rows * cols);
    if (bytes.size() < offset + 4 * count) throw CheckpointError("truncated checkpoint payload");
    for (std::size_t k = 0; k < count; ++k) {
      float f;
      std::memcpy(&f, bytes.data() + offset + 4 * k, 4);
      param.value.data()[k] = static_cast<Scalar>(f);
    }
    offset += 4 * count;
  }
  if (offset != bytes.size()) throw CheckpointError("trailing bytes after checkpoint payload");
  return model;
}

void save_checkpoint(const Model& model, const std::string& path) {
  write_file_atomic(path, serialize_checkpoint(model));
}

std::unique_ptr<Model> load_checkpoint(const std::string& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const IoError& e) {
    throw CheckpointError(e.what());
  }
  return deserialize_checkpoint(bytes);
}

}  // namespace jeesdp

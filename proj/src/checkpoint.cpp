#include "slottta/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "slottta/csvio.hpp"
#include "slottta/slt_io.hpp"

namespace slottta {

using nlohmann::json;

namespace {

json config_json(const ModelConfig& c) {
  json j;
  j["height"] = c.height;
  j["width"] = c.width;
  j["enc_channels"] = c.enc_channels;
  j["conv_layers"] = c.conv_layers;
  j["ksize"] = c.ksize;
  j["slot_dim"] = c.slot_dim;
  j["slots"] = c.slots;
  j["iters"] = c.iters;
  j["dec_hidden"] = c.dec_hidden;
  j["bottleneck_free"] = c.bottleneck_free;
  return j;
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  c.height = j.at("height").get<int>();
  c.width = j.at("width").get<int>();
  c.enc_channels = j.at("enc_channels").get<int>();
  c.conv_layers = j.at("conv_layers").get<int>();
  c.ksize = j.at("ksize").get<int>();
  c.slot_dim = j.at("slot_dim").get<int>();
  c.slots = j.at("slots").get<int>();
  c.iters = j.at("iters").get<int>();
  c.dec_hidden = j.at("dec_hidden").get<int>();
  c.bottleneck_free = j.at("bottleneck_free").get<bool>();
  return c;
}

}  // namespace

std::string model_config_to_json(const ModelConfig& cfg) { return config_json(cfg).dump(); }

ModelConfig model_config_from_json(const std::string& text) {
  try {
    return config_from(json::parse(text));
  } catch (const json::exception& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const ParamRegistry<float>& params, const ModelConfig& config,
                     const std::string& snapshot_json) {
  if (params.size() == 0) throw ContractError("save_checkpoint: empty registry");
  std::ostringstream payload;
  json plist = json::array();
  for (const auto& e : params.entries()) {
    json p;
    p["name"] = e.name;
    p["tag"] = to_string(e.tag);
    p["offset"] = static_cast<uint64_t>(payload.tellp());
    plist.push_back(p);
    write_slt(payload, e.tensor);
  }
  json header;
  header["format_version"] = 1;
  header["params"] = plist;
  header["config"] = config_json(config);
  try {
    header["snapshot"] = json::parse(snapshot_json);
  } catch (const json::exception& e) {
    throw FormatError(std::string("save_checkpoint: snapshot is not valid JSON: ") + e.what());
  }
  const std::string head = header.dump();
  std::ostringstream file;
  const uint32_t len = static_cast<uint32_t>(head.size());
  char lenb[4] = {static_cast<char>(len & 0xff), static_cast<char>((len >> 8) & 0xff),
                  static_cast<char>((len >> 16) & 0xff), static_cast<char>((len >> 24) & 0xff)};
  file.write(lenb, 4);
  file << head << payload.str();
  atomic_write_file(path, file.str());
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string blob = read_file(path);
  if (blob.size() < 4) throw FormatError(path + ": truncated checkpoint");
  const uint32_t len = static_cast<uint8_t>(blob[0]) | (static_cast<uint8_t>(blob[1]) << 8) |
                       (static_cast<uint8_t>(blob[2]) << 16) | (static_cast<uint8_t>(blob[3]) << 24);
  if (blob.size() < 4 + static_cast<size_t>(len)) throw FormatError(path + ": truncated checkpoint header");
  json header;
  try {
    header = json::parse(blob.substr(4, len));
  } catch (const json::exception& e) {
    throw FormatError(path + ": bad checkpoint header: " + e.what());
  }
  Checkpoint out;
  try {
    if (header.at("format_version").get<int>() != 1)
      throw FormatError(path + ": unsupported checkpoint format version");
    out.config = config_from(header.at("config"));
    out.snapshot_json = header.at("snapshot").dump();
    const std::string payload = blob.substr(4 + static_cast<size_t>(len));
    for (const auto& p : header.at("params")) {
      const std::string name = p.at("name").get<std::string>();
      const ParamTag tag = tag_from_string(p.at("tag").get<std::string>());
      const uint64_t offset = p.at("offset").get<uint64_t>();
      if (offset > payload.size()) throw FormatError(path + ": parameter offset out of range");
      std::istringstream is(payload.substr(offset));
      out.params.add(name, tag, read_slt_f32(is, path + ":" + name));
    }
  } catch (const json::exception& e) {
    throw FormatError(path + ": bad checkpoint header: " + e.what());
  }
  return out;
}

void check_architecture(const ParamRegistry<float>& loaded, const ModelConfig& config) {
  ParamRegistry<float> expect = init_model_params<float>(config, 0);
  std::string missing, unexpected, mismatched;
  for (const auto& e : expect.entries()) {
    if (!loaded.contains(e.name)) {
      missing += (missing.empty() ? "" : ", ") + e.name;
    } else if (loaded.at(e.name).tensor.shape != e.tensor.shape) {
      mismatched += (mismatched.empty() ? "" : ", ") + e.name;
    }
  }
  for (const auto& e : loaded.entries())
    if (!expect.contains(e.name)) unexpected += (unexpected.empty() ? "" : ", ") + e.name;
  if (!missing.empty() || !unexpected.empty() || !mismatched.empty()) {
    std::string msg = "checkpoint does not match the architecture:";
    if (!missing.empty()) msg += " missing [" + missing + "]";
    if (!unexpected.empty()) msg += " unexpected [" + unexpected + "]";
    if (!mismatched.empty()) msg += " shape mismatch [" + mismatched + "]";
    throw FormatError(msg);
  }
}

}  // namespace slottta

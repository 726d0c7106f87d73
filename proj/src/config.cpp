#include "slottta/config.hpp"

#include <filesystem>

#include "json.hpp"
#include "slottta/csvio.hpp"

namespace slottta {

using nlohmann::json;

struct RunConfig::Impl {
  json values;  // flat dotted keys -> typed defaults
};

RunConfig::RunConfig() : impl_(std::make_shared<Impl>()) {
  json& v = impl_->values;
  v["seed"] = 1;
  v["threads"] = 0;

  v["data.height"] = 48;
  v["data.width"] = 48;
  v["data.train"] = 2000;
  v["data.val"] = 200;
  v["data.test_id"] = 200;
  v["data.test_ood"] = 200;

  v["model.enc_channels"] = 32;
  v["model.conv_layers"] = 4;
  v["model.ksize"] = 5;
  v["model.slot_dim"] = 64;
  v["model.slots"] = 6;
  v["model.iters"] = 3;
  v["model.dec_hidden"] = 64;
  v["model.bottleneck_free"] = false;

  v["train.lr"] = 3e-4;
  v["train.batch"] = 16;
  v["train.max_steps"] = 30000;
  v["train.eval_interval"] = 250;
  v["train.patience"] = 5;
  v["train.pixels"] = 256;
  v["train.lambda_s"] = 1.0;
  v["train.lambda_r"] = 1.0;
  v["train.clip_norm"] = 1.0;
  v["train.val_subset"] = 0;

  v["tta.steps"] = 150;
  v["tta.lr"] = 1e-4;
  v["tta.subset"] = "encoder";
  v["tta.encoder_includes_slot_attention"] = true;
  v["tta.pixels"] = 256;
  v["tta.sampling"] = "error_weighted";
  v["tta.temperature"] = 0.01;
  v["tta.error_refresh"] = 10;
  v["tta.dump_ppm"] = false;
  v["tta.trace_ari"] = false;
}

namespace {

void check_known(const json& defaults, const std::string& key) {
  if (!defaults.contains(key)) throw ConfigError("unknown configuration key '" + key + "'");
}

json coerce(const json& current, const std::string& key, const json& incoming) {
  if (current.is_boolean()) {
    if (incoming.is_boolean()) return incoming;
    if (incoming.is_string()) {
      const std::string s = incoming.get<std::string>();
      if (s == "true" || s == "1") return true;
      if (s == "false" || s == "0") return false;
    }
    if (incoming.is_number_integer()) return incoming.get<int64_t>() != 0;
    throw ConfigError("key '" + key + "' expects a boolean");
  }
  if (current.is_number_integer()) {
    if (incoming.is_number_integer()) return incoming;
    if (incoming.is_string()) {
      try {
        size_t pos = 0;
        const long long n = std::stoll(incoming.get<std::string>(), &pos);
        if (pos == incoming.get<std::string>().size()) return n;
      } catch (...) {
      }
    }
    throw ConfigError("key '" + key + "' expects an integer");
  }
  if (current.is_number_float()) {
    if (incoming.is_number()) return incoming.get<double>();
    if (incoming.is_string()) {
      try {
        size_t pos = 0;
        const double d = std::stod(incoming.get<std::string>(), &pos);
        if (pos == incoming.get<std::string>().size()) return d;
      } catch (...) {
      }
    }
    throw ConfigError("key '" + key + "' expects a number");
  }
  if (current.is_string()) {
    if (incoming.is_string()) return incoming;
    throw ConfigError("key '" + key + "' expects a string");
  }
  throw ConfigError("key '" + key + "' has unsupported type");
}

}  // namespace

void RunConfig::load_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file " + path + ": expected a JSON object of flat keys");
  for (const auto& [key, val] : j.items()) {
    check_known(impl_->values, key);
    impl_->values[key] = coerce(impl_->values[key], key, val);
  }
}

void RunConfig::apply_override(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + kv + "' is not key=value");
  const std::string key = kv.substr(0, eq);
  const std::string val = kv.substr(eq + 1);
  check_known(impl_->values, key);
  impl_->values[key] = coerce(impl_->values[key], key, json(val));
}

int RunConfig::get_int(const std::string& key) const {
  check_known(impl_->values, key);
  return impl_->values[key].get<int>();
}
double RunConfig::get_double(const std::string& key) const {
  check_known(impl_->values, key);
  return impl_->values[key].get<double>();
}
bool RunConfig::get_bool(const std::string& key) const {
  check_known(impl_->values, key);
  return impl_->values[key].get<bool>();
}
std::string RunConfig::get_string(const std::string& key) const {
  check_known(impl_->values, key);
  return impl_->values[key].get<std::string>();
}
uint64_t RunConfig::seed() const { return static_cast<uint64_t>(get_int("seed")); }
int RunConfig::threads() const { return get_int("threads"); }

std::string RunConfig::resolved_json() const { return impl_->values.dump(1); }

void RunConfig::write_snapshot(const std::string& out_dir) const {
  atomic_write_file((std::filesystem::path(out_dir) / "resolved_config.json").string(), resolved_json());
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.height = get_int("data.height");
  m.width = get_int("data.width");
  m.enc_channels = get_int("model.enc_channels");
  m.conv_layers = get_int("model.conv_layers");
  m.ksize = get_int("model.ksize");
  m.slot_dim = get_int("model.slot_dim");
  m.slots = get_int("model.slots");
  m.iters = get_int("model.iters");
  m.dec_hidden = get_int("model.dec_hidden");
  m.bottleneck_free = get_bool("model.bottleneck_free");
  return m;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.lr = get_double("train.lr");
  t.batch = get_int("train.batch");
  t.max_steps = get_int("train.max_steps");
  t.eval_interval = get_int("train.eval_interval");
  t.patience = get_int("train.patience");
  t.pixels = get_int("train.pixels");
  t.lambda_s = get_double("train.lambda_s");
  t.lambda_r = get_double("train.lambda_r");
  t.clip_norm = get_double("train.clip_norm");
  t.val_subset = get_int("train.val_subset");
  t.seed = seed();
  t.threads = threads();
  return t;
}

AdaptationConfig RunConfig::tta_config() const {
  AdaptationConfig a;
  a.steps = get_int("tta.steps");
  a.lr = get_double("tta.lr");
  a.subset = param_subset_from_string(get_string("tta.subset"));
  a.encoder_includes_slot_attention = get_bool("tta.encoder_includes_slot_attention");
  a.pixels = get_int("tta.pixels");
  a.sampling = get_string("tta.sampling");
  a.temperature = get_double("tta.temperature");
  a.error_refresh = get_int("tta.error_refresh");
  a.trace_ari = get_bool("tta.trace_ari");
  a.seed = seed();
  return a;
}

BenchmarkSizes RunConfig::benchmark_sizes() const {
  BenchmarkSizes s;
  s.train = get_int("data.train");
  s.val = get_int("data.val");
  s.test_id = get_int("data.test_id");
  s.test_ood = get_int("data.test_ood");
  return s;
}

}  // namespace slottta

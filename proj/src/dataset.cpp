#include "slottta/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "slottta/csvio.hpp"
#include "slottta/errors.hpp"
#include "slottta/rng.hpp"
#include "slottta/slt_io.hpp"

namespace slottta {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

uint64_t split_stream(const std::string& split) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : split) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

json config_to_json(const GeneratorConfig& c) {
  json j;
  j["height"] = c.height;
  j["width"] = c.width;
  j["min_objects"] = c.min_objects;
  j["max_objects"] = c.max_objects;
  j["shapes"] = c.shapes;
  json pal = json::array();
  for (const auto& p : c.palette) pal.push_back({p[0], p[1], p[2]});
  j["palette"] = pal;
  j["texture"] = c.texture;
  j["min_size"] = c.min_size;
  j["max_size"] = c.max_size;
  j["background"] = {c.background[0], c.background[1], c.background[2]};
  return j;
}

GeneratorConfig config_from_json(const json& j) {
  GeneratorConfig c;
  c.height = j.at("height").get<int>();
  c.width = j.at("width").get<int>();
  c.min_objects = j.at("min_objects").get<int>();
  c.max_objects = j.at("max_objects").get<int>();
  c.shapes = j.at("shapes").get<std::vector<std::string>>();
  c.palette.clear();
  for (const auto& p : j.at("palette")) c.palette.push_back({p[0].get<float>(), p[1].get<float>(), p[2].get<float>()});
  c.texture = j.at("texture").get<std::string>();
  c.min_size = j.at("min_size").get<float>();
  c.max_size = j.at("max_size").get<float>();
  const auto& bg = j.at("background");
  c.background = {bg[0].get<float>(), bg[1].get<float>(), bg[2].get<float>()};
  return c;
}

json meta_to_json(const SceneSample& s) {
  json j;
  j["seed"] = s.seed;
  j["objects"] = s.objects;
  json objs = json::array();
  for (const auto& m : s.meta) {
    json o;
    o["shape"] = m.shape;
    o["color"] = {m.color[0], m.color[1], m.color[2]};
    o["texture"] = m.texture;
    o["size"] = m.size;
    o["pos"] = {m.cx, m.cy};
    o["checker_phase"] = m.checker_phase;
    objs.push_back(o);
  }
  j["meta"] = objs;
  return j;
}

void meta_from_json(const json& j, SceneSample& s) {
  s.seed = j.at("seed").get<uint64_t>();
  s.objects = j.at("objects").get<int>();
  s.meta.clear();
  for (const auto& o : j.at("meta")) {
    ObjectMeta m;
    m.shape = o.at("shape").get<std::string>();
    const auto& col = o.at("color");
    m.color = {col[0].get<float>(), col[1].get<float>(), col[2].get<float>()};
    m.texture = o.at("texture").get<std::string>();
    m.size = o.at("size").get<float>();
    m.cx = o.at("pos")[0].get<float>();
    m.cy = o.at("pos")[1].get<float>();
    m.checker_phase = o.at("checker_phase").get<int>();
    s.meta.push_back(std::move(m));
  }
}

}  // namespace

Dataset generate_dataset(const GeneratorConfig& cfg, const std::string& split, int count, uint64_t global_seed) {
  Dataset ds;
  ds.manifest.split = split;
  ds.manifest.count = count;
  ds.manifest.global_seed = global_seed;
  ds.manifest.config = cfg;
  const uint64_t stream = seed_mix(global_seed, split_stream(split));
  for (int i = 0; i < count; ++i) {
    ds.samples.push_back(generate_scene(cfg, seed_mix(stream, static_cast<uint64_t>(i))));
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%05d.slt", i);
    ds.manifest.files.emplace_back(name);
  }
  return ds;
}

void write_dataset(const std::string& dir, const Dataset& ds) {
  fs::create_directories(dir);
  if (ds.manifest.files.size() != ds.samples.size())
    throw ContractError("write_dataset: manifest file list does not match sample count");

  json j;
  j["format_version"] = ds.manifest.format_version;
  j["split"] = ds.manifest.split;
  j["count"] = ds.manifest.count;
  j["global_seed"] = ds.manifest.global_seed;
  j["config"] = config_to_json(ds.manifest.config);
  j["files"] = ds.manifest.files;
  json metas = json::array();
  for (const auto& s : ds.samples) metas.push_back(meta_to_json(s));
  j["samples"] = metas;
  atomic_write_file((fs::path(dir) / "manifest.json").string(), j.dump(1));

  for (size_t i = 0; i < ds.samples.size(); ++i) {
    std::ostringstream os;
    write_slt(os, ds.samples[i].image);
    write_slt(os, ds.samples[i].mask);
    atomic_write_file((fs::path(dir) / ds.manifest.files[i]).string(), os.str());
  }
}

Dataset read_dataset(const std::string& dir) {
  const fs::path base(dir);
  const fs::path mpath = base / "manifest.json";
  if (!fs::exists(mpath)) throw FormatError("read_dataset: missing " + mpath.string());
  json j;
  try {
    j = json::parse(read_file(mpath.string()));
  } catch (const json::exception& e) {
    throw FormatError("read_dataset: " + mpath.string() + ": " + e.what());
  }
  Dataset ds;
  try {
    ds.manifest.format_version = j.at("format_version").get<int>();
    if (ds.manifest.format_version != 1)
      throw FormatError("read_dataset: unsupported format_version " +
                        std::to_string(ds.manifest.format_version));
    ds.manifest.split = j.at("split").get<std::string>();
    ds.manifest.count = j.at("count").get<int>();
    ds.manifest.global_seed = j.at("global_seed").get<uint64_t>();
    ds.manifest.config = config_from_json(j.at("config"));
    ds.manifest.files = j.at("files").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError("read_dataset: " + mpath.string() + ": " + e.what());
  }
  if (static_cast<int>(ds.manifest.files.size()) != ds.manifest.count)
    throw FormatError("read_dataset: manifest count " + std::to_string(ds.manifest.count) + " but " +
                      std::to_string(ds.manifest.files.size()) + " files listed");
  const json& metas = j.at("samples");
  if (metas.size() != ds.manifest.files.size())
    throw FormatError("read_dataset: manifest sample metadata count mismatch");

  for (size_t i = 0; i < ds.manifest.files.size(); ++i) {
    const std::string fpath = (base / ds.manifest.files[i]).string();
    std::ifstream is(fpath, std::ios::binary);
    if (!is) throw FormatError("read_dataset: missing sample file " + fpath);
    SceneSample s;
    s.image = read_slt_f32(is, fpath);
    s.mask = read_slt_f32(is, fpath);
    if (!at_eof(is)) throw FormatError(fpath + ": trailing bytes after sample records");
    if (s.image.rank() != 3 || s.image.dim(2) != 3) throw FormatError(fpath + ": image must be HxWx3");
    if (s.mask.rank() != 2 || s.mask.dim(0) != s.image.dim(0) || s.mask.dim(1) != s.image.dim(1))
      throw FormatError(fpath + ": mask shape does not match image");
    for (const float v : s.mask.data)
      if (v != std::floor(v) || v < 0) throw FormatError(fpath + ": mask values must be non-negative integers");
    meta_from_json(metas[i], s);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

BenchmarkConfigs benchmark_configs(int height, int width) {
  BenchmarkConfigs b;
  b.in_dist.height = height;
  b.in_dist.width = width;
  b.in_dist.min_objects = 2;
  b.in_dist.max_objects = 3;
  b.in_dist.shapes = {"square", "circle"};
  b.in_dist.palette = train_palette();
  b.in_dist.texture = "flat";
  b.in_dist.min_size = 0.085f * static_cast<float>(std::min(height, width));
  b.in_dist.max_size = 0.18f * static_cast<float>(std::min(height, width));

  b.ood = b.in_dist;
  b.ood.min_objects = 4;
  b.ood.max_objects = 5;
  b.ood.shapes = {"square", "circle", "triangle"};
  b.ood.palette = shifted_palette();
  b.ood.texture = "checker";
  return b;
}

void make_benchmark(const std::string& root, uint64_t seed, const BenchmarkSizes& sizes, int height, int width) {
  const BenchmarkConfigs cfgs = benchmark_configs(height, width);
  write_dataset((fs::path(root) / "train").string(),
                generate_dataset(cfgs.in_dist, "train", sizes.train, seed));
  write_dataset((fs::path(root) / "val").string(), generate_dataset(cfgs.in_dist, "val", sizes.val, seed));
  write_dataset((fs::path(root) / "test_id").string(),
                generate_dataset(cfgs.in_dist, "test_id", sizes.test_id, seed));
  write_dataset((fs::path(root) / "test_ood").string(),
                generate_dataset(cfgs.ood, "test_ood", sizes.test_ood, seed));
}

}  // namespace slottta

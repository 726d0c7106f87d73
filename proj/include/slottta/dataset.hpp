#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slottta/sprites.hpp"

// Dataset directory layout: manifest.json plus one SLT1 file per sample
// holding two records (image f32 {H,W,3}, mask f32 {H,W} of integer values).
// All paths in the manifest are relative to the directory.
namespace slottta {

struct DatasetManifest {
  int format_version = 1;
  std::string split;
  int count = 0;
  uint64_t global_seed = 0;
  GeneratorConfig config;
  std::vector<std::string> files;  // per-sample file names
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<SceneSample> samples;
};

// Deterministic: sample i is generate_scene(cfg, mix(global_seed, split, i)).
Dataset generate_dataset(const GeneratorConfig& cfg, const std::string& split, int count, uint64_t global_seed);

void write_dataset(const std::string& dir, const Dataset& ds);
Dataset read_dataset(const std::string& dir);

struct BenchmarkSizes {
  int train = 2000;
  int val = 200;
  int test_id = 200;
  int test_ood = 200;
};

struct BenchmarkConfigs {
  GeneratorConfig in_dist;  // train / val / test_id
  GeneratorConfig ood;      // more objects, new shapes, checker texture, unseen palette
};

BenchmarkConfigs benchmark_configs(int height, int width);

// Writes train/ val/ test_id/ test_ood/ under root; pure function of seed.
void make_benchmark(const std::string& root, uint64_t seed, const BenchmarkSizes& sizes, int height, int width);

}  // namespace slottta

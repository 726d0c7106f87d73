#pragma once

#include <memory>
#include <string>

#include "slottta/dataset.hpp"
#include "slottta/model.hpp"
#include "slottta/trainer.hpp"
#include "slottta/tta.hpp"

namespace slottta {

// Flat dotted-key configuration: defaults, JSON file loading, key=value
// overrides. Unknown keys are rejected; every run writes the resolved map
// next to its outputs so it can be replayed.
class RunConfig {
 public:
  RunConfig();  // defaults

  void load_file(const std::string& path);
  void apply_override(const std::string& key_eq_value);  // "tta.steps=50"

  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  uint64_t seed() const;
  int threads() const;

  std::string resolved_json() const;
  void write_snapshot(const std::string& out_dir) const;

  ModelConfig model_config() const;
  TrainConfig train_config() const;
  AdaptationConfig tta_config() const;
  BenchmarkSizes benchmark_sizes() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace slottta

#pragma once

#include <map>
#include <string>
#include <vector>

#include "slottta/adam.hpp"
#include "slottta/dataset.hpp"
#include "slottta/losses.hpp"
#include "slottta/model.hpp"

namespace slottta {

struct TrainConfig {
  double lr = 3e-4;
  int batch = 16;
  int max_steps = 30000;
  int eval_interval = 250;
  int patience = 5;   // evals without val-ARI improvement before stopping
  int pixels = 256;   // decoded pixel locations per sample per step
  double lambda_s = 1.0;
  double lambda_r = 1.0;
  double clip_norm = 1.0;  // global L2; 0 disables
  int val_subset = 0;      // 0 = full validation set
  uint64_t seed = 1;
  int threads = 0;  // 0 = auto
};

struct TrainResult {
  int steps = 0;
  double best_val_ari = -2;
  int best_step = -1;
  std::string checkpoint_path;
  std::string log_path;
};

struct SampleLoss {
  double l_seg = 0;
  double l_recon = 0;
  double total = 0;
  std::map<std::string, Tensor<float>> grads;
};

// One forward/backward on a single scene at the given pixel subset.
// `recon_only` builds the reconstruction objective alone on a guarded tape
// (used for adaptation); otherwise the combined supervised objective is
// built. Gradients are returned for `grad_names` only; empty means no
// backward pass.
SampleLoss forward_backward_sample(const SceneSample& sample, const ParamRegistry<float>& params,
                                   const ModelConfig& cfg, const std::vector<int>& pixel_subset,
                                   double lambda_s, double lambda_r,
                                   const std::vector<std::string>& grad_names, bool recon_only);

// Mean ARI of dense hard masks against ground truth over (a prefix subset
// of) a dataset.
double dataset_mean_ari(const ParamRegistry<float>& params, const ModelConfig& cfg, const Dataset& ds,
                        int subset = 0, int threads = 0);

// Supervised training: Adam over all parameters, uniform pixel subsampling,
// per-epoch shuffling, periodic dense validation ARI, best checkpoint kept.
// Writes checkpoint.slt and train_log.csv under out_dir.
TrainResult fit(const Dataset& train, const Dataset& val, const ModelConfig& mcfg, const TrainConfig& tcfg,
                const std::string& out_dir, const std::string& snapshot_json = "{}");

}  // namespace slottta

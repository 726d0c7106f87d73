#pragma once

#include <set>
#include <string>
#include <vector>

#include "slottta/dataset.hpp"
#include "slottta/model.hpp"
#include "slottta/registry.hpp"

// Per-example test-time adaptation: clone the trained parameters, run Adam on
// the reconstruction loss alone for a fixed step budget with error-weighted
// pixel sampling, and report segmentation ARI before/after plus the
// segmentation/reconstruction gradient-cosine diagnostic. Ground-truth masks
// are tagged eval-only and the adaptation tape rejects them.
namespace slottta {

enum class ParamSubset { all, encoder, norm, slot_embeddings };

ParamSubset param_subset_from_string(const std::string& s);
const char* to_string(ParamSubset s);

// The boundary of "encoder" is configurable: the conv encoder alone, or conv
// encoder plus slot-attention projections and GRU (the default).
std::set<ParamTag> resolve_subset(ParamSubset subset, bool encoder_includes_slot_attention);

struct AdaptationConfig {
  int steps = 150;
  double lr = 1e-4;
  ParamSubset subset = ParamSubset::encoder;
  bool encoder_includes_slot_attention = true;
  int pixels = 256;                         // decode budget per step
  std::string sampling = "error_weighted";  // or "uniform"
  double temperature = 0.01;
  int error_refresh = 10;  // steps between dense error-map recomputes
  uint64_t seed = 1;
  bool trace_ari = false;  // per-step dense ARI (slow, diagnostic)
};

struct AdaptationReport {
  std::vector<double> recon_trace;  // per executed step, subset reconstruction loss
  double ari_before = 0;
  double ari_after = 0;
  double grad_cosine = 0;  // seg vs recon gradients over the TTA subset, at step 0
  int steps_executed = 0;
  bool diverged = false;
  double wall_seconds = 0;
  std::vector<double> ari_trace;  // filled when trace_ari
  double recon_dense_before = 0;
  double recon_dense_after = 0;
};

struct AdaptationResult {
  ParamRegistry<float> params;
  AdaptationReport report;
};

// Cosine between the flattened subset gradients of the segmentation and
// reconstruction losses (dense decode); 0 when either norm vanishes.
double grad_cosine(const SceneSample& sample, const ParamRegistry<float>& params, const ModelConfig& cfg,
                   const std::set<ParamTag>& subset_tags);

AdaptationResult adapt_example(const SceneSample& sample, const ParamRegistry<float>& checkpoint,
                               const ModelConfig& cfg, const AdaptationConfig& acfg);

struct SuiteRow {
  std::string sample_id;
  double ari_direct = 0;
  double ari_tta = 0;
  double grad_cosine = 0;
  double recon_first = 0;
  double recon_last = 0;
  int steps = 0;
  bool diverged = false;
  bool failed = false;  // engine error; excluded from aggregates
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  double mean_direct = 0, std_direct = 0;
  double mean_tta = 0, std_tta = 0;
  double mean_cosine = 0;
};

// Runs direct inference and adaptation over a whole split. Deterministic for
// a fixed config seed regardless of thread count. When ppm_dir is non-empty,
// dumps input/composite/mask images before and after adaptation.
SuiteResult run_suite(const Dataset& ds, const ParamRegistry<float>& checkpoint, const ModelConfig& cfg,
                      const AdaptationConfig& acfg, int threads = 0, const std::string& ppm_dir = "");

// sample_id,ari_direct,ari_tta,grad_cosine,recon_first,recon_last,steps,diverged
// plus mean/stddev aggregate rows.
std::string suite_csv(const SuiteResult& r);
// sample_id,grad_cosine,ari_direct,ari_tta,improvement
std::string gradsim_csv(const SuiteResult& r);

}  // namespace slottta

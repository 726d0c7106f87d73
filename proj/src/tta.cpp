#include "slottta/tta.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "slottta/adam.hpp"
#include "slottta/csvio.hpp"
#include "slottta/metrics.hpp"
#include "slottta/ppm.hpp"
#include "slottta/sampler.hpp"
#include "slottta/threadpool.hpp"
#include "slottta/trainer.hpp"

namespace slottta {

namespace fs = std::filesystem;

ParamSubset param_subset_from_string(const std::string& s) {
  if (s == "all") return ParamSubset::all;
  if (s == "encoder") return ParamSubset::encoder;
  if (s == "norm") return ParamSubset::norm;
  if (s == "slot_embeddings") return ParamSubset::slot_embeddings;
  throw ConfigError("unknown parameter subset '" + s + "'");
}

const char* to_string(ParamSubset s) {
  switch (s) {
    case ParamSubset::all: return "all";
    case ParamSubset::encoder: return "encoder";
    case ParamSubset::norm: return "norm";
    case ParamSubset::slot_embeddings: return "slot_embeddings";
  }
  return "?";
}

std::set<ParamTag> resolve_subset(ParamSubset subset, bool encoder_includes_slot_attention) {
  switch (subset) {
    case ParamSubset::all:
      return {ParamTag::encoder, ParamTag::slot_attention, ParamTag::decoder, ParamTag::norm,
              ParamTag::slot_embeddings};
    case ParamSubset::encoder:
      return encoder_includes_slot_attention
                 ? std::set<ParamTag>{ParamTag::encoder, ParamTag::slot_attention}
                 : std::set<ParamTag>{ParamTag::encoder};
    case ParamSubset::norm:
      return {ParamTag::norm};
    case ParamSubset::slot_embeddings:
      return {ParamTag::slot_embeddings};
  }
  return {};
}

namespace {

Tensor<float> flat_image(const SceneSample& s, const ModelConfig& cfg) {
  return Tensor<float>({cfg.pixels(), 3}, s.image.data);
}

double sample_ari(const SceneSample& s, const SegPrediction<float>& pred) {
  return adjusted_rand_index(pred.hard_mask, mask_labels(s));
}

double dense_recon(const SegPrediction<float>& pred, const SceneSample& s) {
  double sq = 0;
  for (size_t i = 0; i < pred.composite.data.size(); ++i) {
    const double d = static_cast<double>(pred.composite.data[i]) - static_cast<double>(s.image.data[i]);
    sq += d * d;
  }
  return sq / static_cast<double>(pred.composite.data.size());
}

std::vector<double> flatten_grads(const std::map<std::string, Tensor<float>>& grads,
                                  const std::vector<std::string>& names) {
  std::vector<double> flat;
  for (const auto& n : names) {
    const auto& g = grads.at(n);
    flat.insert(flat.end(), g.data.begin(), g.data.end());
  }
  return flat;
}

}  // namespace

double grad_cosine(const SceneSample& sample, const ParamRegistry<float>& params, const ModelConfig& cfg,
                   const std::set<ParamTag>& subset_tags) {
  const std::vector<std::string> names = params.select(subset_tags);
  // dense decode for both objectives; two independent tapes
  SampleLoss seg = forward_backward_sample(sample, params, cfg, {}, 1.0, 0.0, names, false);
  SampleLoss rec = forward_backward_sample(sample, params, cfg, {}, 0.0, 1.0, names, true);
  const std::vector<double> a = flatten_grads(seg.grads, names);
  const std::vector<double> b = flatten_grads(rec.grads, names);
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (std::sqrt(na) < 1e-12 || std::sqrt(nb) < 1e-12) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

AdaptationResult adapt_example(const SceneSample& sample, const ParamRegistry<float>& checkpoint,
                               const ModelConfig& cfg, const AdaptationConfig& acfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (acfg.steps < 0) throw ConfigError("adapt_example: negative step budget");
  if (acfg.pixels < 1 || acfg.pixels > cfg.pixels()) throw ConfigError("adapt_example: bad pixel budget");
  if (acfg.sampling != "uniform" && acfg.sampling != "error_weighted")
    throw ConfigError("adapt_example: unknown sampling '" + acfg.sampling + "'");
  if (acfg.temperature <= 0) throw ConfigError("adapt_example: temperature must be positive");

  AdaptationResult out{checkpoint.clone(), {}};
  AdaptationReport& rep = out.report;

  // The ground-truth mask may only be touched for reporting; adaptation
  // tapes reject tensors carrying this tag.
  SceneSample guarded = sample;
  guarded.mask.eval_only = true;

  const std::set<ParamTag> tags = resolve_subset(acfg.subset, acfg.encoder_includes_slot_attention);
  const std::vector<std::string> names = out.params.select(tags);

  SegPrediction<float> pred = predict_dense(out.params, cfg, flat_image(guarded, cfg));
  rep.ari_before = sample_ari(sample, pred);
  rep.recon_dense_before = dense_recon(pred, sample);
  rep.grad_cosine = grad_cosine(sample, out.params, cfg, tags);
  std::vector<float> error_map = reconstruction_error_map(pred, flat_image(guarded, cfg));

  AdamState<float> opt;
  opt.lr = acfg.lr;

  for (int step = 0; step < acfg.steps; ++step) {
    std::vector<int> subset =
        acfg.sampling == "uniform"
            ? sample_pixels_uniform(cfg.height, cfg.width, acfg.pixels,
                                    seed_mix(acfg.seed, 0x74746131ull, static_cast<uint64_t>(step)))
            : error_weighted_sample(error_map, acfg.pixels, acfg.temperature,
                                    seed_mix(acfg.seed, 0x74746132ull, static_cast<uint64_t>(step)));
    SampleLoss sl = forward_backward_sample(guarded, out.params, cfg, subset, 0.0, 1.0, names, true);
    if (!std::isfinite(sl.total)) {
      rep.diverged = true;
      break;
    }
    out.params.alloc_grads();
    out.params.zero_grads();
    for (const auto& [name, g] : sl.grads)
      kern::Kern<float>::add(g.data.data(), out.params.tensor(name).grad.data(),
                             out.params.tensor(name).grad.data(), g.data.size());
    adam_step(out.params, names, opt);
    rep.recon_trace.push_back(sl.total);
    rep.steps_executed = step + 1;

    const bool refresh_due = acfg.error_refresh > 0 && (step + 1) % acfg.error_refresh == 0;
    if ((refresh_due && acfg.sampling == "error_weighted") || acfg.trace_ari) {
      SegPrediction<float> cur = predict_dense(out.params, cfg, flat_image(guarded, cfg));
      if (refresh_due) error_map = reconstruction_error_map(cur, flat_image(guarded, cfg));
      if (acfg.trace_ari) rep.ari_trace.push_back(sample_ari(sample, cur));
    }
  }

  SegPrediction<float> after = predict_dense(out.params, cfg, flat_image(guarded, cfg));
  rep.ari_after = sample_ari(sample, after);
  rep.recon_dense_after = dense_recon(after, sample);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

SuiteResult run_suite(const Dataset& ds, const ParamRegistry<float>& checkpoint, const ModelConfig& cfg,
                      const AdaptationConfig& acfg, int threads, const std::string& ppm_dir) {
  const int n = static_cast<int>(ds.samples.size());
  SuiteResult result;
  result.rows.resize(static_cast<size_t>(n));
  if (!ppm_dir.empty()) fs::create_directories(ppm_dir);

  parallel_for(
      n,
      [&](int i) {
        const SceneSample& s = ds.samples[static_cast<size_t>(i)];
        SuiteRow& row = result.rows[static_cast<size_t>(i)];
        std::ostringstream id;
        id << "sample_" << i;
        row.sample_id = id.str();
        try {
          SegPrediction<float> direct = predict_dense(checkpoint, cfg, Tensor<float>({cfg.pixels(), 3}, s.image.data));
          row.ari_direct = adjusted_rand_index(direct.hard_mask, mask_labels(s));
          AdaptationConfig per = acfg;
          per.seed = seed_mix(acfg.seed, 0x7375697465ull, static_cast<uint64_t>(i));
          AdaptationResult ar = adapt_example(s, checkpoint, cfg, per);
          row.ari_tta = ar.report.ari_after;
          row.grad_cosine = ar.report.grad_cosine;
          row.recon_first = ar.report.recon_trace.empty() ? ar.report.recon_dense_before : ar.report.recon_trace.front();
          row.recon_last = ar.report.recon_trace.empty() ? ar.report.recon_dense_after : ar.report.recon_trace.back();
          row.steps = ar.report.steps_executed;
          row.diverged = ar.report.diverged;
          if (!ppm_dir.empty()) {
            const fs::path base = fs::path(ppm_dir) / row.sample_id;
            write_ppm(base.string() + "_input.ppm", s.image);
            Tensor<float> comp_before({cfg.height, cfg.width, 3}, direct.composite.data);
            write_ppm(base.string() + "_composite_direct.ppm", comp_before);
            write_mask_ppm(base.string() + "_mask_direct.ppm", direct.hard_mask, cfg.height, cfg.width);
            SegPrediction<float> adapted = predict_dense(ar.params, cfg, Tensor<float>({cfg.pixels(), 3}, s.image.data));
            Tensor<float> comp_after({cfg.height, cfg.width, 3}, adapted.composite.data);
            write_ppm(base.string() + "_composite_tta.ppm", comp_after);
            write_mask_ppm(base.string() + "_mask_tta.ppm", adapted.hard_mask, cfg.height, cfg.width);
            write_mask_ppm(base.string() + "_mask_gt.ppm", mask_labels(s), cfg.height, cfg.width);
          }
        } catch (const std::exception&) {
          row.failed = true;
          row.diverged = true;
        }
      },
      threads);

  double sd = 0, st = 0, sc = 0, sdd = 0, stt = 0;
  int valid = 0;
  for (const auto& r : result.rows) {
    if (r.failed) continue;
    ++valid;
    sd += r.ari_direct;
    st += r.ari_tta;
    sc += r.grad_cosine;
  }
  if (valid > 0) {
    result.mean_direct = sd / valid;
    result.mean_tta = st / valid;
    result.mean_cosine = sc / valid;
    for (const auto& r : result.rows) {
      if (r.failed) continue;
      sdd += (r.ari_direct - result.mean_direct) * (r.ari_direct - result.mean_direct);
      stt += (r.ari_tta - result.mean_tta) * (r.ari_tta - result.mean_tta);
    }
    result.std_direct = std::sqrt(sdd / valid);
    result.std_tta = std::sqrt(stt / valid);
  }
  return result;
}

std::string suite_csv(const SuiteResult& r) {
  std::ostringstream os;
  os << "sample_id,ari_direct,ari_tta,grad_cosine,recon_first,recon_last,steps,diverged\n";
  double mc = 0, mrf = 0, mrl = 0, msteps = 0, mdiv = 0;
  double n = 0;
  for (const auto& row : r.rows) {
    os << row.sample_id << "," << fmt_double(row.ari_direct) << "," << fmt_double(row.ari_tta) << ","
       << fmt_double(row.grad_cosine) << "," << fmt_double(row.recon_first) << "," << fmt_double(row.recon_last)
       << "," << row.steps << "," << (row.diverged ? 1 : 0) << "\n";
    if (!row.failed) {
      mc += row.grad_cosine;
      mrf += row.recon_first;
      mrl += row.recon_last;
      msteps += row.steps;
      n += 1;
    }
    mdiv += row.diverged ? 1 : 0;
  }
  if (n == 0) n = 1;
  os << "mean," << fmt_double(r.mean_direct) << "," << fmt_double(r.mean_tta) << "," << fmt_double(mc / n) << ","
     << fmt_double(mrf / n) << "," << fmt_double(mrl / n) << "," << fmt_double(msteps / n) << ","
     << fmt_double(mdiv / std::max<size_t>(1, r.rows.size())) << "\n";
  double vc = 0, vrf = 0, vrl = 0, vsteps = 0;
  for (const auto& row : r.rows) {
    if (row.failed) continue;
    vc += (row.grad_cosine - mc / n) * (row.grad_cosine - mc / n);
    vrf += (row.recon_first - mrf / n) * (row.recon_first - mrf / n);
    vrl += (row.recon_last - mrl / n) * (row.recon_last - mrl / n);
    vsteps += (row.steps - msteps / n) * (row.steps - msteps / n);
  }
  os << "stddev," << fmt_double(r.std_direct) << "," << fmt_double(r.std_tta) << "," << fmt_double(std::sqrt(vc / n))
     << "," << fmt_double(std::sqrt(vrf / n)) << "," << fmt_double(std::sqrt(vrl / n)) << ","
     << fmt_double(std::sqrt(vsteps / n)) << ",0\n";
  return os.str();
}

std::string gradsim_csv(const SuiteResult& r) {
  std::ostringstream os;
  os << "sample_id,grad_cosine,ari_direct,ari_tta,improvement\n";
  for (const auto& row : r.rows) {
    os << row.sample_id << "," << fmt_double(row.grad_cosine) << "," << fmt_double(row.ari_direct) << ","
       << fmt_double(row.ari_tta) << "," << fmt_double(row.ari_tta - row.ari_direct) << "\n";
  }
  return os.str();
}

}  // namespace slottta

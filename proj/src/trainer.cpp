#include "slottta/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "slottta/checkpoint.hpp"
#include "slottta/csvio.hpp"
#include "slottta/metrics.hpp"
#include "slottta/sampler.hpp"
#include "slottta/threadpool.hpp"

namespace slottta {

namespace fs = std::filesystem;

SampleLoss forward_backward_sample(const SceneSample& sample, const ParamRegistry<float>& params,
                                   const ModelConfig& cfg, const std::vector<int>& pixel_subset,
                                   double lambda_s, double lambda_r,
                                   const std::vector<std::string>& grad_names, bool recon_only) {
  Tape<float> tape;
  if (recon_only) tape.set_allow_eval_only(false);
  ModelVars<float> vars = bind_model(tape, params, cfg);
  Tensor<float> flat_img({cfg.pixels(), 3}, sample.image.data);
  Var image = tape.constant(flat_img);
  SceneForward<float> fwd = forward_scene(tape, image, vars, cfg, pixel_subset);

  // reconstruction target at the decoded pixels
  const auto& idx = fwd.render.pixel_indices;
  Tensor<float> target = Tensor<float>::zeros({static_cast<int>(idx.size()), 3});
  for (size_t i = 0; i < idx.size(); ++i)
    for (int c = 0; c < 3; ++c)
      target.data[i * 3 + c] = sample.image.data[static_cast<size_t>(idx[i]) * 3 + c];
  Var l_recon = reconstruction_loss(tape, fwd.render.composite, tape.constant(std::move(target)));

  SampleLoss out;
  out.l_recon = tape.value(l_recon).data[0];
  Var total = -1;
  if (recon_only) {
    total = l_recon;
    out.total = out.l_recon;
  } else {
    std::vector<int> pix_ids(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) pix_ids[i] = static_cast<int>(sample.mask.data[static_cast<size_t>(idx[i])]);
    SegLossResult<float> seg = segmentation_loss(tape, fwd.seg_logprobs, pix_ids, sample.objects + 1);
    out.l_seg = tape.value(seg.loss).data[0];
    total = combine_losses(tape, seg.loss, l_recon, static_cast<float>(lambda_s), static_cast<float>(lambda_r));
    out.total = tape.value(total).data[0];
  }

  if (!grad_names.empty()) {
    tape.backward(total);
    for (const auto& name : grad_names) out.grads[name] = tape.grad(vars.leaves.at(name));
  }
  return out;
}

double dataset_mean_ari(const ParamRegistry<float>& params, const ModelConfig& cfg, const Dataset& ds,
                        int subset, int threads) {
  const int n = subset > 0 ? std::min<int>(subset, static_cast<int>(ds.samples.size()))
                           : static_cast<int>(ds.samples.size());
  if (n == 0) return 0;
  std::vector<double> ari(static_cast<size_t>(n), 0.0);
  parallel_for(
      n,
      [&](int i) {
        const SceneSample& s = ds.samples[static_cast<size_t>(i)];
        Tensor<float> flat({cfg.pixels(), 3}, s.image.data);
        SegPrediction<float> pred = predict_dense(params, cfg, flat);
        ari[static_cast<size_t>(i)] = adjusted_rand_index(pred.hard_mask, mask_labels(s));
      },
      threads);
  double sum = 0;
  for (double a : ari) sum += a;
  return sum / n;
}

TrainResult fit(const Dataset& train, const Dataset& val, const ModelConfig& mcfg, const TrainConfig& tcfg,
                const std::string& out_dir, const std::string& snapshot_json) {
  if (tcfg.batch < 1 || tcfg.max_steps < 1) throw ConfigError("fit: batch and max_steps must be positive");
  if (tcfg.lambda_s == 0 && tcfg.lambda_r == 0) throw ConfigError("fit: both loss weights are zero");
  if (train.samples.empty()) throw InputError("fit: empty training set");
  for (const auto& s : train.samples)
    if (s.objects + 1 > mcfg.slots)
      throw ConfigError("fit: scene with " + std::to_string(s.objects + 1) + " instances exceeds " +
                        std::to_string(mcfg.slots) + " slots");
  if (tcfg.pixels > mcfg.pixels()) throw ConfigError("fit: pixel budget exceeds image size");

  fs::create_directories(out_dir);
  TrainResult result;
  result.checkpoint_path = (fs::path(out_dir) / "checkpoint.slt").string();
  result.log_path = (fs::path(out_dir) / "train_log.csv").string();

  ParamRegistry<float> params = init_model_params<float>(mcfg, tcfg.seed);
  const std::vector<std::string> all_names = params.names();
  AdamState<float> opt;
  opt.lr = tcfg.lr;

  std::ostringstream log;
  log << "step,epoch,l_seg,l_recon,total,val_ari\n";

  const int n_train = static_cast<int>(train.samples.size());
  std::vector<int> order(static_cast<size_t>(n_train));
  for (int i = 0; i < n_train; ++i) order[static_cast<size_t>(i)] = i;

  double last_val = std::nan("");
  int evals_since_best = 0;
  int step = 0;
  bool stop = false;

  for (int epoch = 0; !stop; ++epoch) {
    Rng shuffle_rng(seed_mix(tcfg.seed, 0x65706f63ull, static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);
    for (int start = 0; start + 1 <= n_train && !stop; start += tcfg.batch) {
      const int bsz = std::min(tcfg.batch, n_train - start);
      std::vector<SampleLoss> batch(static_cast<size_t>(bsz));
      parallel_for(
          bsz,
          [&](int b) {
            const SceneSample& s = train.samples[static_cast<size_t>(order[static_cast<size_t>(start + b)])];
            const auto subset = sample_pixels_uniform(
                mcfg.height, mcfg.width, tcfg.pixels,
                seed_mix(tcfg.seed, 0x70697865ull, static_cast<uint64_t>(step), static_cast<uint64_t>(b)));
            batch[static_cast<size_t>(b)] = forward_backward_sample(s, params, mcfg, subset, tcfg.lambda_s,
                                                                    tcfg.lambda_r, all_names, false);
          },
          tcfg.threads);

      double m_seg = 0, m_recon = 0, m_total = 0;
      params.alloc_grads();
      params.zero_grads();
      for (int b = 0; b < bsz; ++b) {  // fixed reduction order
        const SampleLoss& sl = batch[static_cast<size_t>(b)];
        if (!std::isfinite(sl.total))
          throw Error("fit: non-finite loss at epoch " + std::to_string(epoch) + " step " + std::to_string(step) +
                      " (l_seg=" + std::to_string(sl.l_seg) + ", l_recon=" + std::to_string(sl.l_recon) + ")");
        m_seg += sl.l_seg;
        m_recon += sl.l_recon;
        m_total += sl.total;
        const float inv = 1.0f / static_cast<float>(bsz);
        for (const auto& [name, g] : sl.grads)
          kern::Kern<float>::axpy(inv, g.data.data(), params.tensor(name).grad.data(), g.data.size());
      }
      m_seg /= bsz;
      m_recon /= bsz;
      m_total /= bsz;

      clip_gradients(params, all_names, tcfg.clip_norm);
      adam_step(params, all_names, opt);
      ++step;

      log << step << "," << epoch << "," << fmt_double(m_seg) << "," << fmt_double(m_recon) << ","
          << fmt_double(m_total) << "," << (std::isnan(last_val) ? "" : fmt_double(last_val)) << "\n";

      if (step % tcfg.eval_interval == 0 || step >= tcfg.max_steps) {
        last_val = dataset_mean_ari(params, mcfg, val, tcfg.val_subset, tcfg.threads);
        if (last_val > result.best_val_ari + 1e-6) {
          result.best_val_ari = last_val;
          result.best_step = step;
          evals_since_best = 0;
          save_checkpoint(result.checkpoint_path, params, mcfg, snapshot_json);
        } else {
          ++evals_since_best;
        }
        atomic_write_file(result.log_path, log.str());
        if (evals_since_best >= tcfg.patience) stop = true;
      }
      if (step >= tcfg.max_steps) stop = true;
    }
  }

  result.steps = step;
  atomic_write_file(result.log_path, log.str());
  if (result.best_step < 0) {
    // no eval ever improved (e.g. max_steps < eval_interval): keep final params
    result.best_val_ari = dataset_mean_ari(params, mcfg, val, tcfg.val_subset, tcfg.threads);
    result.best_step = step;
    save_checkpoint(result.checkpoint_path, params, mcfg, snapshot_json);
  }
  return result;
}

}  // namespace slottta

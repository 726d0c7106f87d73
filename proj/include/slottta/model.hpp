#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "slottta/decoder.hpp"
#include "slottta/encoder.hpp"
#include "slottta/slot_attention.hpp"

namespace slottta {

// Architecture description; serialized into checkpoints.
struct ModelConfig {
  int height = 48;
  int width = 48;
  int enc_channels = 32;
  int conv_layers = 4;
  int ksize = 5;
  int slot_dim = 64;
  int slots = 6;
  int iters = 3;
  int dec_hidden = 64;
  bool bottleneck_free = false;

  EncoderDims encoder_dims() const { return EncoderDims{height, width, enc_channels, conv_layers, ksize}; }
  SlotAttentionDims slot_dims() const { return SlotAttentionDims{enc_channels, slot_dim, slots, iters}; }
  DecoderDims decoder_dims() const { return DecoderDims{slot_dim, dec_hidden, 4}; }
  int pixels() const { return height * width; }
};

template <typename T>
ParamRegistry<T> init_model_params(const ModelConfig& cfg, uint64_t seed) {
  Rng rng(seed_mix(seed, 0x6d6f64656cull));
  ParamRegistry<T> reg;
  init_encoder_params(reg, cfg.encoder_dims(), rng);
  init_slot_attention_params(reg, cfg.slot_dims(), rng);
  init_decoder_params(reg, cfg.decoder_dims(), rng);
  if (cfg.bottleneck_free) init_bottleneck_free_params<T>(reg, cfg.slot_dim, cfg.enc_channels, rng);
  return reg;
}

template <typename T>
struct ModelVars {
  EncoderVars enc;
  SlotAttentionVars sa;
  DecoderVars dec;
  Var proj = -1;                    // bottleneck-free head only
  std::map<std::string, Var> leaves;  // name -> bound leaf, for gradient readout
};

template <typename T>
ModelVars<T> bind_model(Tape<T>& t, const ParamRegistry<T>& reg, const ModelConfig& cfg) {
  ModelVars<T> v;
  for (const auto& e : reg.entries()) v.leaves[e.name] = t.leaf(e.tensor);
  auto L = [&](const std::string& name) { return v.leaves.at(name); };
  for (int l = 0; l < cfg.conv_layers; ++l) {
    const std::string base = "enc.conv" + std::to_string(l + 1);
    v.enc.conv_w.push_back(L(base + ".w"));
    v.enc.conv_b.push_back(L(base + ".b"));
  }
  v.enc.pos_w = L("enc.pos.w");
  v.enc.pos_b = L("enc.pos.b");
  v.sa.w_k = L("sa.k.w");
  v.sa.w_q = L("sa.q.w");
  v.sa.w_v = L("sa.v.w");
  v.sa.gru_wz = L("sa.gru.wz");
  v.sa.gru_rz = L("sa.gru.rz");
  v.sa.gru_bz = L("sa.gru.bz");
  v.sa.gru_wr = L("sa.gru.wr");
  v.sa.gru_rr = L("sa.gru.rr");
  v.sa.gru_br = L("sa.gru.br");
  v.sa.gru_wh = L("sa.gru.wh");
  v.sa.gru_rh = L("sa.gru.rh");
  v.sa.gru_bh = L("sa.gru.bh");
  v.sa.slot_init = L("sa.slot_init");
  v.sa.norm_in_g = L("sa.norm_in.g");
  v.sa.norm_in_b = L("sa.norm_in.b");
  v.sa.norm_slots_g = L("sa.norm_slots.g");
  v.sa.norm_slots_b = L("sa.norm_slots.b");
  v.dec.l1w = L("dec.l1.w");
  v.dec.l1b = L("dec.l1.b");
  v.dec.l2w = L("dec.l2.w");
  v.dec.l2b = L("dec.l2.b");
  v.dec.l3w = L("dec.l3.w");
  v.dec.l3b = L("dec.l3.b");
  v.dec.l4w = L("dec.l4.w");
  v.dec.l4b = L("dec.l4.b");
  if (cfg.bottleneck_free) v.proj = L("dec.proj.w");
  return v;
}

template <typename T>
struct SceneForward {
  Var tokens;     // M, (H*W) x C
  Var slots;      // P x D
  Var attention;  // final N x P
  SceneRender render;
  Var seg_logprobs;  // P x Q log softmax over slots at the decoded pixels
};

// Full forward pass. `pixel_subset` empty means dense decoding. The
// segmentation head is the broadcast alphas, or the slot-feature dot product
// when the bottleneck-free ablation is active.
template <typename T>
SceneForward<T> forward_scene(Tape<T>& t, Var image, const ModelVars<T>& v, const ModelConfig& cfg,
                              const std::vector<int>& pixel_subset = {}) {
  SceneForward<T> out;
  out.tokens = encode_image(t, image, v.enc, cfg.encoder_dims());
  SlotAttentionResult sa = run_slot_attention(t, out.tokens, v.sa, cfg.iters);
  out.slots = sa.slots;
  out.attention = sa.final_attention;
  out.render = decode_scene(t, out.slots, v.dec, cfg.height, cfg.width, pixel_subset);
  if (cfg.bottleneck_free) {
    Var logits = decode_bottleneck_free(t, out.slots, out.tokens, v.proj);  // N x P
    Var rows = pixel_subset.empty() ? logits : ops::gather_rows(t, logits, out.render.pixel_indices);
    out.seg_logprobs = ops::log_softmax_axis(t, ops::transpose(t, rows), 0);
  } else {
    out.seg_logprobs = ops::log_softmax_axis(t, out.render.raw_alphas, 0);
  }
  return out;
}

// Dense prediction for evaluation and reporting.
template <typename T>
struct SegPrediction {
  int height = 0, width = 0, slots = 0;
  Tensor<T> alphas;            // {P, H*W}, softmax-normalized over slots
  Tensor<T> composite;         // {H*W, 3}
  std::vector<int> hard_mask;  // per-pixel argmax slot
};

template <typename T>
SegPrediction<T> predict_dense(const ParamRegistry<T>& reg, const ModelConfig& cfg, const Tensor<T>& image) {
  Tape<T> t;
  ModelVars<T> v = bind_model(t, reg, cfg);
  Var img = t.constant(image);
  SceneForward<T> f = forward_scene(t, img, v, cfg);
  SegPrediction<T> pred;
  pred.height = cfg.height;
  pred.width = cfg.width;
  pred.slots = cfg.slots;
  pred.composite = t.value(f.render.composite);
  const Tensor<T>& lp = t.value(f.seg_logprobs);
  pred.alphas = Tensor<T>::zeros(lp.shape);
  for (size_t i = 0; i < lp.data.size(); ++i) pred.alphas.data[i] = std::exp(lp.data[i]);
  pred.hard_mask = hard_mask_from_weights(pred.alphas);
  return pred;
}

// Per-pixel squared reconstruction error summed over channels (dense).
template <typename T>
std::vector<T> reconstruction_error_map(const SegPrediction<T>& pred, const Tensor<T>& image) {
  const int n = pred.height * pred.width;
  std::vector<T> err(static_cast<size_t>(n), T(0));
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) {
      const T d = pred.composite.data[static_cast<size_t>(i) * 3 + c] - image.data[static_cast<size_t>(i) * 3 + c];
      err[static_cast<size_t>(i)] += d * d;
    }
  return err;
}

}  // namespace slottta

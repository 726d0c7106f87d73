#pragma once

#include <optional>
#include <vector>

#include "slottta/encoder.hpp"
#include "slottta/ops.hpp"
#include "slottta/registry.hpp"

// Spatial-broadcast decoder: a shared render MLP maps (slot vector, pixel
// position) to RGB and an unnormalized alpha. Alphas are softmax-normalized
// over slots per pixel; the normalized weights composite the RGB and double
// as the soft segmentation. An optional bottleneck-free head decodes masks
// from slot-feature dot products instead (ablation).
namespace slottta {

struct DecoderDims {
  int slot_dim = 64;
  int hidden = 64;
  int layers = 4;  // linear layers; relu between, sigmoid on rgb, raw alpha
};

template <typename T>
void init_decoder_params(ParamRegistry<T>& reg, const DecoderDims& d, Rng& rng) {
  using sa_detail::glorot;
  const int in = d.slot_dim + 4;
  reg.add("dec.l1.w", ParamTag::decoder, glorot<T>(rng, in, d.hidden));
  reg.add("dec.l1.b", ParamTag::decoder, Tensor<T>::zeros({1, d.hidden}));
  reg.add("dec.l2.w", ParamTag::decoder, glorot<T>(rng, d.hidden, d.hidden));
  reg.add("dec.l2.b", ParamTag::decoder, Tensor<T>::zeros({1, d.hidden}));
  reg.add("dec.l3.w", ParamTag::decoder, glorot<T>(rng, d.hidden, d.hidden));
  reg.add("dec.l3.b", ParamTag::decoder, Tensor<T>::zeros({1, d.hidden}));
  reg.add("dec.l4.w", ParamTag::decoder, glorot<T>(rng, d.hidden, 4));
  reg.add("dec.l4.b", ParamTag::decoder, Tensor<T>::zeros({1, 4}));
}

// Projection for the bottleneck-free mask head (slots -> token feature space).
template <typename T>
void init_bottleneck_free_params(ParamRegistry<T>& reg, int slot_dim, int token_dim, Rng& rng) {
  reg.add("dec.proj.w", ParamTag::decoder, sa_detail::glorot<T>(rng, slot_dim, token_dim));
}

struct DecoderVars {
  Var l1w, l1b, l2w, l2b, l3w, l3b, l4w, l4b;
};

template <typename T>
DecoderVars bind_decoder(Tape<T>& t, const ParamRegistry<T>& reg) {
  DecoderVars v;
  v.l1w = t.leaf(reg.tensor("dec.l1.w"));
  v.l1b = t.leaf(reg.tensor("dec.l1.b"));
  v.l2w = t.leaf(reg.tensor("dec.l2.w"));
  v.l2b = t.leaf(reg.tensor("dec.l2.b"));
  v.l3w = t.leaf(reg.tensor("dec.l3.w"));
  v.l3b = t.leaf(reg.tensor("dec.l3.b"));
  v.l4w = t.leaf(reg.tensor("dec.l4.w"));
  v.l4b = t.leaf(reg.tensor("dec.l4.b"));
  return v;
}

struct SlotRender {
  Var rgb;    // Q x 3, sigmoid-squashed
  Var alpha;  // Q x 1, unbounded
};

// Evaluates the render MLP for one slot at the given pixel rows (Q x 4
// positional entries).
template <typename T>
SlotRender decode_slot(Tape<T>& t, Var slot_row, Var pixels, const DecoderVars& v) {
  const auto& pv = t.value(pixels);
  if (pv.rank() != 2 || pv.dim(1) != 4)
    throw ShapeError("decode_slot: pixel rows must be Qx4, got " + shape_str(pv.shape));
  const auto& sv = t.value(slot_row);
  if (sv.dim(0) != 1 || sv.dim(1) + 4 != t.value(v.l1w).dim(0))
    throw ShapeError("decode_slot: slot dimension " + shape_str(sv.shape) +
                     " does not match render MLP input " + shape_str(t.value(v.l1w).shape));
  const int q = pv.dim(0);
  Var in = ops::concat_cols(t, {ops::tile_rows(t, slot_row, q), pixels});
  Var h = ops::relu(t, ops::add(t, ops::matmul(t, in, v.l1w), ops::tile_rows(t, v.l1b, q)));
  h = ops::relu(t, ops::add(t, ops::matmul(t, h, v.l2w), ops::tile_rows(t, v.l2b, q)));
  h = ops::relu(t, ops::add(t, ops::matmul(t, h, v.l3w), ops::tile_rows(t, v.l3b, q)));
  Var out = ops::add(t, ops::matmul(t, h, v.l4w), ops::tile_rows(t, v.l4b, q));
  SlotRender r;
  r.rgb = ops::sigmoid(t, ops::slice_cols(t, out, 0, 3));
  r.alpha = ops::slice_cols(t, out, 3, 1);
  return r;
}

struct SceneRender {
  Var composite;          // Q x 3
  Var weights;            // P x Q, softmax over slots per pixel
  Var raw_alphas;         // P x Q pre-softmax
  std::vector<Var> rgbs;  // per-slot Q x 3
  std::vector<int> pixel_indices;  // which grid rows were decoded
};

// Softmax-composites per-slot renders. alphas: P x Q raw scores; rgbs: per
// slot Q x 3.
template <typename T>
SceneRender composite_slots(Tape<T>& t, Var raw_alphas, const std::vector<Var>& rgbs) {
  const int p = t.value(raw_alphas).dim(0);
  const int q = t.value(raw_alphas).dim(1);
  if (p < 1 || static_cast<size_t>(p) != rgbs.size())
    throw ShapeError("composite_slots: alpha rows and rgb count disagree");
  SceneRender out;
  out.raw_alphas = raw_alphas;
  out.weights = ops::softmax_axis(t, raw_alphas, 0);
  Var acc = -1;
  for (int k = 0; k < p; ++k) {
    Var wk = ops::reshape(t, ops::slice_rows(t, out.weights, k, 1), {q, 1});
    Var term = ops::mul(t, ops::tile_cols(t, wk, 3), rgbs[k]);
    acc = k == 0 ? term : ops::add(t, acc, term);
  }
  out.composite = acc;
  out.rgbs = rgbs;
  return out;
}

// Decodes P slots at `pixel_indices` rows of the positional grid (all pixels
// when empty). Duplicates are allowed.
template <typename T>
SceneRender decode_scene(Tape<T>& t, Var slots, const DecoderVars& v, int h, int w,
                         const std::vector<int>& pixel_indices = {}) {
  const int p = t.value(slots).dim(0);
  const Tensor<T> grid = positional_grid<T>(h, w);
  std::vector<int> idx = pixel_indices;
  if (idx.empty()) {
    idx.resize(static_cast<size_t>(h) * w);
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  }
  Tensor<T> rows = Tensor<T>::zeros({static_cast<int>(idx.size()), 4});
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= h * w)
      throw InputError("decode_scene: pixel index " + std::to_string(idx[i]) + " outside grid of " +
                       std::to_string(h * w));
    for (int c = 0; c < 4; ++c) rows.data[i * 4 + c] = grid.data[static_cast<size_t>(idx[i]) * 4 + c];
  }
  Var pixels = t.constant(std::move(rows));
  const int q = static_cast<int>(idx.size());

  std::vector<Var> rgbs;
  std::vector<Var> alpha_rows;
  for (int k = 0; k < p; ++k) {
    SlotRender r = decode_slot(t, ops::slice_rows(t, slots, k, 1), pixels, v);
    rgbs.push_back(r.rgb);
    alpha_rows.push_back(ops::reshape(t, r.alpha, {1, q}));
  }
  Var raw_alphas = alpha_rows.size() == 1 ? alpha_rows[0] : ops::concat_rows(t, alpha_rows);
  SceneRender out = composite_slots(t, raw_alphas, rgbs);
  out.pixel_indices = std::move(idx);
  return out;
}

// Bottleneck-free mask head: logits[i, k] = tokens_i . proj(slot_k). The
// softmax over k is taken downstream exactly like the broadcast alphas.
template <typename T>
Var decode_bottleneck_free(Tape<T>& t, Var slots, Var tokens, Var proj) {
  const auto& sv = t.value(slots);
  const auto& tv = t.value(tokens);
  const auto& pv = t.value(proj);
  if (sv.dim(1) != pv.dim(0) || tv.dim(1) != pv.dim(1))
    throw ShapeError("decode_bottleneck_free: projection " + shape_str(pv.shape) +
                     " incompatible with slots " + shape_str(sv.shape) + " and tokens " + shape_str(tv.shape));
  Var projected = ops::matmul(t, slots, proj);  // P x C
  return ops::matmul(t, tokens, ops::transpose(t, projected));  // N x P logits
}

// Dense prediction extracted from a scene render: hard mask is the per-pixel
// argmax over slot weights.
template <typename T>
std::vector<int> hard_mask_from_weights(const Tensor<T>& weights) {
  const int p = weights.dim(0), q = weights.dim(1);
  std::vector<int> mask(static_cast<size_t>(q));
  for (int j = 0; j < q; ++j) {
    int best = 0;
    T bv = weights.at(0, j);
    for (int k = 1; k < p; ++k)
      if (weights.at(k, j) > bv) {
        bv = weights.at(k, j);
        best = k;
      }
    mask[static_cast<size_t>(j)] = best;
  }
  return mask;
}

}  // namespace slottta

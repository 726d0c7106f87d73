#pragma once

#include <cmath>
#include <string>

#include "slottta/ops.hpp"
#include "slottta/registry.hpp"
#include "slottta/rng.hpp"

// Iterative slot attention: N feature tokens compete over P slots through a
// softmax across the slot axis; a renormalized attention average drives a GRU
// update of the slot state. Three iterations by default.
namespace slottta {

struct SlotAttentionDims {
  int token_dim = 32;  // C
  int slot_dim = 64;   // D
  int slots = 6;       // P
  int iters = 3;
};

// Tape bindings of the slot-attention parameters.
struct SlotAttentionVars {
  Var w_k, w_q, w_v;
  Var gru_wz, gru_rz, gru_bz;
  Var gru_wr, gru_rr, gru_br;
  Var gru_wh, gru_rh, gru_bh;
  Var slot_init;
  Var norm_in_g, norm_in_b, norm_slots_g, norm_slots_b;
};

namespace sa_detail {

template <typename T>
Tensor<T> glorot(Rng& rng, int rows, int cols) {
  Tensor<T> t = Tensor<T>::zeros({rows, cols});
  const double limit = std::sqrt(6.0 / (rows + cols));
  for (auto& v : t.data) v = static_cast<T>(rng.uniform(-limit, limit));
  return t;
}

}  // namespace sa_detail

// Registers freshly initialized parameters. Slot embeddings are learnable,
// drawn per element from N(0, 1/sqrt(D)); their rows must be pairwise
// distinct so the slots can break symmetry.
template <typename T>
void init_slot_attention_params(ParamRegistry<T>& reg, const SlotAttentionDims& d, Rng& rng) {
  using sa_detail::glorot;
  const int c = d.token_dim, dd = d.slot_dim, p = d.slots;
  reg.add("sa.k.w", ParamTag::slot_attention, glorot<T>(rng, c, dd));
  reg.add("sa.q.w", ParamTag::slot_attention, glorot<T>(rng, dd, dd));
  reg.add("sa.v.w", ParamTag::slot_attention, glorot<T>(rng, c, dd));
  reg.add("sa.gru.wz", ParamTag::slot_attention, glorot<T>(rng, dd, dd));
  reg.add("sa.gru.rz", ParamTag::slot_attention, glorot<T>(rng, dd, dd));
  reg.add("sa.gru.bz", ParamTag::slot_attention, Tensor<T>::zeros({1, dd}));
  reg.add("sa.gru.wr", ParamTag::slot_attention, glorot<T>(rng, dd, dd));
  reg.add("sa.gru.rr", ParamTag::slot_attention, glorot<T>(rng, dd, dd));
  reg.add("sa.gru.br", ParamTag::slot_attention, Tensor<T>::zeros({1, dd}));
  reg.add("sa.gru.wh", ParamTag::slot_attention, glorot<T>(rng, dd, dd));
  reg.add("sa.gru.rh", ParamTag::slot_attention, glorot<T>(rng, dd, dd));
  reg.add("sa.gru.bh", ParamTag::slot_attention, Tensor<T>::zeros({1, dd}));

  Tensor<T> init = Tensor<T>::zeros({p, dd});
  const double stddev = 1.0 / std::sqrt(static_cast<double>(dd));
  for (;;) {
    for (auto& v : init.data) v = static_cast<T>(rng.normal(0.0, stddev));
    bool distinct = true;
    for (int i = 0; i < p && distinct; ++i)
      for (int j = i + 1; j < p && distinct; ++j) {
        double l2 = 0;
        for (int e = 0; e < dd; ++e) {
          const double diff = init.at(i, e) - init.at(j, e);
          l2 += diff * diff;
        }
        if (l2 <= 0) distinct = false;
      }
    if (distinct) break;
  }
  reg.add("sa.slot_init", ParamTag::slot_embeddings, std::move(init));

  reg.add("sa.norm_in.g", ParamTag::norm, Tensor<T>::full({c}, T(1)));
  reg.add("sa.norm_in.b", ParamTag::norm, Tensor<T>::zeros({c}));
  reg.add("sa.norm_slots.g", ParamTag::norm, Tensor<T>::full({dd}, T(1)));
  reg.add("sa.norm_slots.b", ParamTag::norm, Tensor<T>::zeros({dd}));
}

template <typename T>
SlotAttentionVars bind_slot_attention(Tape<T>& t, const ParamRegistry<T>& reg) {
  SlotAttentionVars v;
  v.w_k = t.leaf(reg.tensor("sa.k.w"));
  v.w_q = t.leaf(reg.tensor("sa.q.w"));
  v.w_v = t.leaf(reg.tensor("sa.v.w"));
  v.gru_wz = t.leaf(reg.tensor("sa.gru.wz"));
  v.gru_rz = t.leaf(reg.tensor("sa.gru.rz"));
  v.gru_bz = t.leaf(reg.tensor("sa.gru.bz"));
  v.gru_wr = t.leaf(reg.tensor("sa.gru.wr"));
  v.gru_rr = t.leaf(reg.tensor("sa.gru.rr"));
  v.gru_br = t.leaf(reg.tensor("sa.gru.br"));
  v.gru_wh = t.leaf(reg.tensor("sa.gru.wh"));
  v.gru_rh = t.leaf(reg.tensor("sa.gru.rh"));
  v.gru_bh = t.leaf(reg.tensor("sa.gru.bh"));
  v.slot_init = t.leaf(reg.tensor("sa.slot_init"));
  v.norm_in_g = t.leaf(reg.tensor("sa.norm_in.g"));
  v.norm_in_b = t.leaf(reg.tensor("sa.norm_in.b"));
  v.norm_slots_g = t.leaf(reg.tensor("sa.norm_slots.g"));
  v.norm_slots_b = t.leaf(reg.tensor("sa.norm_slots.b"));
  return v;
}

struct AttentionStep {
  Var attention;     // A, N x P, rows sum to 1
  Var renormalized;  // A-hat, columns sum to 1 where the column has mass
  Var update;        // U, P x D
};

// One pass of the attention equations on raw inputs: A = softmax over slots
// of k(M) q(slots)^T / sqrt(D); U = A-hat^T v(M). Normalization of M and of
// the slot state is the caller's concern (see run_slot_attention).
template <typename T>
AttentionStep attention_step(Tape<T>& t, Var tokens, Var slots, const SlotAttentionVars& v,
                             T renorm_eps = T(1e-8)) {
  const auto& mv = t.value(tokens);
  if (mv.rank() != 2 || mv.dim(0) < 1) throw InputError("attention_step: token matrix is empty");
  const int n = mv.dim(0);
  const int d = t.value(slots).dim(1);

  Var keys = ops::matmul(t, tokens, v.w_k);     // N x D
  Var values = ops::matmul(t, tokens, v.w_v);   // N x D
  Var queries = ops::matmul(t, slots, v.w_q);   // P x D
  Var logits = ops::mul_scalar(t, ops::matmul(t, keys, ops::transpose(t, queries)),
                               T(1) / static_cast<T>(std::sqrt(static_cast<double>(d))));
  AttentionStep out;
  out.attention = ops::softmax_axis(t, logits, 1);  // competition over slots
  Var colsum = ops::sum_axis0(t, out.attention);    // 1 x P
  Var denom = ops::add_scalar(t, ops::tile_rows(t, colsum, n), renorm_eps);
  out.renormalized = ops::div(t, out.attention, denom);
  out.update = ops::matmul(t, ops::transpose(t, out.renormalized), values);  // P x D
  return out;
}

// Standard GRU cell applied per slot with shared weights:
//   z = sigmoid(U Wz + h Rz + bz), r = sigmoid(U Wr + h Rr + br),
//   c = tanh(U Wh + (r . h) Rh + bh), h' = (1 - z) . h + z . c
template <typename T>
Var gru_update(Tape<T>& t, Var slots_prev, Var update, const SlotAttentionVars& v) {
  const int p = t.value(slots_prev).dim(0);
  auto gate = [&](Var wu, Var rh, Var b, Var hin) {
    return ops::add(t, ops::add(t, ops::matmul(t, update, wu), ops::matmul(t, hin, rh)),
                    ops::tile_rows(t, b, p));
  };
  Var z = ops::sigmoid(t, gate(v.gru_wz, v.gru_rz, v.gru_bz, slots_prev));
  Var r = ops::sigmoid(t, gate(v.gru_wr, v.gru_rr, v.gru_br, slots_prev));
  Var rh = ops::mul(t, r, slots_prev);
  Var c = ops::tanh_(t, ops::add(t, ops::add(t, ops::matmul(t, update, v.gru_wh), ops::matmul(t, rh, v.gru_rh)),
                                 ops::tile_rows(t, v.gru_bh, p)));
  Var one_minus_z = ops::add_scalar(t, ops::mul_scalar(t, z, T(-1)), T(1));
  return ops::add(t, ops::mul(t, one_minus_z, slots_prev), ops::mul(t, z, c));
}

struct SlotAttentionResult {
  Var slots;            // P x D
  Var final_attention;  // N x P from the last iteration
};

// Runs `iters` rounds starting from the learnable slot embeddings. The token
// matrix is layer-normalized once before k/v; the slot state is
// layer-normalized before q on every iteration.
template <typename T>
SlotAttentionResult run_slot_attention(Tape<T>& t, Var tokens, const SlotAttentionVars& v, int iters) {
  if (iters < 1) throw InputError("run_slot_attention: iters must be >= 1");
  Var tokens_n = ops::layer_norm(t, tokens, v.norm_in_g, v.norm_in_b);
  Var state = v.slot_init;
  Var last_attention = -1;
  for (int it = 0; it < iters; ++it) {
    Var state_n = ops::layer_norm(t, state, v.norm_slots_g, v.norm_slots_b);
    AttentionStep step = attention_step(t, tokens_n, state_n, v);
    last_attention = step.attention;
    state = gru_update(t, state, step.update, v);
  }
  return SlotAttentionResult{state, last_attention};
}

}  // namespace slottta

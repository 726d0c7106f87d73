#pragma once

#include <map>
#include <vector>

#include "slottta/hungarian.hpp"
#include "slottta/ops.hpp"

// Matched segmentation cross-entropy, MSE reconstruction, and their weighted
// combination. The Hungarian cost couples slot k to ground-truth instance g
// through the mean negative log-probability of k over g's pixels; the same
// quantities feed the cross-entropy after matching.
namespace slottta {

template <typename T>
struct SegLossResult {
  Var loss = -1;  // scalar tape var
  Assignment assignment;
  std::vector<int> matched_ids;    // instance ids present among the decoded pixels, ascending
  std::vector<int> unmatched_ids;  // instance ids with no decoded pixel
};

// seg_logprobs: P x Q log softmax over slots; pixel_instance_ids: length Q,
// values in [0, total_instances). Instances without pixels in the decoded set
// are excluded from matching and recorded as unmatched.
template <typename T>
SegLossResult<T> segmentation_loss(Tape<T>& t, Var seg_logprobs, const std::vector<int>& pixel_instance_ids,
                                   int total_instances) {
  const auto& lp = t.value(seg_logprobs);
  const int p = lp.dim(0);
  const int q = lp.dim(1);
  if (static_cast<size_t>(q) != pixel_instance_ids.size())
    throw ShapeError("segmentation_loss: " + std::to_string(pixel_instance_ids.size()) +
                     " pixel labels for " + std::to_string(q) + " decoded pixels");

  std::vector<int> count(static_cast<size_t>(total_instances), 0);
  for (int id : pixel_instance_ids) {
    if (id < 0 || id >= total_instances)
      throw InputError("segmentation_loss: instance id " + std::to_string(id) + " out of range");
    ++count[static_cast<size_t>(id)];
  }

  SegLossResult<T> out;
  std::map<int, int> col_of_id;
  for (int id = 0; id < total_instances; ++id) {
    if (count[static_cast<size_t>(id)] > 0) {
      col_of_id[id] = static_cast<int>(out.matched_ids.size());
      out.matched_ids.push_back(id);
    } else {
      out.unmatched_ids.push_back(id);
    }
  }
  const int g = static_cast<int>(out.matched_ids.size());

  // cost[k][g'] = mean over instance pixels of -logprob of slot k
  std::vector<double> cost(static_cast<size_t>(p) * g, 0.0);
  for (int i = 0; i < q; ++i) {
    const int col = col_of_id.at(pixel_instance_ids[static_cast<size_t>(i)]);
    for (int k = 0; k < p; ++k)
      cost[static_cast<size_t>(k) * g + col] -= static_cast<double>(lp.at(k, i));
  }
  for (int k = 0; k < p; ++k)
    for (int j = 0; j < g; ++j)
      cost[static_cast<size_t>(k) * g + j] /= count[static_cast<size_t>(out.matched_ids[static_cast<size_t>(j)])];

  out.assignment = hungarian_match(cost, p, g);

  // cross-entropy of the matched slot per pixel, as mean over pixels
  Tensor<T> onehot = Tensor<T>::zeros({p, q});
  for (int i = 0; i < q; ++i) {
    const int col = col_of_id.at(pixel_instance_ids[static_cast<size_t>(i)]);
    const int slot = out.assignment.slot_for_gt[static_cast<size_t>(col)];
    onehot.at(slot, i) = T(1);
  }
  Var picked = ops::mul(t, seg_logprobs, t.constant(std::move(onehot)));
  out.loss = ops::mul_scalar(t, ops::sum_all(t, picked), T(-1) / static_cast<T>(q));
  return out;
}

// Mean over all entries of the squared difference.
template <typename T>
Var reconstruction_loss(Tape<T>& t, Var composite, Var target) {
  Var d = ops::sub(t, composite, target);
  return ops::mean_all(t, ops::mul(t, d, d));
}

template <typename T>
struct LossBreakdown {
  Var l_seg = -1;
  Var l_recon = -1;
  Var total = -1;
  double lambda_s = 1.0;
  double lambda_r = 1.0;
  SegLossResult<T> seg;
};

// total = lambda_s * l_seg + lambda_r * l_recon. Both weights zero is a
// configuration error (there would be nothing to optimize).
template <typename T>
Var combine_losses(Tape<T>& t, Var l_seg, Var l_recon, T lambda_s, T lambda_r) {
  if (lambda_s < 0 || lambda_r < 0) throw ConfigError("loss weights must be non-negative");
  if (lambda_s == 0 && lambda_r == 0) throw ConfigError("both loss weights are zero");
  if (lambda_s == 0) return ops::mul_scalar(t, l_recon, lambda_r);
  if (lambda_r == 0) return ops::mul_scalar(t, l_seg, lambda_s);
  return ops::add(t, ops::mul_scalar(t, l_seg, lambda_s), ops::mul_scalar(t, l_recon, lambda_r));
}

}  // namespace slottta

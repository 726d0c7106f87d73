#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "slottta/errors.hpp"
#include "slottta/rng.hpp"

namespace slottta {

// Q distinct pixel indices, uniform without replacement (partial
// Fisher-Yates), deterministic per seed.
inline std::vector<int> sample_pixels_uniform(int h, int w, int q, uint64_t seed) {
  const int n = h * w;
  if (q > n) throw InputError("sample_pixels_uniform: requested " + std::to_string(q) + " of " + std::to_string(n));
  Rng rng(seed_mix(seed, 0x756e6966ull));
  std::vector<int> idx(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
  for (int i = 0; i < q; ++i) {
    const int j = i + static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n - i)));
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  }
  idx.resize(static_cast<size_t>(q));
  return idx;
}

// Q draws with replacement, pixel i drawn with probability
// softmax(error_i / tau). A constant error map degrades to uniform.
template <typename T>
std::vector<int> error_weighted_sample(const std::vector<T>& error_map, int q, double tau, uint64_t seed) {
  if (error_map.empty()) throw InputError("error_weighted_sample: empty error map");
  if (q < 1) throw InputError("error_weighted_sample: need at least one draw");
  if (tau <= 0) throw InputError("error_weighted_sample: temperature must be positive");
  double mx = -1;
  for (const T e : error_map) {
    const double v = static_cast<double>(e);
    if (!(v >= 0) || !std::isfinite(v)) throw InputError("error_weighted_sample: errors must be finite and >= 0");
    mx = std::max(mx, v);
  }
  std::vector<double> cum(error_map.size());
  double total = 0;
  for (size_t i = 0; i < error_map.size(); ++i) {
    total += std::exp((static_cast<double>(error_map[i]) - mx) / tau);
    cum[i] = total;
  }
  Rng rng(seed_mix(seed, 0x65777361ull));
  std::vector<int> out(static_cast<size_t>(q));
  for (int d = 0; d < q; ++d) {
    const double u = rng.uniform() * total;
    const auto it = std::lower_bound(cum.begin(), cum.end(), u);
    out[static_cast<size_t>(d)] = static_cast<int>(std::min(cum.size() - 1, static_cast<size_t>(it - cum.begin())));
  }
  return out;
}

}  // namespace slottta

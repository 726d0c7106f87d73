#pragma once

#include <vector>

namespace slottta {

// Minimum-cost injective assignment of G ground-truth masks to P slots,
// G <= P. `cost` is row-major P x G: cost[k][g] is the price of slot k owning
// ground-truth g. Ties are broken toward the lexicographically smallest
// (slot_for_gt[0], slot_for_gt[1], ...) sequence among all minimum-cost
// assignments, which makes the result deterministic.
struct Assignment {
  std::vector<int> slot_for_gt;  // size G, distinct entries in [0, P)
  double total_cost = 0;
};

Assignment hungarian_match(const std::vector<double>& cost, int slots, int gts);

}  // namespace slottta

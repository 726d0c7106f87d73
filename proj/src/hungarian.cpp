#include "slottta/hungarian.hpp"

#include <cmath>
#include <limits>

#include "slottta/errors.hpp"

namespace slottta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Potentials-based O(rows^2 * cols) assignment for rows <= cols. cost is
// row-major rows x cols; banned[r * cols + c] marks forbidden pairs.
// Returns the optimal total (kInf when infeasible) and fills col_of_row.
double solve_rows_to_cols(const std::vector<double>& cost, int rows, int cols,
                          const std::vector<char>& banned, std::vector<int>& col_of_row) {
  std::vector<double> u(static_cast<size_t>(rows) + 1, 0), v(static_cast<size_t>(cols) + 1, 0);
  std::vector<int> way(static_cast<size_t>(cols) + 1, 0);
  std::vector<int> row_of_col(static_cast<size_t>(cols) + 1, 0);  // 1-based rows, 0 = free

  auto at = [&](int r, int c) -> double {
    const double x = cost[static_cast<size_t>(r) * cols + c];
    return banned.empty() || !banned[static_cast<size_t>(r) * cols + c] ? x : kInf;
  };

  for (int r = 1; r <= rows; ++r) {
    row_of_col[0] = r;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(cols) + 1, kInf);
    std::vector<char> used(static_cast<size_t>(cols) + 1, 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      const int i0 = row_of_col[static_cast<size_t>(j0)];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= cols; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double cur = at(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      if (!(delta < kInf)) return kInf;  // no augmenting path
      for (int j = 0; j <= cols; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(row_of_col[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      row_of_col[static_cast<size_t>(j0)] = row_of_col[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0);
  }

  col_of_row.assign(static_cast<size_t>(rows), -1);
  double total = 0;
  for (int j = 1; j <= cols; ++j) {
    const int r = row_of_col[static_cast<size_t>(j)];
    if (r > 0) {
      col_of_row[static_cast<size_t>(r - 1)] = j - 1;
      total += at(r - 1, j - 1);
    }
  }
  return total;
}

}  // namespace

Assignment hungarian_match(const std::vector<double>& cost, int slots, int gts) {
  if (gts > slots)
    throw InputError("hungarian_match: " + std::to_string(gts) + " ground-truth masks exceed " +
                     std::to_string(slots) + " slots");
  Assignment out;
  if (gts == 0) return out;
  if (static_cast<int>(cost.size()) != slots * gts)
    throw ShapeError("hungarian_match: cost buffer does not match " + std::to_string(slots) + "x" +
                     std::to_string(gts));
  for (double c : cost)
    if (!std::isfinite(c)) throw InputError("hungarian_match: non-finite cost entry");

  // transpose to gt-major (rows = ground-truth, cols = slots)
  std::vector<double> gcost(static_cast<size_t>(gts) * slots);
  for (int k = 0; k < slots; ++k)
    for (int g = 0; g < gts; ++g) gcost[static_cast<size_t>(g) * slots + k] = cost[static_cast<size_t>(k) * gts + g];

  std::vector<int> match;
  const double best = solve_rows_to_cols(gcost, gts, slots, {}, match);

  // Lexicographic fix-up: pin slots to ground-truth masks in order, keeping
  // the total at the optimum.
  const double eps = 1e-9 * (1.0 + std::abs(best));
  std::vector<char> slot_used(static_cast<size_t>(slots), 0);
  out.slot_for_gt.assign(static_cast<size_t>(gts), -1);
  double fixed_cost = 0;
  for (int g = 0; g < gts; ++g) {
    bool placed = false;
    for (int k = 0; k < slots && !placed; ++k) {
      if (slot_used[static_cast<size_t>(k)]) continue;
      // candidate: force g -> k, solve the rest over the remaining slots
      const int rem_rows = gts - g - 1;
      double rest = 0;
      if (rem_rows > 0) {
        std::vector<double> sub(static_cast<size_t>(rem_rows) * slots);
        std::vector<char> sub_banned(static_cast<size_t>(rem_rows) * slots, 0);
        for (int g2 = g + 1; g2 < gts; ++g2)
          for (int k2 = 0; k2 < slots; ++k2) {
            sub[static_cast<size_t>(g2 - g - 1) * slots + k2] = gcost[static_cast<size_t>(g2) * slots + k2];
            sub_banned[static_cast<size_t>(g2 - g - 1) * slots + k2] =
                (slot_used[static_cast<size_t>(k2)] || k2 == k) ? 1 : 0;
          }
        std::vector<int> sub_match;
        rest = solve_rows_to_cols(sub, rem_rows, slots, sub_banned, sub_match);
      }
      const double candidate = fixed_cost + gcost[static_cast<size_t>(g) * slots + k] + rest;
      if (candidate <= best + eps) {
        out.slot_for_gt[static_cast<size_t>(g)] = k;
        slot_used[static_cast<size_t>(k)] = 1;
        fixed_cost += gcost[static_cast<size_t>(g) * slots + k];
        placed = true;
      }
    }
    if (!placed) throw ContractError("hungarian_match: internal tie-break failure");
  }
  out.total_cost = fixed_cost;
  return out;
}

}  // namespace slottta

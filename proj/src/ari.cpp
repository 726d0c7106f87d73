#include "slottta/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>

#include "slottta/errors.hpp"

namespace slottta {

namespace {

// Remaps arbitrary labels to 0..k-1.
std::vector<int> compact(const std::vector<int>& labels, int& k) {
  std::map<int, int> ids;
  std::vector<int> out(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw InputError("adjusted_rand_index: negative label");
    auto [it, fresh] = ids.emplace(labels[i], static_cast<int>(ids.size()));
    (void)fresh;
    out[i] = it->second;
  }
  k = static_cast<int>(ids.size());
  return out;
}

uint64_t choose2(uint64_t n) { return n * (n - 1) / 2; }

}  // namespace

double adjusted_rand_index(const std::vector<int>& pred, const std::vector<int>& gt) {
  if (pred.size() != gt.size())
    throw InputError("adjusted_rand_index: length mismatch, " + std::to_string(pred.size()) + " vs " +
                     std::to_string(gt.size()));
  const uint64_t q = pred.size();
  if (q < 2) throw InputError("adjusted_rand_index: undefined for fewer than two elements");

  int kp = 0, kg = 0;
  const std::vector<int> p = compact(pred, kp);
  const std::vector<int> g = compact(gt, kg);

  std::vector<uint64_t> table(static_cast<size_t>(kp) * kg, 0);
  std::vector<uint64_t> a(static_cast<size_t>(kp), 0), b(static_cast<size_t>(kg), 0);
  for (size_t i = 0; i < p.size(); ++i) {
    ++table[static_cast<size_t>(p[i]) * kg + g[i]];
    ++a[static_cast<size_t>(p[i])];
    ++b[static_cast<size_t>(g[i])];
  }

  uint64_t sum_nij = 0;
  for (uint64_t n : table) sum_nij += choose2(n);
  uint64_t sum_a = 0, sum_b = 0;
  for (uint64_t n : a) sum_a += choose2(n);
  for (uint64_t n : b) sum_b += choose2(n);

  const double total_pairs = static_cast<double>(choose2(q));
  const double expected = static_cast<double>(sum_a) * static_cast<double>(sum_b) / total_pairs;
  const double maximum = 0.5 * (static_cast<double>(sum_a) + static_cast<double>(sum_b));
  const double denom = maximum - expected;
  if (denom == 0.0) return 1.0;  // both partitions trivial
  return (static_cast<double>(sum_nij) - expected) / denom;
}

namespace {

std::vector<double> ranks_with_ties(const std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) { return v[x] < v[y]; });
  std::vector<double> r(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw InputError("spearman_correlation: need two equal-length series");
  const std::vector<double> ra = ranks_with_ties(a);
  const std::vector<double> rb = ranks_with_ties(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0, va = 0, vb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double da = ra[i] - ma, db = rb[i] - mb;
    num += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0 || vb == 0) return 0.0;
  return num / std::sqrt(va * vb);
}

}  // namespace slottta

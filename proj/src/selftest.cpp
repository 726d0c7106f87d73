#include "slottta/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#include "slottta/gradcheck.hpp"
#include "slottta/losses.hpp"
#include "slottta/metrics.hpp"
#include "slottta/rng.hpp"
#include "slottta/slot_attention.hpp"
#include "slottta/slt_io.hpp"

namespace slottta {

Assignment brute_force_match(const std::vector<double>& cost, int slots, int gts) {
  if (gts > slots) throw InputError("brute_force_match: more ground-truth masks than slots");
  Assignment best;
  best.total_cost = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<size_t>(gts), -1);
  std::vector<char> used(static_cast<size_t>(slots), 0);
  const double tie_eps = 1e-12;

  std::function<void(int, double)> rec = [&](int g, double acc) {
    if (g == gts) {
      const bool first = best.slot_for_gt.empty();
      const bool better = first || acc < best.total_cost - tie_eps;
      const bool tie_smaller = !first && std::abs(acc - best.total_cost) <= tie_eps &&
                               std::lexicographical_compare(pick.begin(), pick.end(), best.slot_for_gt.begin(),
                                                            best.slot_for_gt.end());
      if (better) {
        best.slot_for_gt = pick;
        best.total_cost = acc;
      } else if (tie_smaller) {
        best.slot_for_gt = pick;
      }
      return;
    }
    for (int k = 0; k < slots; ++k) {
      if (used[static_cast<size_t>(k)]) continue;
      used[static_cast<size_t>(k)] = 1;
      pick[static_cast<size_t>(g)] = k;
      rec(g + 1, acc + cost[static_cast<size_t>(k) * gts + g]);
      used[static_cast<size_t>(k)] = 0;
    }
  };
  if (gts > 0) rec(0, 0.0);
  return best;
}

double ari_pair_counting(const std::vector<int>& a, const std::vector<int>& b) {
  const size_t q = a.size();
  double together_both = 0, together_a = 0, together_b = 0;
  for (size_t i = 0; i < q; ++i)
    for (size_t j = i + 1; j < q; ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      together_a += sa;
      together_b += sb;
      together_both += sa && sb;
    }
  const double pairs = 0.5 * static_cast<double>(q) * static_cast<double>(q - 1);
  const double expected = together_a * together_b / pairs;
  const double maximum = 0.5 * (together_a + together_b);
  if (maximum - expected == 0) return 1.0;
  return (together_both - expected) / (maximum - expected);
}

namespace {

void check(bool ok, const std::string& what) {
  if (!ok) throw Error("selftest failed: " + what);
}

void selftest_hungarian(std::ostream& os) {
  Rng rng(101);
  for (int trial = 0; trial < 250; ++trial) {
    const int p = 2 + static_cast<int>(rng.uniform_int(5));
    const int g = 1 + static_cast<int>(rng.uniform_int(static_cast<uint64_t>(p)));
    std::vector<double> cost(static_cast<size_t>(p) * g);
    const bool integer_costs = trial % 3 == 0;
    for (auto& c : cost) c = integer_costs ? static_cast<double>(rng.uniform_int(6)) : rng.uniform(0, 10);
    const Assignment fast = hungarian_match(cost, p, g);
    const Assignment brute = brute_force_match(cost, p, g);
    check(std::abs(fast.total_cost - brute.total_cost) <= 1e-9, "assignment optimum mismatch");
    check(fast.slot_for_gt == brute.slot_for_gt, "assignment tie-break mismatch");
  }
  os << "selftest assignment-vs-brute-force: ok\n";
}

void selftest_ari(std::ostream& os) {
  Rng rng(202);
  for (int trial = 0; trial < 120; ++trial) {
    const int q = 2 + static_cast<int>(rng.uniform_int(49));
    std::vector<int> a(static_cast<size_t>(q)), b(static_cast<size_t>(q));
    for (int i = 0; i < q; ++i) {
      a[static_cast<size_t>(i)] = static_cast<int>(rng.uniform_int(4));
      b[static_cast<size_t>(i)] = static_cast<int>(rng.uniform_int(4));
    }
    check(std::abs(adjusted_rand_index(a, b) - ari_pair_counting(a, b)) <= 1e-12, "ARI oracle mismatch");
  }
  check(std::abs(adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1}) - (-0.5)) <= 1e-12,
        "ARI of the crossing partition");
  check(adjusted_rand_index({1, 2, 1, 2}, {5, 7, 5, 7}) == 1.0, "ARI of identical partitions");
  os << "selftest ari-vs-pair-counting: ok\n";
}

void selftest_gradients(std::ostream& os) {
  // small slot-attention forward + MSE, checked against central differences
  Rng rng(303);
  SlotAttentionDims dims;
  dims.token_dim = 3;
  dims.slot_dim = 4;
  dims.slots = 2;
  dims.iters = 2;
  ParamRegistry<double> reg;
  init_slot_attention_params(reg, dims, rng);
  Tensor<double> tokens = Tensor<double>::zeros({16, 3});
  for (auto& v : tokens.data) v = rng.normal();
  Tensor<double> target = Tensor<double>::zeros({2, 4});
  for (auto& v : target.data) v = rng.normal();

  auto build = [&](Tape<double>& t, const ParamRegistry<double>& p) {
    SlotAttentionVars v = bind_slot_attention(t, p);
    Var m = t.constant(tokens);
    SlotAttentionResult r = run_slot_attention(t, m, v, dims.iters);
    Var d = ops::sub(t, r.slots, t.constant(target));
    return ops::mean_all(t, ops::mul(t, d, d));
  };
  auto value = [&](const ParamRegistry<double>& p) {
    Tape<double> t;
    return t.value(build(t, p)).data[0];
  };
  auto analytic = [&](const ParamRegistry<double>& p) {
    Tape<double> t;
    t.backward(build(t, p));
    std::map<std::string, Tensor<double>> grads;
    Var leaf = 0;
    for (const auto& e : p.entries()) grads[e.name] = t.grad(leaf++);
    return grads;
  };
  const FdReport report = finite_difference_check(value, analytic, reg, 1e-4);
  check(report.pass(1e-4), "slot-attention finite-difference check");
  os << "selftest finite-differences: ok (worst rel err " << report.worst_rel << ")\n";
}

void selftest_container(std::ostream& os) {
  Rng rng(404);
  Tensor<float> t = Tensor<float>::zeros({5, 3});
  for (auto& v : t.data) v = static_cast<float>(rng.normal());
  std::ostringstream buf;
  write_slt(buf, t);
  std::istringstream in(buf.str());
  const Tensor<float> r = read_slt_f32(in, "selftest");
  check(r.shape == t.shape && r.data == t.data, "container round trip");
  os << "selftest slt-container: ok\n";
}

}  // namespace

int run_selftest(std::ostream& os) {
  selftest_hungarian(os);
  selftest_ari(os);
  selftest_gradients(os);
  selftest_container(os);
  os << "selftest: all suites passed\n";
  return 0;
}

}  // namespace slottta

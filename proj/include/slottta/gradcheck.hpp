#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "slottta/registry.hpp"

namespace slottta {

struct FdEntry {
  std::string name;
  double max_rel_err = 0;
  double max_abs_err = 0;
};

struct FdReport {
  std::vector<FdEntry> entries;
  double worst_rel = 0;

  bool pass(double tol) const { return worst_rel <= tol; }
};

// Central-difference check of an analytic gradient. `value` evaluates the
// objective at the given parameters; `analytic` returns named gradients
// (normally by running the tape's backward). The objective must be
// deterministic; this is probed with two identical evaluations.
inline FdReport finite_difference_check(
    const std::function<double(const ParamRegistry<double>&)>& value,
    const std::function<std::map<std::string, Tensor<double>>(const ParamRegistry<double>&)>& analytic,
    const ParamRegistry<double>& params, double h, double denom_floor = 1e-6) {
  const double f0 = value(params);
  const double f0_again = value(params);
  if (f0 != f0_again)
    throw ContractError("finite_difference_check: objective is not deterministic (" + std::to_string(f0) +
                        " vs " + std::to_string(f0_again) + ")");

  const auto grads = analytic(params);
  ParamRegistry<double> work = params.clone();

  FdReport report;
  for (const auto& e : params.entries()) {
    const auto git = grads.find(e.name);
    if (git == grads.end())
      throw ContractError("finite_difference_check: analytic gradients missing parameter '" + e.name + "'");
    const Tensor<double>& g = git->second;
    FdEntry entry;
    entry.name = e.name;
    std::vector<double>& buf = work.tensor(e.name).data;
    for (size_t i = 0; i < buf.size(); ++i) {
      const double orig = buf[i];
      buf[i] = orig + h;
      const double fp = value(work);
      buf[i] = orig - h;
      const double fm = value(work);
      buf[i] = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = g.data[i];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({denom_floor, std::abs(a), std::abs(numeric)});
      entry.max_abs_err = std::max(entry.max_abs_err, abs_err);
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
    }
    report.worst_rel = std::max(report.worst_rel, entry.max_rel_err);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace slottta

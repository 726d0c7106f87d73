#pragma once

#include <string>
#include <utility>
#include <vector>

namespace slottta {

// Aggregates suite/eval CSVs into summary.csv (split x {direct, tta}
// mean/std/N) and renders scatter.ppm (grad_cosine vs ARI improvement) and
// bars.ppm (mean ARI per split). Inputs are (split name, csv path) pairs.
void emit_report(const std::vector<std::pair<std::string, std::string>>& named_csvs, const std::string& out_dir);

}  // namespace slottta

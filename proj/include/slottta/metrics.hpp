#pragma once

#include <vector>

namespace slottta {

// Adjusted Rand Index between two pixel labelings, background label included
// like any other. Labels are arbitrary non-negative integers. Range [-1, 1];
// the degenerate case where the chance-correction denominator vanishes (both
// partitions trivial) is defined as 1.0. Throws on length mismatch or fewer
// than two elements.
double adjusted_rand_index(const std::vector<int>& pred, const std::vector<int>& gt);

// Spearman rank correlation with average ranks on ties; 0 when either side
// is constant.
double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace slottta

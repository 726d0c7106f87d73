#pragma once

#include <iosfwd>
#include <vector>

#include "slottta/hungarian.hpp"

namespace slottta {

// Independent oracles used by the self-test, the unit tests and the
// acceptance suite. They deliberately avoid the production code paths they
// check.

// Exhaustive minimum over all injective gt->slot assignments, same
// lexicographic tie-break as hungarian_match.
Assignment brute_force_match(const std::vector<double>& cost, int slots, int gts);

// ARI by direct pair counting over all element pairs (O(Q^2)).
double ari_pair_counting(const std::vector<int>& a, const std::vector<int>& b);

// Runs the oracle suites (assignment, ARI, finite differences, container
// round trip); prints one line per suite. Returns 0 on success.
int run_selftest(std::ostream& os);

}  // namespace slottta

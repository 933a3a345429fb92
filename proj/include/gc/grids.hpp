#pragma once

#include <vector>

namespace gc {

// Deterministic direction sets on the unit sphere. d=1 gives {+1,-1}, d=2 a
// uniform angular grid, d=3 a Fibonacci sphere; higher d uses a seeded
// low-discrepancy normal draw. The same grids back every sampled norm, so
// sampled values are reproducible bit for bit.
std::vector<std::vector<double>> unit_directions(int d, int n);

// n log-spaced radii in [lo, hi].
std::vector<double> log_radii(double lo, double hi, int n);

}  // namespace gc

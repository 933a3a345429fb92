#include "gc/grids.hpp"

#include <cmath>
#include <cstdint>

namespace gc {

namespace {

// splitmix64; used only to make the d>3 direction grid deterministic.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double u01(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

}  // namespace

std::vector<std::vector<double>> unit_directions(int d, int n) {
  std::vector<std::vector<double>> dirs;
  if (d == 1) {
    dirs.push_back({1.0});
    dirs.push_back({-1.0});
    return dirs;
  }
  if (d == 2) {
    dirs.reserve(n);
    for (int i = 0; i < n; ++i) {
      double a = 2.0 * M_PI * (i + 0.5) / n;
      dirs.push_back({std::cos(a), std::sin(a)});
    }
    return dirs;
  }
  if (d == 3) {
    // Fibonacci sphere: near-uniform, deterministic.
    const double ga = M_PI * (3.0 - std::sqrt(5.0));
    dirs.reserve(n);
    for (int i = 0; i < n; ++i) {
      double z = 1.0 - (2.0 * i + 1.0) / n;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double a = ga * i;
      dirs.push_back({r * std::cos(a), r * std::sin(a), z});
    }
    return dirs;
  }
  // Box-Muller off a fixed-seed counter stream, then normalize.
  dirs.reserve(n);
  std::uint64_t seed = 0x5eedu + 1315423911ull * static_cast<std::uint64_t>(d);
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(d);
    double s2 = 0;
    for (int j = 0; j < d; ++j) {
      std::uint64_t c = static_cast<std::uint64_t>(i) * 64 + 2 * j;
      double u1 = u01(mix(seed ^ c));
      double u2 = u01(mix(seed ^ (c + 1)));
      v[j] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
      s2 += v[j] * v[j];
    }
    double inv = 1.0 / std::sqrt(s2);
    for (double& x : v) x *= inv;
    dirs.push_back(std::move(v));
  }
  return dirs;
}

std::vector<double> log_radii(double lo, double hi, int n) {
  std::vector<double> r(n);
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i) {
    double t = (n == 1) ? 0.0 : static_cast<double>(i) / (n - 1);
    r[i] = std::exp(llo + t * (lhi - llo));
  }
  return r;
}

}  // namespace gc

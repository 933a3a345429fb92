#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "gc/freq.hpp"
#include "gc/grids.hpp"

using namespace gc;

TEST_SUITE("unit.freq") {

TEST_CASE("fixed point collapses doubles within half a quantum") {
  std::vector<double> a = {1.0, -2.5};
  std::vector<double> b = {1.0 + 0.4 / Freq::kScale, -2.5};
  CHECK(Freq::from_doubles(a) == Freq::from_doubles(b));
  std::vector<double> c = {1.0 + 2.0 / Freq::kScale, -2.5};
  CHECK(Freq::from_doubles(a) != Freq::from_doubles(c));
}

TEST_CASE("arithmetic is exact and closed") {
  auto t = Freq::from_doubles({0.125, 0.2});
  auto s = Freq::from_doubles({0.375, -0.2});
  auto sum = t + s;
  // Dyadic components add exactly; non-dyadic ones cancel exactly.
  CHECK(sum == Freq::from_doubles({0.5, 0.0}));
  CHECK((sum - s) == t);
  CHECK((-t) + t == Freq::zero(2));
  CHECK(Freq::zero(2).is_zero());
  CHECK_FALSE(t.is_zero());
}

TEST_CASE("lexicographic order is strict and total on distinct points") {
  auto a = Freq::from_doubles({1.0, 0.0});
  auto b = Freq::from_doubles({1.0, 0.5});
  auto c = Freq::from_doubles({2.0, -9.0});
  CHECK(a < b);
  CHECK(b < c);
  CHECK_FALSE(b < a);
  CHECK_FALSE(a < a);
}

TEST_CASE("weights") {
  CHECK(weight(std::vector<double>{3.0, 4.0}) == doctest::Approx(6.0));
  CHECK(weight(std::vector<double>{0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(weight(-2.0) == doctest::Approx(3.0));
  CHECK(freq_weight(Freq::from_doubles({3.0, 4.0})) == doctest::Approx(6.0));
}

TEST_CASE("peetre inequality holds on random samples") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int it = 0; it < 10000; ++it) {
    std::vector<double> xi = {u(rng), u(rng)};
    std::vector<double> th = {u(rng), u(rng)};
    double wXi = weight(xi);
    double wTh = weight(th);
    double wSum = weight(std::vector<double>{xi[0] + th[0], xi[1] + th[1]});
    CHECK(wSum <= wTh * wXi * (1 + 1e-12));
    CHECK(wSum >= wXi / wTh * (1 - 1e-12));
  }
}

TEST_CASE("shift_point adds the frequency componentwise") {
  auto t = Freq::from_doubles({1.5, -0.5});
  auto y = shift_point({0.5, 0.5}, t);
  CHECK(y[0] == doctest::Approx(2.0));
  CHECK(y[1] == doctest::Approx(0.0));
}

TEST_CASE("unit directions have unit norm in every dimension") {
  for (int d = 1; d <= 5; ++d) {
    auto dirs = unit_directions(d, 32);
    CHECK(dirs.size() >= 2);
    for (const auto& u : dirs) {
      REQUIRE(static_cast<int>(u.size()) == d);
      double n = 0;
      for (double v : u) n += v * v;
      CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("unit directions are deterministic") {
  auto a = unit_directions(4, 16);
  auto b = unit_directions(4, 16);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int j = 0; j < 4; ++j) CHECK(a[i][j] == b[i][j]);
}

TEST_CASE("log radii span the requested bracket") {
  auto rs = log_radii(0.1, 100.0, 16);
  REQUIRE(rs.size() == 16);
  CHECK(rs.front() == doctest::Approx(0.1));
  CHECK(rs.back() == doctest::Approx(100.0));
  for (std::size_t i = 1; i < rs.size(); ++i) CHECK(rs[i] > rs[i - 1]);
}

}

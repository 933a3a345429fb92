#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace gc {

// Frequency vectors are stored in fixed-point with resolution 2^-40 so that
// equality, hashing and closure under addition are exact. Doubles within half
// a quantum of each other collapse to the same frequency.
class Freq {
 public:
  static constexpr double kScale = 1099511627776.0;  // 2^40

  Freq() = default;
  explicit Freq(std::vector<std::int64_t> q) : q_(std::move(q)) {}

  static Freq from_doubles(const std::vector<double>& x) {
    std::vector<std::int64_t> q(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) q[i] = llround(x[i] * kScale);
    return Freq(std::move(q));
  }
  static Freq zero(int d) { return Freq(std::vector<std::int64_t>(d, 0)); }

  int dim() const { return static_cast<int>(q_.size()); }
  bool is_zero() const {
    for (auto v : q_) if (v != 0) return false;
    return true;
  }
  double operator[](int i) const { return static_cast<double>(q_[i]) / kScale; }
  std::int64_t quantum(int i) const { return q_[i]; }

  std::vector<double> to_doubles() const {
    std::vector<double> x(q_.size());
    for (std::size_t i = 0; i < q_.size(); ++i) x[i] = static_cast<double>(q_[i]) / kScale;
    return x;
  }

  double norm() const {
    double s = 0;
    for (auto v : q_) {
      double x = static_cast<double>(v) / kScale;
      s += x * x;
    }
    return std::sqrt(s);
  }

  Freq operator+(const Freq& o) const {
    std::vector<std::int64_t> q(q_.size());
    for (std::size_t i = 0; i < q_.size(); ++i) q[i] = q_[i] + o.q_[i];
    return Freq(std::move(q));
  }
  Freq operator-() const {
    std::vector<std::int64_t> q(q_.size());
    for (std::size_t i = 0; i < q_.size(); ++i) q[i] = -q_[i];
    return Freq(std::move(q));
  }
  Freq operator-(const Freq& o) const { return *this + (-o); }

  std::string to_string() const {
    std::string s = "(";
    char buf[40];
    for (std::size_t i = 0; i < q_.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.12g", static_cast<double>(q_[i]) / kScale);
      if (i) s += ", ";
      s += buf;
    }
    return s + ")";
  }

  bool operator==(const Freq& o) const { return q_ == o.q_; }
  bool operator!=(const Freq& o) const { return q_ != o.q_; }
  // Lexicographic order on quanta; used for deterministic map iteration.
  bool operator<(const Freq& o) const { return q_ < o.q_; }

 private:
  std::vector<std::int64_t> q_;
};

// <x> = 1 + |x|, the weight used throughout for both xi and theta.
inline double weight(double r) { return 1.0 + std::abs(r); }

inline double weight(const std::vector<double>& xi) {
  double s = 0;
  for (double v : xi) s += v * v;
  return 1.0 + std::sqrt(s);
}

inline double freq_weight(const Freq& t) { return 1.0 + t.norm(); }

inline std::vector<double> shift_point(const std::vector<double>& xi, const Freq& t) {
  std::vector<double> y(xi);
  for (int i = 0; i < t.dim(); ++i) y[i] += t[i];
  return y;
}

struct FreqHash {
  std::size_t operator()(const Freq& f) const {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    for (int i = 0; i < f.dim(); ++i) {
      std::size_t v = static_cast<std::size_t>(f.quantum(i));
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

}  // namespace gc

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace promptstrata::fixtures {

// Portable draws on top of mt19937_64, whose output sequence is fixed by the
// standard. The std distributions are implementation-defined, so none are used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Irwin-Hall(12) - 6: mean 0, variance 1.
  double normal() {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform();
    return s - 6.0;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Random unit vector of length n.
  std::vector<double> unit_vector(std::size_t n) {
    std::vector<double> v(n);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& x : v) {
        x = normal();
        norm += x * x;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace promptstrata::fixtures

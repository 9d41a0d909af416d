#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "lichflow/coefficient.hpp"
#include "lichflow/field.hpp"

namespace lichflow::test {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline Grid circle(int n, double length = kTwoPi) { return make_grid(1, {n}, {length}); }
inline Grid torus(int n0, int n1, double l0 = kTwoPi, double l1 = kTwoPi) {
  return make_grid(2, {n0, n1}, {l0, l1});
}

inline Field expr(const std::string& text, const Grid& g) { return materialize(CoefficientSpec::parse(text), g); }

inline Field random_field(const Grid& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = dist(rng);
  return f;
}

inline double dot(const Field& a, const Field& b) { return integrate(hadamard(a, b)); }

}  // namespace lichflow::test

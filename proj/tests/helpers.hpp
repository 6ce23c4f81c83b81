#pragma once

#include <cmath>
#include <initializer_list>

#include "resolvent_lab/linalg.hpp"

namespace rlab::test {

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(int(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline IVec ivec(std::initializer_list<int> xs) {
  IVec v(int(xs.size()));
  int i = 0;
  for (int x : xs) v[i++] = x;
  return v;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace rlab::test

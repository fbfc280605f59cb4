#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "liouville/function_space.hpp"
#include "liouville/potential_model.hpp"

namespace testing_support {

using liouville::GridFunction;

/// Samples f with both endpoints forced to exactly zero.
inline GridFunction pinned(int n, const std::function<double(double)>& f) {
  auto g = GridFunction::sample(n, f);
  std::vector<double> v(g.values().begin(), g.values().end());
  v.front() = v.back() = 0.0;
  return GridFunction(v);
}

inline liouville::Impedance sine_impedance(int n, std::vector<double> amps) {
  return liouville::Impedance(pinned(n, [amps](double x) {
    double s = 0.0;
    for (std::size_t k = 0; k < amps.size(); ++k) s += amps[k] * std::sin(2 * std::numbers::pi * (k + 1) * x);
    return s;
  }));
}

inline liouville::Potential cos_potential(int n, std::vector<double> amps) {
  return liouville::Potential(GridFunction::sample(n, [amps](double x) {
    double s = 0.0;
    for (std::size_t k = 0; k < amps.size(); ++k) s += amps[k] * std::cos(2 * std::numbers::pi * (k + 1) * x);
    return s;
  }));
}

}  // namespace testing_support

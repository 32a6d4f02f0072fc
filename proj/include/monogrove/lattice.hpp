#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "monogrove/schema.hpp"
#include "monogrove/types.hpp"

namespace monogrove {

/// Equispaced axis over a feature's domain. Count and binary features get the
/// integer points of the domain; continuous features get `points` samples.
Vec feature_axis(const Feature& f, int points);

/// Continuous-style axis regardless of kind (used by audit grids, which
/// refine between the integer points of count features as well).
Vec dense_axis(const Feature& f, int points);

inline std::size_t lattice_size(const std::vector<Vec>& axes) {
  std::size_t n = 1;
  for (const Vec& a : axes) n *= static_cast<std::size_t>(a.size());
  return n;
}

/// Odometer iteration over the cartesian product of the axes; `fn` receives
/// the current point. First axis varies slowest.
void for_each_lattice(const std::vector<Vec>& axes, const std::function<void(const Vec&)>& fn);

}  // namespace monogrove

#include "monogrove/lattice.hpp"

#include <cmath>

namespace monogrove {

Vec feature_axis(const Feature& f, int points) {
  if (f.kind == FeatureKind::Count || f.kind == FeatureKind::Binary) {
    int lo = static_cast<int>(std::ceil(f.lo));
    int hi = static_cast<int>(std::floor(f.hi));
    if (hi < lo) throw SchemaError("feature " + f.name + ": no integer points in domain");
    Vec a(hi - lo + 1);
    for (int i = 0; i <= hi - lo; ++i) a(i) = lo + i;
    return a;
  }
  return dense_axis(f, points);
}

Vec dense_axis(const Feature& f, int points) {
  if (points < 2) throw Error("axis needs at least 2 points");
  return Vec::LinSpaced(points, f.lo, f.hi);
}

void for_each_lattice(const std::vector<Vec>& axes, const std::function<void(const Vec&)>& fn) {
  const std::size_t d = axes.size();
  if (lattice_size(axes) == 0) return;
  Vec point(d);
  std::vector<Eigen::Index> idx(d, 0);
  for (std::size_t j = 0; j < d; ++j) point(j) = axes[j](0);
  while (true) {
    fn(point);
    std::size_t j = d;
    while (j > 0) {
      --j;
      if (++idx[j] < axes[j].size()) {
        point(j) = axes[j](idx[j]);
        break;
      }
      idx[j] = 0;
      point(j) = axes[j](0);
      if (j == 0) return;
    }
    if (d == 0) return;
  }
}

}  // namespace monogrove

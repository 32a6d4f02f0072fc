#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace monogrove {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Eigen::Ref;
using ConstRefMat = const Ref<const Mat>;
using ConstRefVec = const Ref<const Vec>;

class Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad shapes, unknown features, inconsistent constraint declarations.
class SchemaError : public Error {
  using Error::Error;
};

/// File and format problems.
class IoError : public Error {
  using Error::Error;
};

/// Divergence and other optimization failures.
class TrainError : public Error {
  using Error::Error;
};

// Deterministic random source. mt19937_64 has a pinned sequence; the scalar
// transforms below are explicit so results do not depend on standard-library
// distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  std::uint64_t integer(std::uint64_t n) { return eng_() % n; }

  // Box-Muller
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace monogrove

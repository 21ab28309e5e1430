#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ragg/sample_set.hpp"

namespace ragg {

// Per-dimension standard deviations for axis-aligned Gaussian generators.
// All deviations must be positive; the largest squared deviation is the
// true sigma_max^2 handed to threshold configs.
class VarianceProfile {
 public:
  static VarianceProfile spherical(double sigma);
  static VarianceProfile log_spaced(double sigma_min, double sigma_max);
  static VarianceProfile explicit_stddevs(std::vector<double> stddevs);

  // Resolved per-dimension deviations; throws if the profile cannot cover d
  // (explicit list of the wrong length) or violates positivity.
  std::vector<double> stddevs(std::size_t d) const;
  double sigma_max_sq(std::size_t d) const;

  std::string describe() const;

 private:
  enum class Kind { kSpherical, kLogSpaced, kExplicit };
  Kind kind_ = Kind::kSpherical;
  double a_ = 1.0;
  double b_ = 1.0;
  std::vector<double> explicit_;
};

// n i.i.d. axis-aligned Gaussian rows; sample i, coordinate j draws the
// (i*d + j)-th normal of the stream, so the set is a pure function of
// (n, d, profile, mean, seed). An empty mean means zero.
SampleSet gaussian_samples(std::size_t n, std::size_t d, const VarianceProfile& profile,
                           const Vector& mean, std::uint64_t seed);

// Two unit-variance Gaussian class clouds at +/- separation/2 along a
// random unit direction; labels alternate +1/-1 so both splits are
// balanced.
struct LogisticTask {
  SampleSet train_x;
  std::vector<int> train_y;
  SampleSet test_x;
  std::vector<int> test_y;
  Vector direction;  // the planted separating direction
};

LogisticTask logistic_task(std::size_t n_train, std::size_t n_test, std::size_t d,
                           double separation, std::uint64_t seed);

}  // namespace ragg

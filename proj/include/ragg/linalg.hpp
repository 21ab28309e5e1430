#pragma once

#include <cstdint>

#include "ragg/sample_set.hpp"

namespace ragg {

// Largest eigenvalue/eigenvector estimate of a weighted sample covariance.
struct EigenPair {
  double value = 0.0;   // variance units, >= 0
  Vector direction;     // unit vector, sign-normalized
};

struct PowerIterationResult {
  EigenPair pair;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct PowerIterationOptions {
  double tol = 1e-10;
  std::size_t max_iter = 1000;
};

// Unweighted arithmetic mean per coordinate.
Vector sample_mean(const SampleSet& x);

// Weighted mean sum_i w_i x_i (weights sum to 1).
Vector sample_mean(const SampleSet& x, const WeightVector& w);

// Action of the weighted covariance Sigma_w = sum_i w_i (x_i - mu_w)(x_i - mu_w)^T
// on v, computed without materializing the d x d matrix.
Vector covariance_apply(const SampleSet& x, const WeightVector& w, const Vector& v);

// Power iteration on covariance_apply from a seeded Gaussian start vector.
// Stops when ||Sigma_w v - lambda v|| <= tol * max(lambda, 1). On a
// numerically zero covariance returns (0, e1). A run that exhausts max_iter
// reports converged=false; the Rayleigh estimate is still a valid lower
// bound on the spectral norm.
// Sign convention: the first component of the direction with magnitude
// above 1e-12 is positive.
PowerIterationResult top_eigenpair(const SampleSet& x, const WeightVector& w,
                                   std::uint64_t seed,
                                   const PowerIterationOptions& opts = {});

double spectral_norm(const SampleSet& x, const WeightVector& w, std::uint64_t seed,
                     const PowerIterationOptions& opts = {});

}  // namespace ragg

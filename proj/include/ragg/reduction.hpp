#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ragg/linalg.hpp"
#include "ragg/sample_set.hpp"

namespace ragg {

// Spherical-Gaussian sample with n*eps corruptions planted along two random
// orthogonal unit directions at radius ~sqrt(d).
struct ECInstance {
  SampleSet yprime;
  Vector b1;
  Vector b2;
  std::vector<double> offsets1;  // sum zero, |l| <= 1
  std::vector<double> offsets2;  // rescaled so sum of squares matches offsets1
  std::vector<std::size_t> corrupted_indices;
  double eps = 0.0;
};

struct ReductionResult {
  Vector direction;                     // unit vector
  std::vector<std::size_t> candidates;  // top-scoring ceil(n*eps) indices
  bool used_fallback = false;           // no orthogonal pair found
};

struct AlignmentReport {
  double abs_cosine = 0.0;
  bool pass = false;
  bool power_converged = false;
};

struct ReductionTiming {
  double aggregator_seconds = 0.0;
  double overhead_seconds = 0.0;
};

using AggregatorFn = std::function<Vector(const SampleSet&)>;

// Preconditions: n*eps even and >= 2, d >= 2, n - n*eps >= d/2.
ECInstance construct_ec(std::size_t n, std::size_t d, double eps, std::uint64_t seed);

// Recovers the max-variance direction of an EC instance from a strong
// aggregator: scores samples by the projection of mean - robust mean onto
// their unit vectors, takes the top ceil(n*eps) as corruption candidates,
// and returns the normalized difference of the first orthogonal pair
// (|cos| <= 1e-6). Falls back to first/last candidates, flagged.
ReductionResult reduce_max_variance(const ECInstance& ec, double eps,
                                    const AggregatorFn& aggregator);

// Measures |cos| between the instance's true max-variance direction (power
// iteration) and (b1 - b2)/sqrt(2); passes when |cos| >= 1 - tol_angle.
AlignmentReport verify_planted_alignment(const ECInstance& ec, double tol_angle,
                               std::uint64_t seed = 0,
                               const PowerIterationOptions& opts = {});

// Wall time of the aggregator call vs. the rest of the reduction. The
// overhead part is repeated until it accumulates enough time to measure.
ReductionTiming reduction_timing(const ECInstance& ec, double eps,
                                 const AggregatorFn& aggregator);

}  // namespace ragg

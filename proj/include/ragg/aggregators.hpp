#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "ragg/linalg.hpp"
#include "ragg/sample_set.hpp"

namespace ragg {

// Variance ceiling xi = k * sigma_max_sq used by the outlier-removal loop.
// Default policy keeps k in [sqrt(20), 9].
struct ThresholdConfig {
  double sigma_max_sq = 0.0;
  double k = 0.0;
  double xi = 0.0;

  static ThresholdConfig make(double sigma_max_sq, double k);
};

inline constexpr double kDefaultThresholdK = 4.47213595499957939;  // sqrt(20)

enum class Subroutine { kFiltering, kNoRegret };

struct AggregationOutcome {
  Vector mean;
  WeightVector weights;
  std::size_t iterations = 0;        // outlier-removal steps performed
  double final_spectral_norm = 0.0;  // estimate at the final weights
  bool converged = false;            // spectral norm fell below xi
  bool degenerate = false;           // subroutine zeroed every weight
  bool power_iteration_warning = false;
};

// Disjoint, ordered, exhaustive column ranges of width m (last may be short).
struct ChunkPlan {
  std::size_t chunk_size = 0;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;

  static ChunkPlan build(std::size_t d, std::size_t m);
  std::size_t count() const { return ranges.size(); }
};

struct ChunkedOutcome {
  Vector mean;  // concatenation of per-chunk means
  ChunkPlan plan;
  std::vector<AggregationOutcome> chunks;
};

struct DncOutcome {
  Vector mean;
  std::vector<std::size_t> removed;       // samples excluded from the mean
  std::vector<std::size_t> sampled_dims;  // coordinate subset scored
};

// Weak baselines ------------------------------------------------------------

// Per-coordinate median; even n averages the two middle order statistics.
Vector coordinate_median(const SampleSet& y);

// Drops ceil(n*eps) smallest and largest values per coordinate, averages the
// rest. eps in [0, 0.5).
Vector coordinate_trimmed_mean(const SampleSet& y, double eps);

// Returns the sample minimizing the summed squared distance to its
// n - ceil(n*eps) - 1 nearest neighbors; ties break to the lowest index.
Vector krum(const SampleSet& y, double eps);

// Strong aggregator ----------------------------------------------------------

// Meta-loop: at most 2*ceil(n*eps) re-weighting rounds, each gated on the
// weighted spectral norm against cfg.xi, returning the weighted mean.
AggregationOutcome meta_aggregate(const SampleSet& y, double eps,
                                  const ThresholdConfig& cfg, Subroutine subroutine,
                                  std::uint64_t seed,
                                  const PowerIterationOptions& power_opts = {});

// One FILTERING re-weighting pass: w_i *= (1 - tau_i / tau_max) with
// tau_i = <y_i - mu_w, v>^2, then renormalization over the weights still
// above 1e-15. `precomputed` skips the internal eigenpair computation.
WeightVector filtering_step(const SampleSet& y, const WeightVector& w,
                            const ThresholdConfig& cfg, std::uint64_t seed,
                            const EigenPair* precomputed = nullptr,
                            const PowerIterationOptions& power_opts = {});

// One NO-REGRET multiplicative-weights pass with step size
// 0.5 / max_pairwise_distance^2, followed by KL projection onto the capped
// simplex {sum w = 1, w_i <= 1/((1-eps)n)}. Factors below zero clamp to
// zero. Returns all-zero weights if every sample is annihilated.
WeightVector no_regret_step(const SampleSet& y, const WeightVector& w, double eps,
                            const ThresholdConfig& cfg, std::uint64_t seed,
                            const EigenPair* precomputed = nullptr,
                            const PowerIterationOptions& power_opts = {});

// Exact KL projection onto {w >= 0, sum w = 1, w_i <= cap}: clamp violators
// to the cap and rescale the rest, repeated until feasible. Requires
// cap * n >= 1.
WeightVector kl_project_capped_simplex(const WeightVector& w, double cap);

// Brute-force stand-in for the intractable SDP route: enumerates all
// subsets of size ceil((1-eps)*n), preferring the qualifying subset
// (spectral norm <= xi) of smallest spectral norm, else the global minimum.
// Guarded to n <= 20.
Vector oracle_subset_aggregate(const SampleSet& y, double eps, const ThresholdConfig& cfg);

// Runs meta_aggregate independently per column chunk and concatenates the
// means. Per-chunk seeds come from derive_seed(seed, chunk_index), so
// concurrent and sequential execution are bit-identical.
ChunkedOutcome chunked_aggregate(const SampleSet& y, std::size_t m, double eps,
                                 const ThresholdConfig& cfg, Subroutine subroutine,
                                 std::uint64_t seed, std::size_t threads = 1,
                                 const PowerIterationOptions& power_opts = {});

// Single-shot spectral outlier removal on a sampled coordinate subset:
// scores by squared projection onto the top eigenvector of the subsampled
// centered data, removes the ceil(n*eps) highest, and averages the rest
// over all coordinates. No recomputation after removal.
DncOutcome dnc_aggregate(const SampleSet& y, double eps, std::size_t dims_sampled,
                         std::uint64_t seed,
                         const PowerIterationOptions& power_opts = {});

// ceil(n * eps) with a small nudge so products like 100 * 0.2 that land a
// few ulps above an integer do not round up.
inline std::size_t corrupted_count(std::size_t n, double eps) {
  const double raw = static_cast<double>(n) * eps - 1e-9;
  if (raw <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(raw));
}

}  // namespace ragg

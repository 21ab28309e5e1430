#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ragg/sample_set.hpp"

namespace ragg {

enum class Knowledge { kFull, kPartial };

struct AttackConfig {
  double eps = 0.0;  // corruption fraction, (0, 0.5)
  double xi = 0.0;   // per-chunk variance threshold the defense enforces
  Knowledge knowledge = Knowledge::kFull;
  std::vector<std::size_t> visible;  // sample indices seen when kPartial
  double delta = 0.0;                // probabilistic slack, 0 disables
  // Attacker's benign-variance estimate; unset means xi / sqrt(20).
  std::optional<double> sigma_max_sq;
  // Corrupt a seeded random subset instead of the first ceil(n*eps) indices.
  bool randomize_indices = false;
};

struct CorruptionReport {
  std::vector<std::size_t> corrupted_indices;
  std::vector<double> per_chunk_z;
  double achieved_bias = 0.0;      // L2 against the benign mean
  bool zero_mean_fallback = false;  // direction fell back to e1
};

struct HidraResult {
  SampleSet corrupted;
  CorruptionReport report;
};

struct DncAttackResult {
  SampleSet corrupted;
  std::size_t b1_index = 0;            // the single large corruption
  std::vector<std::size_t> b2_indices;  // the small aligned corruptions
  Vector b1_hat;
  Vector b2_hat;
};

// Corruption magnitude z = sqrt((xi - sigma_sq) / (eps^2 + eps(1-eps)^2))
// - mu_s, minus delta * sqrt(sigma_sq / n) of slack (applied toward smaller
// magnitude). Requires xi > sigma_sq.
double corruption_magnitude(double xi, double sigma_sq, double eps, double mu_s,
                            double delta, std::size_t n);

// Places ceil(n*eps) corrupted vectors at mu_hat - z * s_hat, where s_hat is
// the direction of the (visible-part) mean and z makes the variance along
// s_hat reach xi without exceeding it. Works on a single chunk: d is the
// working dimension.
HidraResult hidra_corrupt(const SampleSet& x, const AttackConfig& cfg,
                          std::uint64_t seed);

// Applies hidra_corrupt independently to every width-m column chunk with the
// same corrupted index set. A per-chunk threshold list can override the
// constant cfg.xi.
HidraResult hidra_corrupt_chunked(const SampleSet& x, std::size_t m,
                                  const AttackConfig& cfg, std::uint64_t seed,
                                  const std::vector<double>* per_chunk_xi = nullptr,
                                  std::size_t threads = 1);

// Generic large-magnitude baseline: corrupted vectors set to -scale * mean.
SampleSet sign_flip_baseline(const SampleSet& x, double eps, double scale);

// Two-direction binary-vector attack: one corruption far along a random
// binary direction b1, the remaining ceil(n*eps) - 1 at c * beta * ||avg||
// along the complement direction b2 (orthogonal to b1 by construction).
DncAttackResult dnc_binary_attack(const SampleSet& x, double eps, double beta,
                                  double c, std::uint64_t seed);

// ||aggregate - arithmetic mean of the benign set||_2.
double measure_bias(const SampleSet& x_benign, const Vector& aggregate);

}  // namespace ragg

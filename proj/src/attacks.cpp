#include "ragg/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ragg/aggregators.hpp"
#include "ragg/linalg.hpp"
#include "ragg/parallel.hpp"
#include "ragg/rng.hpp"

namespace ragg {
namespace {

constexpr double kSqrt20 = 4.47213595499957939;

void check_attack_config(const AttackConfig& cfg) {
  if (!(cfg.eps > 0.0) || cfg.eps >= 0.5) {
    throw std::invalid_argument("attack eps must lie in (0, 0.5)");
  }
  if (!(cfg.xi > 0.0)) throw std::invalid_argument("attack xi must be positive");
  if (cfg.knowledge == Knowledge::kPartial && cfg.visible.empty()) {
    throw std::invalid_argument("partial knowledge requires visible indices");
  }
  if (cfg.delta < 0.0) throw std::invalid_argument("delta must be nonnegative");
}

std::vector<std::size_t> pick_corrupted_indices(std::size_t n, std::size_t count,
                                                bool randomize, std::uint64_t seed) {
  std::vector<std::size_t> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  if (randomize) {
    Prng rng(derive_seed(seed, 0x1D));
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + rng.below(n - i);
      std::swap(indices[i], indices[j]);
    }
  }
  indices.resize(count);
  std::sort(indices.begin(), indices.end());
  return indices;
}

Vector visible_mean(const SampleSet& x, const AttackConfig& cfg) {
  if (cfg.knowledge == Knowledge::kFull) return sample_mean(x);
  Vector mu(x.d, 0.0);
  for (std::size_t i : cfg.visible) {
    if (i >= x.n) throw std::invalid_argument("visible index out of range");
    const auto row = x.row(i);
    for (std::size_t j = 0; j < x.d; ++j) mu[j] += row[j];
  }
  for (double& m : mu) m /= static_cast<double>(cfg.visible.size());
  return mu;
}

// Core single-chunk corruption given a precomputed index set. Writes the
// corrupted rows into `y` (initialized as a copy of the chunk).
double corrupt_chunk(SampleSet& y, const SampleSet& x, const AttackConfig& cfg,
                     double xi, const std::vector<std::size_t>& indices,
                     bool* fallback) {
  Vector mu = visible_mean(x, cfg);
  const double mu_norm = l2_norm(mu);
  Vector s_hat(x.d, 0.0);
  if (mu_norm == 0.0) {
    s_hat[0] = 1.0;
    *fallback = true;
  } else {
    for (std::size_t j = 0; j < x.d; ++j) s_hat[j] = mu[j] / mu_norm;
  }

  const double sigma_sq = cfg.sigma_max_sq.value_or(xi / kSqrt20);
  const double z = corruption_magnitude(xi, sigma_sq, cfg.eps, 0.0, cfg.delta, x.n);

  for (std::size_t i : indices) {
    for (std::size_t j = 0; j < x.d; ++j) y.at(i, j) = mu[j] - s_hat[j] * z;
  }
  return z;
}

}  // namespace

double corruption_magnitude(double xi, double sigma_sq, double eps, double mu_s,
                            double delta, std::size_t n) {
  if (!(eps > 0.0) || eps >= 0.5) {
    throw std::invalid_argument("eps must lie in (0, 0.5)");
  }
  if (!(sigma_sq >= 0.0) || xi <= sigma_sq) {
    throw std::invalid_argument("need xi > sigma_sq >= 0 (no corruption headroom)");
  }
  const double denom = eps * eps + eps * (1.0 - eps) * (1.0 - eps);
  double z = std::sqrt((xi - sigma_sq) / denom) - mu_s;
  if (delta > 0.0 && n > 0) {
    // Slack applied toward smaller magnitude, staying inside the threshold.
    z -= delta * std::sqrt(sigma_sq) / std::sqrt(static_cast<double>(n));
  }
  return z;
}

HidraResult hidra_corrupt(const SampleSet& x, const AttackConfig& cfg,
                          std::uint64_t seed) {
  validate_sample_set(x);
  check_attack_config(cfg);

  HidraResult res;
  res.corrupted = x;
  const std::size_t count = corrupted_count(x.n, cfg.eps);
  res.report.corrupted_indices =
      pick_corrupted_indices(x.n, count, cfg.randomize_indices, seed);
  if (count == 0) return res;

  bool fallback = false;
  const double z = corrupt_chunk(res.corrupted, x, cfg, cfg.xi,
                                 res.report.corrupted_indices, &fallback);
  res.report.per_chunk_z.push_back(z);
  res.report.zero_mean_fallback = fallback;
  res.report.achieved_bias = measure_bias(x, sample_mean(res.corrupted));
  return res;
}

HidraResult hidra_corrupt_chunked(const SampleSet& x, std::size_t m,
                                  const AttackConfig& cfg, std::uint64_t seed,
                                  const std::vector<double>* per_chunk_xi,
                                  std::size_t threads) {
  validate_sample_set(x);
  check_attack_config(cfg);
  const ChunkPlan plan = ChunkPlan::build(x.d, m);
  if (per_chunk_xi != nullptr && per_chunk_xi->size() != plan.count()) {
    throw std::invalid_argument("per-chunk threshold list length mismatch");
  }

  HidraResult res;
  res.corrupted = x;
  const std::size_t count = corrupted_count(x.n, cfg.eps);
  res.report.corrupted_indices =
      pick_corrupted_indices(x.n, count, cfg.randomize_indices, seed);
  if (count == 0) return res;

  res.report.per_chunk_z.assign(plan.count(), 0.0);
  std::vector<char> fallbacks(plan.count(), 0);
  std::vector<SampleSet> chunks(plan.count());

  parallel_for(plan.count(), threads, [&](std::size_t c) {
    const auto [begin, end] = plan.ranges[c];
    const SampleSet chunk = slice_columns(x, begin, end);
    SampleSet corrupted_chunk = chunk;
    const double xi = per_chunk_xi != nullptr ? (*per_chunk_xi)[c] : cfg.xi;
    bool fallback = false;
    res.report.per_chunk_z[c] = corrupt_chunk(corrupted_chunk, chunk, cfg, xi,
                                              res.report.corrupted_indices, &fallback);
    fallbacks[c] = fallback ? 1 : 0;
    chunks[c] = std::move(corrupted_chunk);
  });

  for (std::size_t c = 0; c < plan.count(); ++c) {
    const auto [begin, end] = plan.ranges[c];
    for (std::size_t i : res.report.corrupted_indices) {
      for (std::size_t j = begin; j < end; ++j) {
        res.corrupted.at(i, j) = chunks[c].at(i, j - begin);
      }
    }
    if (fallbacks[c] != 0) res.report.zero_mean_fallback = true;
  }
  res.report.achieved_bias = measure_bias(x, sample_mean(res.corrupted));
  return res;
}

SampleSet sign_flip_baseline(const SampleSet& x, double eps, double scale) {
  validate_sample_set(x);
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  if (!(eps >= 0.0) || eps >= 0.5) {
    throw std::invalid_argument("eps must lie in [0, 0.5)");
  }
  SampleSet y = x;
  const std::size_t count = corrupted_count(x.n, eps);
  if (count == 0) return y;
  const Vector mu = sample_mean(x);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < x.d; ++j) y.at(i, j) = -scale * mu[j];
  }
  return y;
}

DncAttackResult dnc_binary_attack(const SampleSet& x, double eps, double beta,
                                  double c, std::uint64_t seed) {
  validate_sample_set(x);
  if (x.d < 2) throw std::invalid_argument("binary attack needs d >= 2");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!(c > 0.0) || c >= 1.0) throw std::invalid_argument("c must lie in (0, 1)");
  if (!(eps > 0.0) || eps >= 0.5) {
    throw std::invalid_argument("eps must lie in (0, 0.5)");
  }
  const std::size_t count = corrupted_count(x.n, eps);
  if (count < 2) throw std::invalid_argument("binary attack needs ceil(n*eps) >= 2");

  DncAttackResult res;
  res.corrupted = x;

  // Random binary direction and its complement; redraw until both are
  // nonzero so the unit vectors exist.
  Vector b1(x.d), b2(x.d);
  Prng rng(derive_seed(seed, 0xB1));
  for (;;) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < x.d; ++j) {
      const bool bit = (rng.next_u64() & 1ULL) != 0;
      b1[j] = bit ? 1.0 : 0.0;
      b2[j] = bit ? 0.0 : 1.0;
      ones += bit;
    }
    if (ones > 0 && ones < x.d) break;
  }
  const double n1 = l2_norm(b1), n2 = l2_norm(b2);
  for (double& v : b1) v /= n1;
  for (double& v : b2) v /= n2;
  res.b1_hat = b1;
  res.b2_hat = b2;

  const Vector mu = sample_mean(x);
  double avg_dist = 0.0;
  for (std::size_t i = 0; i < x.n; ++i) avg_dist += l2_distance(x.row(i), mu);
  avg_dist /= static_cast<double>(x.n);

  res.b1_index = 0;
  for (std::size_t j = 0; j < x.d; ++j) {
    res.corrupted.at(0, j) = mu[j] + beta * avg_dist * b1[j];
  }
  for (std::size_t i = 1; i < count; ++i) {
    res.b2_indices.push_back(i);
    for (std::size_t j = 0; j < x.d; ++j) {
      res.corrupted.at(i, j) = mu[j] + c * beta * avg_dist * b2[j];
    }
  }
  return res;
}

double measure_bias(const SampleSet& x_benign, const Vector& aggregate) {
  if (aggregate.size() != x_benign.d) {
    throw std::invalid_argument("aggregate dimension mismatch");
  }
  const Vector mu = sample_mean(x_benign);
  return l2_distance(aggregate, mu);
}

}  // namespace ragg

#include "ragg/aggregators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ragg/parallel.hpp"
#include "ragg/rng.hpp"

namespace ragg {
namespace {

constexpr double kZeroWeight = 1e-15;

void check_eps(double eps) {
  if (!(eps >= 0.0) || eps >= 0.5) {
    throw std::invalid_argument("corruption fraction must lie in [0, 0.5)");
  }
}

Vector weighted_projection_scores(const SampleSet& y, const Vector& mu,
                                  const Vector& v) {
  Vector tau(y.n);
  const double mu_dot_v = dot(mu, v);
  for (std::size_t i = 0; i < y.n; ++i) {
    const double p = dot(y.row(i), v) - mu_dot_v;
    tau[i] = p * p;
  }
  return tau;
}

}  // namespace

ThresholdConfig ThresholdConfig::make(double sigma_max_sq, double k) {
  if (!(sigma_max_sq > 0.0)) {
    throw std::invalid_argument("sigma_max_sq must be positive");
  }
  constexpr double kSqrt20 = 4.47213595499957939;
  if (k < kSqrt20 - 1e-12 || k > 9.0) {
    throw std::invalid_argument("threshold multiplier k must lie in [sqrt(20), 9]");
  }
  return ThresholdConfig{sigma_max_sq, k, k * sigma_max_sq};
}

ChunkPlan ChunkPlan::build(std::size_t d, std::size_t m) {
  if (d == 0 || m == 0) throw std::invalid_argument("chunk plan needs d >= 1, m >= 1");
  ChunkPlan plan;
  plan.chunk_size = m;
  for (std::size_t begin = 0; begin < d; begin += m) {
    plan.ranges.emplace_back(begin, std::min(begin + m, d));
  }
  return plan;
}

Vector coordinate_median(const SampleSet& y) {
  validate_sample_set(y);
  Vector out(y.d);
  Vector column(y.n);
  for (std::size_t j = 0; j < y.d; ++j) {
    for (std::size_t i = 0; i < y.n; ++i) column[i] = y.at(i, j);
    std::sort(column.begin(), column.end());
    if (y.n % 2 == 1) {
      out[j] = column[y.n / 2];
    } else {
      out[j] = 0.5 * (column[y.n / 2 - 1] + column[y.n / 2]);
    }
  }
  return out;
}

Vector coordinate_trimmed_mean(const SampleSet& y, double eps) {
  validate_sample_set(y);
  check_eps(eps);
  const std::size_t trim = corrupted_count(y.n, eps);
  if (2 * trim >= y.n) {
    throw std::invalid_argument("trimming removes every sample");
  }
  Vector out(y.d);
  Vector column(y.n);
  for (std::size_t j = 0; j < y.d; ++j) {
    for (std::size_t i = 0; i < y.n; ++i) column[i] = y.at(i, j);
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (std::size_t i = trim; i < y.n - trim; ++i) sum += column[i];
    out[j] = sum / static_cast<double>(y.n - 2 * trim);
  }
  return out;
}

Vector krum(const SampleSet& y, double eps) {
  validate_sample_set(y);
  check_eps(eps);
  const std::size_t outliers = corrupted_count(y.n, eps);
  if (y.n < outliers + 2) {
    throw std::invalid_argument("krum needs at least n*eps + 2 samples");
  }
  const std::size_t neighbors = y.n - outliers - 1;

  std::size_t best = 0;
  double best_score = 0.0;
  std::vector<double> dists(y.n);
  for (std::size_t i = 0; i < y.n; ++i) {
    for (std::size_t j = 0; j < y.n; ++j) {
      if (j == i) continue;
      const double dist = l2_distance(y.row(i), y.row(j));
      dists[j] = dist * dist;
    }
    dists[i] = std::numeric_limits<double>::infinity();
    std::nth_element(dists.begin(), dists.begin() + neighbors - 1, dists.end());
    double score = 0.0;
    for (std::size_t j = 0; j < neighbors; ++j) score += dists[j];
    if (i == 0 || score < best_score) {
      best = i;
      best_score = score;
    }
  }
  const auto row = y.row(best);
  return Vector(row.begin(), row.end());
}

WeightVector filtering_step(const SampleSet& y, const WeightVector& w,
                            const ThresholdConfig& cfg, std::uint64_t seed,
                            const EigenPair* precomputed,
                            const PowerIterationOptions& power_opts) {
  (void)cfg;
  validate_weights(w);
  const Vector mu = sample_mean(y, w);
  EigenPair pair;
  if (precomputed != nullptr) {
    pair = *precomputed;
  } else {
    pair = top_eigenpair(y, w, seed, power_opts).pair;
  }
  const Vector tau = weighted_projection_scores(y, mu, pair.direction);
  const auto [tau_min_it, tau_max_it] = std::minmax_element(tau.begin(), tau.end());
  const double tau_max = *tau_max_it;
  if (tau_max == 0.0) return w;
  // Equidistant samples are a fixed point: scaling all weights by
  // (1 - tau/tau_max) = 0 carries no ranking information.
  if (tau_max - *tau_min_it <= 1e-12 * tau_max) return w;

  WeightVector out(y.n);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.n; ++i) {
    double wi = w[i] * (1.0 - tau[i] / tau_max);
    if (wi < kZeroWeight) wi = 0.0;
    out[i] = wi;
    sum += wi;
  }
  if (sum == 0.0) return out;  // caller treats all-zero as degenerate
  for (double& wi : out) wi /= sum;
  return out;
}

WeightVector no_regret_step(const SampleSet& y, const WeightVector& w, double eps,
                            const ThresholdConfig& cfg, std::uint64_t seed,
                            const EigenPair* precomputed,
                            const PowerIterationOptions& power_opts) {
  validate_weights(w);
  check_eps(eps);

  double max_dist_sq = 0.0;
  for (std::size_t i = 0; i < y.n; ++i) {
    for (std::size_t j = i + 1; j < y.n; ++j) {
      const double dist = l2_distance(y.row(i), y.row(j));
      max_dist_sq = std::max(max_dist_sq, dist * dist);
    }
  }
  if (max_dist_sq == 0.0) return w;  // identical samples
  const double eta = 0.5 / max_dist_sq;

  const Vector mu = sample_mean(y, w);
  EigenPair pair;
  if (precomputed != nullptr) {
    pair = *precomputed;
  } else {
    pair = top_eigenpair(y, w, seed, power_opts).pair;
  }
  const Vector tau = weighted_projection_scores(y, mu, pair.direction);

  const double d_eff = static_cast<double>(y.d);
  const double step = eps * eta / (2.0 * cfg.sigma_max_sq * d_eff);
  WeightVector out(y.n);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.n; ++i) {
    const double factor = std::max(1.0 - tau[i] * step, 0.0);
    out[i] = w[i] * factor;
    sum += out[i];
  }
  if (sum == 0.0) return out;  // caller treats all-zero as degenerate

  const double cap = 1.0 / ((1.0 - eps) * static_cast<double>(y.n));
  return kl_project_capped_simplex(out, cap);
}

WeightVector kl_project_capped_simplex(const WeightVector& w, double cap) {
  const std::size_t n = w.size();
  if (n == 0) throw std::invalid_argument("empty weight vector");
  if (cap * static_cast<double>(n) < 1.0 - 1e-12) {
    throw std::invalid_argument("cap * n < 1: capped simplex is empty");
  }
  double sum = 0.0;
  for (double wi : w) {
    if (!(wi >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    sum += wi;
  }
  if (sum <= 0.0) throw std::invalid_argument("cannot project the zero vector");

  WeightVector out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = w[i] / sum;

  // Clamp-and-rescale passes; capping is permanent, so at most n rounds.
  std::vector<bool> capped(n, false);
  for (;;) {
    bool violated = false;
    std::size_t capped_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (capped[i]) {
        ++capped_count;
      } else if (out[i] > cap) {
        capped[i] = true;
        out[i] = cap;
        ++capped_count;
        violated = true;
      }
    }
    if (!violated) return out;
    if (capped_count == n) return out;  // only reachable when cap*n == 1

    const double target = 1.0 - cap * static_cast<double>(capped_count);
    double free_mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!capped[i]) free_mass += out[i];
    }
    if (free_mass == 0.0) return out;
    const double factor = target / free_mass;
    for (std::size_t i = 0; i < n; ++i) {
      if (!capped[i]) out[i] *= factor;
    }
  }
}

AggregationOutcome meta_aggregate(const SampleSet& y, double eps,
                                  const ThresholdConfig& cfg, Subroutine subroutine,
                                  std::uint64_t seed,
                                  const PowerIterationOptions& power_opts) {
  validate_sample_set(y);
  if (!(eps > 0.0) || eps >= 0.5) {
    throw std::invalid_argument("meta_aggregate needs eps in (0, 0.5)");
  }

  AggregationOutcome outcome;
  WeightVector w = uniform_weights(y.n);
  const std::size_t max_rounds = 2 * corrupted_count(y.n, eps);

  for (std::size_t round = 0;; ++round) {
    const auto power = top_eigenpair(y, w, derive_seed(seed, round), power_opts);
    if (!power.converged) outcome.power_iteration_warning = true;
    outcome.final_spectral_norm = power.pair.value;
    outcome.iterations = round;

    if (power.pair.value <= cfg.xi) {
      outcome.converged = true;
      break;
    }
    if (round == max_rounds) break;

    WeightVector next =
        subroutine == Subroutine::kFiltering
            ? filtering_step(y, w, cfg, 0, &power.pair, power_opts)
            : no_regret_step(y, w, eps, cfg, 0, &power.pair, power_opts);
    const double sum = std::accumulate(next.begin(), next.end(), 0.0);
    if (sum == 0.0) {
      outcome.degenerate = true;
      break;  // keep the last valid weights
    }
    w = std::move(next);
  }

  outcome.weights = w;
  outcome.mean = sample_mean(y, w);
  return outcome;
}

Vector oracle_subset_aggregate(const SampleSet& y, double eps,
                               const ThresholdConfig& cfg) {
  validate_sample_set(y);
  check_eps(eps);
  if (y.n > 20) {
    throw std::invalid_argument("subset oracle is limited to n <= 20");
  }
  const std::size_t keep = y.n - corrupted_count(y.n, eps);
  if (keep == 0) throw std::invalid_argument("subset oracle would keep zero samples");

  std::vector<std::size_t> subset(keep);
  std::iota(subset.begin(), subset.end(), 0);

  WeightVector w(y.n, 0.0);
  const double member_weight = 1.0 / static_cast<double>(keep);

  bool have_qualifying = false;
  double best_qualifying = 0.0;
  double best_global = 0.0;
  std::vector<std::size_t> best_subset;

  std::uint64_t index = 0;
  for (;;) {
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i : subset) w[i] = member_weight;
    const double norm = spectral_norm(y, w, derive_seed(0xC0FFEE, index));
    ++index;

    const bool qualifies = norm <= cfg.xi;
    const bool better =
        best_subset.empty() ||
        (qualifies && (!have_qualifying || norm < best_qualifying)) ||
        (!have_qualifying && norm < best_global);
    if (better) {
      best_subset = subset;
      best_global = norm;
      if (qualifies) {
        have_qualifying = true;
        best_qualifying = norm;
      }
    }

    // Next combination in lexicographic order.
    std::size_t i = keep;
    bool exhausted = true;
    while (i-- > 0) {
      if (subset[i] < i + (y.n - keep)) {
        exhausted = false;
        break;
      }
    }
    if (exhausted) break;
    ++subset[i];
    for (std::size_t j = i + 1; j < keep; ++j) subset[j] = subset[j - 1] + 1;
  }

  Vector mean(y.d, 0.0);
  for (std::size_t i : best_subset) {
    const auto row = y.row(i);
    for (std::size_t j = 0; j < y.d; ++j) mean[j] += row[j];
  }
  for (double& m : mean) m /= static_cast<double>(keep);
  return mean;
}

ChunkedOutcome chunked_aggregate(const SampleSet& y, std::size_t m, double eps,
                                 const ThresholdConfig& cfg, Subroutine subroutine,
                                 std::uint64_t seed, std::size_t threads,
                                 const PowerIterationOptions& power_opts) {
  validate_sample_set(y);
  ChunkedOutcome out;
  out.plan = ChunkPlan::build(y.d, m);
  out.chunks.resize(out.plan.count());

  parallel_for(out.plan.count(), threads, [&](std::size_t c) {
    const auto [begin, end] = out.plan.ranges[c];
    const SampleSet chunk = slice_columns(y, begin, end);
    out.chunks[c] =
        meta_aggregate(chunk, eps, cfg, subroutine, derive_seed(seed, c), power_opts);
  });

  out.mean.resize(y.d);
  for (std::size_t c = 0; c < out.plan.count(); ++c) {
    const auto [begin, end] = out.plan.ranges[c];
    for (std::size_t j = begin; j < end; ++j) out.mean[j] = out.chunks[c].mean[j - begin];
  }
  return out;
}

DncOutcome dnc_aggregate(const SampleSet& y, double eps, std::size_t dims_sampled,
                         std::uint64_t seed, const PowerIterationOptions& power_opts) {
  validate_sample_set(y);
  check_eps(eps);
  if (dims_sampled == 0 || dims_sampled > y.d) {
    throw std::invalid_argument("dims_sampled must lie in [1, d]");
  }

  DncOutcome out;
  // Partial Fisher-Yates over coordinate indices, then sorted for stable
  // column slicing.
  std::vector<std::size_t> dims(y.d);
  std::iota(dims.begin(), dims.end(), 0);
  Prng rng(derive_seed(seed, 0));
  for (std::size_t i = 0; i < dims_sampled; ++i) {
    const std::size_t j = i + rng.below(y.d - i);
    std::swap(dims[i], dims[j]);
  }
  dims.resize(dims_sampled);
  std::sort(dims.begin(), dims.end());
  out.sampled_dims = dims;

  SampleSet sub(y.n, dims_sampled);
  for (std::size_t i = 0; i < y.n; ++i) {
    for (std::size_t j = 0; j < dims_sampled; ++j) sub.at(i, j) = y.at(i, dims[j]);
  }

  const auto w = uniform_weights(y.n);
  const auto pair = top_eigenpair(sub, w, derive_seed(seed, 1), power_opts).pair;
  const Vector mu = sample_mean(sub);
  const Vector scores = weighted_projection_scores(sub, mu, pair.direction);

  const std::size_t remove = corrupted_count(y.n, eps);
  std::vector<std::size_t> order(y.n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  out.removed.assign(order.begin(), order.begin() + remove);
  std::sort(out.removed.begin(), out.removed.end());

  std::vector<bool> removed(y.n, false);
  for (std::size_t i : out.removed) removed[i] = true;
  out.mean.assign(y.d, 0.0);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < y.n; ++i) {
    if (removed[i]) continue;
    ++kept;
    const auto row = y.row(i);
    for (std::size_t j = 0; j < y.d; ++j) out.mean[j] += row[j];
  }
  if (kept == 0) throw std::invalid_argument("dnc removed every sample");
  for (double& v : out.mean) v /= static_cast<double>(kept);
  return out;
}

}  // namespace ragg

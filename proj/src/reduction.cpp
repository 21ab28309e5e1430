#include "ragg/reduction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ragg/aggregators.hpp"
#include "ragg/rng.hpp"

namespace ragg {
namespace {

// Antithetic +/- pairs of uniforms in (0, 1]; an odd leftover slot gets 0.
// Sum is exactly zero by construction.
std::vector<double> antithetic_offsets(std::size_t count, Prng& rng) {
  std::vector<double> l(count, 0.0);
  for (std::size_t i = 0; i + 1 < count; i += 2) {
    const double u = rng.uniform01();
    l[i] = u;
    l[i + 1] = -u;
  }
  return l;
}

double sum_squares(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// The reduction minus the aggregator call; shared by the reducer and the timer.
ReductionResult reduce_from_aggregate(const SampleSet& y, double eps,
                                      const Vector& robust_mean) {
  const std::size_t count = corrupted_count(y.n, eps);
  if (count < 2) throw std::invalid_argument("reduction needs ceil(n*eps) >= 2");

  const Vector mu = sample_mean(y);
  Vector gap(y.d);
  for (std::size_t j = 0; j < y.d; ++j) gap[j] = mu[j] - robust_mean[j];

  Vector scores(y.n);
  Vector norms(y.n);
  for (std::size_t i = 0; i < y.n; ++i) {
    const auto row = y.row(i);
    norms[i] = l2_norm(row);
    scores[i] = norms[i] > 0.0 ? dot(gap, row) / norms[i] : 0.0;
  }

  std::vector<std::size_t> order(y.n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  ReductionResult res;
  res.candidates.assign(order.begin(), order.begin() + count);

  const std::size_t c1 = res.candidates[0];
  std::size_t c2 = res.candidates.back();
  bool found = false;
  for (std::size_t k = 1; k < count; ++k) {
    const std::size_t cand = res.candidates[k];
    const double denom = norms[c1] * norms[cand];
    if (denom == 0.0) continue;
    const double cosine = dot(y.row(c1), y.row(cand)) / denom;
    if (std::abs(cosine) <= 1e-6) {
      c2 = cand;
      found = true;
      break;
    }
  }
  res.used_fallback = !found;

  res.direction.assign(y.d, 0.0);
  const auto r1 = y.row(c1);
  const auto r2 = y.row(c2);
  for (std::size_t j = 0; j < y.d; ++j) {
    res.direction[j] = r1[j] / norms[c1] - r2[j] / norms[c2];
  }
  const double norm = l2_norm(res.direction);
  if (norm > 0.0) {
    for (double& v : res.direction) v /= norm;
  }
  return res;
}

}  // namespace

ECInstance construct_ec(std::size_t n, std::size_t d, double eps, std::uint64_t seed) {
  const std::size_t corrupted = corrupted_count(n, eps);
  if (corrupted < 2 || corrupted % 2 != 0) {
    throw std::invalid_argument("construct_ec needs n*eps even and >= 2");
  }
  if (d < 2) throw std::invalid_argument("construct_ec needs d >= 2");
  const std::size_t benign = n - corrupted;
  if (2 * benign < d) {
    throw std::invalid_argument("construct_ec needs n - n*eps >= d/2");
  }

  ECInstance ec;
  ec.eps = eps;
  ec.yprime = SampleSet(n, d);

  Prng rng(derive_seed(seed, 0xEC));
  for (std::size_t i = 0; i < benign; ++i) {
    for (std::size_t j = 0; j < d; ++j) ec.yprime.at(i, j) = rng.normal();
  }

  // Two orthogonal unit vectors via Gram-Schmidt on Gaussian draws.
  ec.b1.resize(d);
  ec.b2.resize(d);
  for (double& v : ec.b1) v = rng.normal();
  const double norm1 = l2_norm(ec.b1);
  for (double& v : ec.b1) v /= norm1;
  for (double& v : ec.b2) v = rng.normal();
  const double proj = dot(ec.b2, ec.b1);
  for (std::size_t j = 0; j < d; ++j) ec.b2[j] -= proj * ec.b1[j];
  const double norm2 = l2_norm(ec.b2);
  if (norm2 < 1e-9) throw std::runtime_error("degenerate Gram-Schmidt draw");
  for (double& v : ec.b2) v /= norm2;

  const std::size_t half = corrupted / 2;
  ec.offsets1 = antithetic_offsets(half, rng);
  ec.offsets2 = antithetic_offsets(half, rng);
  const double ss1 = sum_squares(ec.offsets1);
  const double ss2 = sum_squares(ec.offsets2);
  if (ss2 > 0.0) {
    const double scale = std::sqrt(ss1 / ss2);
    for (double& l : ec.offsets2) l *= scale;
    // The energy match can push an offset past 1; shrink both lists by a
    // common factor to restore |l| <= 1 (keeps the zero sums and the
    // equality of squared sums).
    double max_abs = 0.0;
    for (double l : ec.offsets2) max_abs = std::max(max_abs, std::abs(l));
    if (max_abs > 1.0) {
      for (double& l : ec.offsets1) l /= max_abs;
      for (double& l : ec.offsets2) l /= max_abs;
    }
  } else {
    std::fill(ec.offsets2.begin(), ec.offsets2.end(), 0.0);
  }

  const double root_d = std::sqrt(static_cast<double>(d));
  for (std::size_t k = 0; k < half; ++k) {
    const std::size_t i1 = benign + k;
    const std::size_t i2 = benign + half + k;
    const double r1 = root_d + ec.offsets1[k];
    const double r2 = root_d + ec.offsets2[k];
    for (std::size_t j = 0; j < d; ++j) {
      ec.yprime.at(i1, j) = r1 * ec.b1[j];
      ec.yprime.at(i2, j) = r2 * ec.b2[j];
    }
  }
  ec.corrupted_indices.resize(corrupted);
  std::iota(ec.corrupted_indices.begin(), ec.corrupted_indices.end(), benign);
  return ec;
}

ReductionResult reduce_max_variance(const ECInstance& ec, double eps,
                                    const AggregatorFn& aggregator) {
  const Vector robust_mean = aggregator(ec.yprime);
  return reduce_from_aggregate(ec.yprime, eps, robust_mean);
}

AlignmentReport verify_planted_alignment(const ECInstance& ec, double tol_angle,
                               std::uint64_t seed, const PowerIterationOptions& opts) {
  AlignmentReport report;
  const auto power =
      top_eigenpair(ec.yprime, uniform_weights(ec.yprime.n), seed, opts);
  report.power_converged = power.converged;

  Vector diff(ec.yprime.d);
  for (std::size_t j = 0; j < ec.yprime.d; ++j) diff[j] = ec.b1[j] - ec.b2[j];
  const double diff_norm = l2_norm(diff);
  report.abs_cosine =
      std::abs(dot(power.pair.direction, diff)) / diff_norm;
  report.pass = report.abs_cosine >= 1.0 - tol_angle;
  return report;
}

ReductionTiming reduction_timing(const ECInstance& ec, double eps,
                                 const AggregatorFn& aggregator) {
  using clock = std::chrono::steady_clock;
  ReductionTiming timing;

  const auto t0 = clock::now();
  const Vector robust_mean = aggregator(ec.yprime);
  const auto t1 = clock::now();
  timing.aggregator_seconds = std::chrono::duration<double>(t1 - t0).count();

  // Repeat the cheap part until it accumulates ~50ms of wall time.
  std::size_t reps = 0;
  const auto t2 = clock::now();
  double elapsed = 0.0;
  do {
    const auto r = reduce_from_aggregate(ec.yprime, eps, robust_mean);
    (void)r;
    ++reps;
    elapsed = std::chrono::duration<double>(clock::now() - t2).count();
  } while (elapsed < 0.05);
  timing.overhead_seconds = elapsed / static_cast<double>(reps);
  return timing;
}

}  // namespace ragg

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ragg/aggregators.hpp"
#include "ragg/attacks.hpp"
#include "ragg/datagen.hpp"
#include "ragg/linalg.hpp"
#include "ragg/rng.hpp"

using namespace ragg;

namespace {

constexpr double kSqrt20 = 4.47213595499957939;

AttackConfig hidra_cfg(double eps, double xi) {
  AttackConfig cfg;
  cfg.eps = eps;
  cfg.xi = xi;
  return cfg;
}

double analytic_bias_bound(double eps, double xi, double sigma_sq) {
  return std::sqrt(eps) *
         std::sqrt((xi - sigma_sq) / (eps + (1.0 - eps) * (1.0 - eps)));
}

}  // namespace

TEST_CASE("corruption magnitude closed form") {
  // (sqrt(20) - 1) / 0.168 = 20.667..., sqrt = 4.5461...
  const double z = corruption_magnitude(std::sqrt(20.0), 1.0, 0.2, 0.0, 0.0, 100);
  CHECK(z == doctest::Approx(4.5461).epsilon(1e-4));

  // eps -> 0.5 denominator: 0.25 + 0.125 = 0.375.
  const double near_half = corruption_magnitude(2.0, 1.0, 0.499999999, 0.0, 0.0, 10);
  CHECK(near_half == doctest::Approx(std::sqrt(1.0 / 0.375)).epsilon(1e-6));

  CHECK_THROWS_AS(corruption_magnitude(1.0, 1.0, 0.2, 0.0, 0.0, 10),
                  std::invalid_argument);

  // Slack shrinks the magnitude.
  const double slacked = corruption_magnitude(std::sqrt(20.0), 1.0, 0.2, 0.0, 2.0, 100);
  CHECK(slacked < z);
  CHECK(slacked == doctest::Approx(z - 2.0 / 10.0).epsilon(1e-12));
}

TEST_CASE("hidra leaves the set unchanged when nothing is corrupted") {
  const auto x = gaussian_samples(10, 3, VarianceProfile::spherical(1.0),
                                  Vector(3, 1.0), 3);
  const auto res = hidra_corrupt(x, hidra_cfg(1e-12, 1.0), 1);
  CHECK(res.corrupted == x);
  CHECK(res.report.corrupted_indices.empty());
}

TEST_CASE("hidra stays under the threshold and achieves the analytic bias") {
  const std::size_t n = 100, d = 50;
  const double eps = 0.2;
  const double sigma_max_sq = 1.0;
  const double xi = kSqrt20 * sigma_max_sq;

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto x = gaussian_samples(n, d, VarianceProfile::log_spaced(0.1, 1.0),
                                    Vector(d, 0.5), derive_seed(100, seed));
    const auto res = hidra_corrupt(x, hidra_cfg(eps, xi), seed);
    REQUIRE(res.report.corrupted_indices.size() == 20);

    const double norm =
        spectral_norm(res.corrupted, uniform_weights(n), derive_seed(7, seed));
    CHECK(norm <= xi * (1.0 + 1e-3));
    CHECK(res.report.achieved_bias >=
          0.9 * analytic_bias_bound(eps, xi, sigma_max_sq));
  }
}

TEST_CASE("hidra output passes the strong aggregator untouched") {
  const std::size_t n = 100, d = 20;
  const double eps = 0.2;
  const auto cfg = ThresholdConfig::make(1.0, kDefaultThresholdK);
  const auto x = gaussian_samples(n, d, VarianceProfile::log_spaced(0.1, 1.0),
                                  Vector(d, 0.5), 211);
  const auto res = hidra_corrupt(x, hidra_cfg(eps, cfg.xi), 3);

  const auto outcome =
      meta_aggregate(res.corrupted, eps, cfg, Subroutine::kFiltering, 5);
  CHECK(outcome.converged);
  CHECK(outcome.iterations == 0);
  for (double w : outcome.weights) {
    CHECK(w == doctest::Approx(1.0 / n).epsilon(1e-15));
  }
}

TEST_CASE("hidra top eigenvector aligns with the corruption direction") {
  const std::size_t n = 500, d = 50;
  const double xi = kSqrt20;
  const auto x = gaussian_samples(n, d, VarianceProfile::log_spaced(0.1, 1.0),
                                  Vector(d, 0.5), 977);
  const auto res = hidra_corrupt(x, hidra_cfg(0.2, xi), 5);

  const Vector mu = sample_mean(x);
  Vector s_hat = mu;
  const double mu_norm = l2_norm(mu);
  for (double& v : s_hat) v /= mu_norm;

  const auto pair = top_eigenpair(res.corrupted, uniform_weights(n), 11).pair;
  CHECK(std::abs(dot(pair.direction, s_hat)) >= 0.95);

  // Variance stays below xi along directions orthogonal to s_hat.
  Prng rng(23);
  const auto w = uniform_weights(n);
  for (int t = 0; t < 100; ++t) {
    Vector u(d);
    for (double& c : u) c = rng.normal();
    const double overlap = dot(u, s_hat);
    for (std::size_t j = 0; j < d; ++j) u[j] -= overlap * s_hat[j];
    const double norm = l2_norm(u);
    for (double& c : u) c /= norm;
    CHECK(dot(u, covariance_apply(res.corrupted, w, u)) <= xi);
  }
}

TEST_CASE("relative and absolute corruption forms coincide") {
  // Placing corruption at mu - z*s equals the absolute form -z' * s with
  // z' = corruption_magnitude evaluated at mu_s = ||mu||.
  const std::size_t n = 50, d = 8;
  const double xi = 3.0;
  const auto x = gaussian_samples(n, d, VarianceProfile::spherical(0.3),
                                  Vector(d, 0.4), 31);
  const auto res = hidra_corrupt(x, hidra_cfg(0.2, xi), 9);

  const Vector mu = sample_mean(x);
  const double mu_norm = l2_norm(mu);
  const double z_abs =
      corruption_magnitude(xi, xi / kSqrt20, 0.2, mu_norm, 0.0, n);
  for (std::size_t i : res.report.corrupted_indices) {
    for (std::size_t j = 0; j < d; ++j) {
      const double expected = -z_abs * mu[j] / mu_norm;
      CHECK(res.corrupted.at(i, j) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("hidra direction falls back to e1 on a zero mean") {
  SampleSet x(4, 3);
  x.at(0, 0) = 1.0;
  x.at(1, 0) = -1.0;
  x.at(2, 1) = 1.0;
  x.at(3, 1) = -1.0;
  const auto res = hidra_corrupt(x, hidra_cfg(0.25, 5.0), 3);
  CHECK(res.report.zero_mean_fallback);
  // Corruption applied along e1 from the (zero) mean.
  CHECK(res.corrupted.at(0, 0) < 0.0);
  CHECK(res.corrupted.at(0, 1) == 0.0);
}

TEST_CASE("chunked hidra with m = d matches the single-chunk attack") {
  const auto x = gaussian_samples(60, 10, VarianceProfile::spherical(1.0),
                                  Vector(10, 0.5), 41);
  const auto cfg = hidra_cfg(0.2, kSqrt20);
  const auto single = hidra_corrupt(x, cfg, 77);
  const auto chunked = hidra_corrupt_chunked(x, 10, cfg, 77);
  CHECK(single.corrupted == chunked.corrupted);
  CHECK(single.report.per_chunk_z == chunked.report.per_chunk_z);
}

TEST_CASE("chunked hidra accumulates bias across chunks") {
  const std::size_t n = 500, m = 25, chunks = 16;
  const std::size_t d = m * chunks;
  const double eps = 0.2;
  const double xi = kSqrt20 * 1.0;
  const auto x = gaussian_samples(n, d, VarianceProfile::spherical(1.0),
                                  Vector(d, 0.5), 303);
  const auto res = hidra_corrupt_chunked(x, m, hidra_cfg(eps, xi), 5);
  REQUIRE(res.report.per_chunk_z.size() == chunks);

  // Concatenation identity: total bias^2 equals the sum of per-chunk
  // bias^2 over the disjoint coordinate ranges.
  const Vector benign_mean = sample_mean(x);
  const Vector corrupted_mean = sample_mean(res.corrupted);
  double sum_sq = 0.0;
  const auto plan = ChunkPlan::build(d, m);
  for (const auto& [begin, end] : plan.ranges) {
    double chunk_sq = 0.0;
    for (std::size_t j = begin; j < end; ++j) {
      const double diff = corrupted_mean[j] - benign_mean[j];
      chunk_sq += diff * diff;
    }
    sum_sq += chunk_sq;
  }
  CHECK(res.report.achieved_bias ==
        doctest::Approx(std::sqrt(sum_sq)).epsilon(1e-12));

  // Sixteen chunks give about 4x the single-chunk bias.
  const SampleSet first_chunk = slice_columns(x, 0, m);
  const auto single = hidra_corrupt(first_chunk, hidra_cfg(eps, xi), 5);
  const double ratio = res.report.achieved_bias / single.report.achieved_bias;
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("chunked hidra honors an adaptive per-chunk threshold list") {
  const std::size_t n = 200, m = 10, d = 30;
  const auto x = gaussian_samples(n, d, VarianceProfile::spherical(1.0),
                                  Vector(d, 0.5), 606);
  AttackConfig cfg = hidra_cfg(0.2, kSqrt20);
  const std::vector<double> per_chunk{kSqrt20, 2.0 * kSqrt20, 4.0 * kSqrt20};
  const auto res = hidra_corrupt_chunked(x, m, cfg, 3, &per_chunk);
  REQUIRE(res.report.per_chunk_z.size() == 3);
  // z grows with the chunk threshold.
  CHECK(res.report.per_chunk_z[0] < res.report.per_chunk_z[1]);
  CHECK(res.report.per_chunk_z[1] < res.report.per_chunk_z[2]);

  const std::vector<double> wrong_len{1.0};
  CHECK_THROWS_AS(hidra_corrupt_chunked(x, m, cfg, 3, &wrong_len),
                  std::invalid_argument);
}

TEST_CASE("hidra can corrupt a seeded random index subset") {
  const auto x = gaussian_samples(50, 4, VarianceProfile::spherical(1.0),
                                  Vector(4, 0.5), 15);
  AttackConfig cfg = hidra_cfg(0.2, kSqrt20);
  cfg.randomize_indices = true;
  const auto a = hidra_corrupt(x, cfg, 42);
  const auto b = hidra_corrupt(x, cfg, 42);
  const auto c = hidra_corrupt(x, cfg, 43);
  REQUIRE(a.report.corrupted_indices.size() == 10);
  CHECK(a.report.corrupted_indices == b.report.corrupted_indices);
  CHECK(a.report.corrupted_indices != c.report.corrupted_indices);
  // Default: the first ceil(n*eps) indices, in order.
  cfg.randomize_indices = false;
  const auto d = hidra_corrupt(x, cfg, 42);
  for (std::size_t i = 0; i < 10; ++i) CHECK(d.report.corrupted_indices[i] == i);
}

TEST_CASE("achieved bias grows with a looser threshold") {
  const auto x = gaussian_samples(200, 20, VarianceProfile::log_spaced(0.1, 1.0),
                                  Vector(20, 0.5), 5150);
  double previous = 0.0;
  for (double xi : {kSqrt20, 1.5 * kSqrt20, 3.0 * kSqrt20}) {
    const auto res = hidra_corrupt(x, hidra_cfg(0.2, xi), 8);
    CHECK(res.report.achieved_bias >= previous);
    previous = res.report.achieved_bias;
  }
}

TEST_CASE("partial knowledge stays close to full knowledge") {
  const std::size_t n = 500, d = 30;
  const double eps = 0.2;
  const double xi = kSqrt20;
  const auto x = gaussian_samples(n, d, VarianceProfile::log_spaced(0.1, 1.0),
                                  Vector(d, 0.5), 6001);

  const auto full = hidra_corrupt(x, hidra_cfg(eps, xi), 3);

  AttackConfig partial = hidra_cfg(eps, xi);
  partial.knowledge = Knowledge::kPartial;
  partial.visible.resize(100);  // visible fraction = eps
  for (std::size_t i = 0; i < partial.visible.size(); ++i) partial.visible[i] = i;
  const auto part = hidra_corrupt(x, partial, 3);

  const double rel = std::abs(part.report.achieved_bias - full.report.achieved_bias) /
                     full.report.achieved_bias;
  CHECK(rel <= 0.2);
}

TEST_CASE("sign flip baseline") {
  const auto x = gaussian_samples(20, 4, VarianceProfile::spherical(1.0),
                                  Vector(4, 1.0), 5);
  CHECK(sign_flip_baseline(x, 0.0, 1.0) == x);

  const auto y = sign_flip_baseline(x, 0.2, 2.0);
  const Vector mu = sample_mean(x);
  for (std::size_t i = 0; i < corrupted_count(20, 0.2); ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(y.at(i, j) == doctest::Approx(-2.0 * mu[j]).epsilon(1e-15));
    }
  }
}

TEST_CASE("strong aggregators shrug off huge sign flips") {
  const std::size_t n = 100, d = 20;
  const double eps = 0.2;
  const double sigma_sq = eps / (4.0 * static_cast<double>(d));
  const auto cfg = ThresholdConfig::make(sigma_sq, kDefaultThresholdK);
  const auto x = gaussian_samples(n, d, VarianceProfile::spherical(std::sqrt(sigma_sq)),
                                  Vector(d, 0.05), 8080);
  const auto y = sign_flip_baseline(x, eps, 1e6);

  for (auto sub : {Subroutine::kFiltering, Subroutine::kNoRegret}) {
    const auto out = meta_aggregate(y, eps, cfg, sub, 11);
    double outlier_mass = 0.0;
    for (std::size_t i = 0; i < corrupted_count(n, eps); ++i) {
      outlier_mass += out.weights[i];
    }
    CHECK(outlier_mass <= 1e-6);
    CHECK(measure_bias(x, out.mean) <= 3.0 * std::sqrt(eps) * std::sqrt(cfg.xi));
  }
}

TEST_CASE("dnc binary attack geometry") {
  const auto x = gaussian_samples(100, 64, VarianceProfile::spherical(1.0),
                                  Vector(64, 0.0), 99);
  const auto res = dnc_binary_attack(x, 0.2, 50.0, 0.02, 7);
  CHECK(res.b2_indices.size() == corrupted_count(100, 0.2) - 1);
  CHECK(std::abs(dot(res.b1_hat, res.b2_hat)) < 1e-12);
  CHECK(l2_norm(res.b1_hat) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(l2_norm(res.b2_hat) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(dnc_binary_attack(x, 0.2, 0.0, 0.02, 7), std::invalid_argument);
  SampleSet tiny(10, 1);
  tiny.data.assign(10, 1.0);
  CHECK_THROWS_AS(dnc_binary_attack(tiny, 0.3, 5.0, 0.02, 7), std::invalid_argument);
}

TEST_CASE("dnc aggregate removes only the large corruption") {
  const std::size_t n = 100, d = 256;
  const double eps = 0.2;
  const auto x = gaussian_samples(n, d, VarianceProfile::spherical(1.0),
                                  Vector(d, 0.0), 123);
  const auto attack = dnc_binary_attack(x, eps, 50.0, 0.02, 17);
  const auto out = dnc_aggregate(attack.corrupted, eps, d, 29);

  const bool b1_removed = std::find(out.removed.begin(), out.removed.end(),
                                    attack.b1_index) != out.removed.end();
  CHECK(b1_removed);
  for (std::size_t i : attack.b2_indices) {
    const bool removed =
        std::find(out.removed.begin(), out.removed.end(), i) != out.removed.end();
    CHECK_FALSE(removed);
  }

  // beta -> 0 collapses every corruption onto the benign mean, so the
  // attack adds nothing beyond replacing those samples with the mean.
  const auto gentle = dnc_binary_attack(x, eps, 1e-9, 0.02, 17);
  const Vector mu = sample_mean(x);
  for (std::size_t i = 0; i < corrupted_count(n, eps); ++i) {
    CHECK(l2_distance(gentle.corrupted.row(i), mu) < 1e-6);
  }
  SampleSet replaced = x;
  for (std::size_t i = 0; i < corrupted_count(n, eps); ++i) {
    for (std::size_t j = 0; j < d; ++j) replaced.at(i, j) = mu[j];
  }
  CHECK(measure_bias(x, sample_mean(gentle.corrupted)) ==
        doctest::Approx(measure_bias(x, sample_mean(replaced))).epsilon(1e-6));
}

TEST_CASE("measure bias") {
  const auto x = gaussian_samples(10, 5, VarianceProfile::spherical(1.0),
                                  Vector(5, 0.0), 3);
  const Vector mu = sample_mean(x);
  CHECK(measure_bias(x, mu) == 0.0);

  Vector shifted = mu;
  shifted[0] += 3.0;
  shifted[1] += 4.0;
  CHECK(measure_bias(x, shifted) == doctest::Approx(5.0).epsilon(1e-12));

  CHECK_THROWS_AS(measure_bias(x, Vector(4, 0.0)), std::invalid_argument);
}

#include "ragg/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "ragg/rng.hpp"

namespace ragg {
namespace {

void check_dims(const SampleSet& x, const WeightVector& w) {
  if (w.size() != x.n) {
    throw std::invalid_argument("weight vector length does not match sample count");
  }
}

void normalize_sign(Vector& v) {
  for (double c : v) {
    if (std::abs(c) > 1e-12) {
      if (c < 0.0) {
        for (double& e : v) e = -e;
      }
      return;
    }
  }
}

}  // namespace

Vector sample_mean(const SampleSet& x) {
  Vector mu(x.d, 0.0);
  for (std::size_t i = 0; i < x.n; ++i) {
    const auto row = x.row(i);
    for (std::size_t j = 0; j < x.d; ++j) mu[j] += row[j];
  }
  const double inv_n = 1.0 / static_cast<double>(x.n);
  for (double& m : mu) m *= inv_n;
  return mu;
}

Vector sample_mean(const SampleSet& x, const WeightVector& w) {
  check_dims(x, w);
  Vector mu(x.d, 0.0);
  for (std::size_t i = 0; i < x.n; ++i) {
    const double wi = w[i];
    if (wi == 0.0) continue;
    const auto row = x.row(i);
    for (std::size_t j = 0; j < x.d; ++j) mu[j] += wi * row[j];
  }
  return mu;
}

Vector covariance_apply(const SampleSet& x, const WeightVector& w, const Vector& v) {
  check_dims(x, w);
  if (v.size() != x.d) {
    throw std::invalid_argument("vector length does not match sample dimension");
  }
  const Vector mu = sample_mean(x, w);
  Vector out(x.d, 0.0);
  const double mu_dot_v = dot(mu, v);
  for (std::size_t i = 0; i < x.n; ++i) {
    const double wi = w[i];
    if (wi == 0.0) continue;
    const auto row = x.row(i);
    const double proj = dot(row, v) - mu_dot_v;  // <x_i - mu, v>
    const double scale = wi * proj;
    for (std::size_t j = 0; j < x.d; ++j) out[j] += scale * (row[j] - mu[j]);
  }
  return out;
}

PowerIterationResult top_eigenpair(const SampleSet& x, const WeightVector& w,
                                   std::uint64_t seed,
                                   const PowerIterationOptions& opts) {
  validate_sample_set(x);
  check_dims(x, w);
  if (opts.tol <= 0.0 || opts.max_iter == 0) {
    throw std::invalid_argument("power iteration needs tol > 0 and max_iter >= 1");
  }

  PowerIterationResult res;
  res.pair.direction.assign(x.d, 0.0);

  Vector v(x.d);
  Prng rng(seed);
  for (double& c : v) c = rng.normal();
  double norm = l2_norm(v);
  if (norm == 0.0) {
    v.assign(x.d, 0.0);
    v[0] = 1.0;
    norm = 1.0;
  }
  for (double& c : v) c /= norm;

  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    Vector u = covariance_apply(x, w, v);
    const double lambda = dot(v, u);  // Rayleigh quotient, v is unit
    double residual = 0.0;
    for (std::size_t j = 0; j < x.d; ++j) {
      const double r = u[j] - lambda * v[j];
      residual += r * r;
    }
    residual = std::sqrt(residual);

    res.iterations = it;
    res.residual = residual;
    res.pair.value = std::max(lambda, 0.0);  // PSD operator; clamp roundoff

    const double u_norm = l2_norm(u);
    if (u_norm == 0.0) {
      // Covariance annihilates the iterate; for a random start this means
      // the covariance itself is (numerically) zero.
      res.pair.value = 0.0;
      res.pair.direction.assign(x.d, 0.0);
      res.pair.direction[0] = 1.0;
      res.converged = true;
      return res;
    }
    if (residual <= opts.tol * std::max(lambda, 1.0)) {
      res.pair.direction = v;
      normalize_sign(res.pair.direction);
      res.converged = true;
      return res;
    }
    for (std::size_t j = 0; j < x.d; ++j) v[j] = u[j] / u_norm;
  }

  // Out of iterations: near-degenerate spectrum. Keep the last iterate.
  res.pair.direction = v;
  normalize_sign(res.pair.direction);
  res.converged = false;
  return res;
}

double spectral_norm(const SampleSet& x, const WeightVector& w, std::uint64_t seed,
                     const PowerIterationOptions& opts) {
  return top_eigenpair(x, w, seed, opts).pair.value;
}

}  // namespace ragg

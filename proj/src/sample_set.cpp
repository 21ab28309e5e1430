#include "ragg/sample_set.hpp"

#include <cmath>
#include <stdexcept>

namespace ragg {

void validate_sample_set(const SampleSet& x) {
  if (x.n == 0 || x.d == 0) {
    throw std::invalid_argument("sample set must have n >= 1 and d >= 1");
  }
  if (x.data.size() != x.n * x.d) {
    throw std::invalid_argument("sample set storage does not match n*d");
  }
  for (double v : x.data) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("sample set contains a non-finite entry");
    }
  }
}

void validate_weights(const WeightVector& w, double tol) {
  if (w.empty()) throw std::invalid_argument("weight vector is empty");
  double sum = 0.0;
  for (double wi : w) {
    if (!(wi >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    sum += wi;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw std::invalid_argument("weights must sum to 1");
  }
}

WeightVector uniform_weights(std::size_t n) {
  return WeightVector(n, 1.0 / static_cast<double>(n));
}

SampleSet slice_columns(const SampleSet& x, std::size_t begin, std::size_t end) {
  if (begin >= end || end > x.d) {
    throw std::invalid_argument("invalid column range");
  }
  SampleSet out(x.n, end - begin);
  for (std::size_t i = 0; i < x.n; ++i) {
    const double* src = x.data.data() + i * x.d + begin;
    double* dst = out.data.data() + i * out.d;
    for (std::size_t j = 0; j < out.d; ++j) dst[j] = src[j];
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double l2_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace ragg

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ragg {

using Vector = std::vector<double>;
using WeightVector = std::vector<double>;

// n samples of dimension d, row-major. The set being aggregated.
struct SampleSet {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> data;  // n * d entries

  SampleSet() = default;
  SampleSet(std::size_t n_, std::size_t d_) : n(n_), d(d_), data(n_ * d_, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * d + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * d + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * d, d}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * d, d}; }

  bool operator==(const SampleSet&) const = default;
};

// Throws std::invalid_argument if n == 0, d == 0, sizes disagree, or any
// entry is NaN/Inf.
void validate_sample_set(const SampleSet& x);

// Throws if any weight is negative or the sum differs from 1 by more than
// `tol` (default covers accumulated renormalization drift).
void validate_weights(const WeightVector& w, double tol = 1e-9);

WeightVector uniform_weights(std::size_t n);

// Copy of columns [begin, end) of every row.
SampleSet slice_columns(const SampleSet& x, std::size_t begin, std::size_t end);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);
double l2_distance(std::span<const double> a, std::span<const double> b);

}  // namespace ragg

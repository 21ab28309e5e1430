#include "ragg/datagen.hpp"

#include <cmath>
#include <stdexcept>

#include "ragg/rng.hpp"

namespace ragg {

VarianceProfile VarianceProfile::spherical(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("spherical sigma must be positive");
  VarianceProfile p;
  p.kind_ = Kind::kSpherical;
  p.a_ = sigma;
  return p;
}

VarianceProfile VarianceProfile::log_spaced(double sigma_min, double sigma_max) {
  if (!(sigma_min > 0.0) || !(sigma_max >= sigma_min)) {
    throw std::invalid_argument("log_spaced needs 0 < sigma_min <= sigma_max");
  }
  VarianceProfile p;
  p.kind_ = Kind::kLogSpaced;
  p.a_ = sigma_min;
  p.b_ = sigma_max;
  return p;
}

VarianceProfile VarianceProfile::explicit_stddevs(std::vector<double> stddevs) {
  if (stddevs.empty()) throw std::invalid_argument("explicit profile is empty");
  for (double s : stddevs) {
    if (!(s > 0.0)) throw std::invalid_argument("explicit deviations must be positive");
  }
  VarianceProfile p;
  p.kind_ = Kind::kExplicit;
  p.explicit_ = std::move(stddevs);
  return p;
}

std::vector<double> VarianceProfile::stddevs(std::size_t d) const {
  if (d == 0) throw std::invalid_argument("dimension must be positive");
  switch (kind_) {
    case Kind::kSpherical:
      return std::vector<double>(d, a_);
    case Kind::kLogSpaced: {
      std::vector<double> out(d);
      if (d == 1) {
        out[0] = b_;
        return out;
      }
      const double log_min = std::log(a_), log_max = std::log(b_);
      for (std::size_t j = 0; j < d; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(d - 1);
        out[j] = std::exp(log_min + t * (log_max - log_min));
      }
      return out;
    }
    case Kind::kExplicit:
      if (explicit_.size() != d) {
        throw std::invalid_argument("explicit profile length does not match d");
      }
      return explicit_;
  }
  throw std::logic_error("unreachable");
}

double VarianceProfile::sigma_max_sq(std::size_t d) const {
  double max_sigma = 0.0;
  for (double s : stddevs(d)) max_sigma = std::max(max_sigma, s);
  return max_sigma * max_sigma;
}

std::string VarianceProfile::describe() const {
  switch (kind_) {
    case Kind::kSpherical:
      return "spherical(" + std::to_string(a_) + ")";
    case Kind::kLogSpaced:
      return "logspaced(" + std::to_string(a_) + "," + std::to_string(b_) + ")";
    case Kind::kExplicit:
      return "explicit[" + std::to_string(explicit_.size()) + "]";
  }
  return {};
}

SampleSet gaussian_samples(std::size_t n, std::size_t d, const VarianceProfile& profile,
                           const Vector& mean, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gaussian_samples needs n >= 2");
  if (!mean.empty() && mean.size() != d) {
    throw std::invalid_argument("mean length does not match d");
  }
  const auto sigmas = profile.stddevs(d);
  SampleSet x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double z = stream_normal(seed, i * d + j);
      const double m = mean.empty() ? 0.0 : mean[j];
      x.at(i, j) = m + sigmas[j] * z;
    }
  }
  return x;
}

namespace {

void fill_class_cloud(SampleSet& x, std::vector<int>& y, const Vector& center,
                      std::uint64_t seed) {
  const std::size_t d = x.d;
  for (std::size_t i = 0; i < x.n; ++i) {
    const int label = (i % 2 == 0) ? 1 : -1;
    y[i] = label;
    for (std::size_t j = 0; j < d; ++j) {
      const double z = stream_normal(seed, i * d + j);
      x.at(i, j) = static_cast<double>(label) * center[j] + z;
    }
  }
}

}  // namespace

LogisticTask logistic_task(std::size_t n_train, std::size_t n_test, std::size_t d,
                           double separation, std::uint64_t seed) {
  if (!(separation >= 0.0)) throw std::invalid_argument("separation must be >= 0");
  if (n_train == 0 || n_test == 0 || d == 0) {
    throw std::invalid_argument("logistic task needs n_train, n_test, d >= 1");
  }

  LogisticTask task;
  task.direction.resize(d);
  Prng rng(derive_seed(seed, 0xD1));
  for (double& v : task.direction) v = rng.normal();
  const double norm = l2_norm(task.direction);
  for (double& v : task.direction) v /= norm;

  Vector center(d);
  for (std::size_t j = 0; j < d; ++j) center[j] = 0.5 * separation * task.direction[j];

  task.train_x = SampleSet(n_train, d);
  task.train_y.resize(n_train);
  fill_class_cloud(task.train_x, task.train_y, center, derive_seed(seed, 1));

  task.test_x = SampleSet(n_test, d);
  task.test_y.resize(n_test);
  fill_class_cloud(task.test_x, task.test_y, center, derive_seed(seed, 2));
  return task;
}

}  // namespace ragg

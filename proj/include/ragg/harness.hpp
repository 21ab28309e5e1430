#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ragg/aggregators.hpp"
#include "ragg/datagen.hpp"
#include "ragg/sample_set.hpp"

namespace ragg {

// Flat experiment description; see ExperimentSpec::from_kv for the key set.
struct ExperimentSpec {
  std::string kind = "sweep";  // sweep | dnc | trainsim
  std::size_t n = 100;
  std::vector<std::size_t> dims = {1000};
  double eps = 0.2;
  std::size_t m = 1000;
  double k = kDefaultThresholdK;
  double sigma_override = 0.0;  // >0 replaces the profile's sigma_max^2
  VarianceProfile profile = VarianceProfile::spherical(1.0);
  double mean_value = 1.0;  // constant benign mean per coordinate
  std::string attack = "hidra";          // hidra | signflip | none
  std::string aggregator = "filtering";  // filtering | noregret
  double signflip_scale = 1e6;
  double delta = 0.0;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  // dnc sweep
  std::vector<double> betas = {5, 10, 20, 40, 80};
  double dnc_c = 0.02;
  std::size_t dnc_dims = 0;  // 0 means min(d, 1000)

  // trainsim
  std::size_t clients = 50;
  std::size_t rounds = 100;
  double learning_rate = 0.1;
  double separation = 4.0;
  std::size_t n_train = 4000;
  std::size_t n_test = 2000;

  static ExperimentSpec from_kv(const std::map<std::string, std::string>& kv);
  static ExperimentSpec from_file(const std::string& path);
};

struct SweepTrial {
  std::size_t d = 0;
  std::string attack;
  std::string aggregator;
  std::size_t trial = 0;
  double bias_empirical = 0.0;
  double bias_theoretical = 0.0;
  bool failed = false;
};

struct SweepRow {
  std::size_t d = 0;
  double theoretical_bias = 0.0;
  double empirical_bias_mean = 0.0;
  double empirical_bias_std = 0.0;
  std::string attack;
  std::string aggregator;
};

struct BiasSweepResult {
  std::vector<SweepTrial> trials;
  std::vector<SweepRow> summary;
};

struct DncSweepTrial {
  double beta = 0.0;
  std::size_t trial = 0;
  double bias = 0.0;           // total L2 bias of the aggregate
  double bias_along_b2 = 0.0;  // component along the retained attack direction
  bool b1_removed = false;
  std::size_t b2_removed = 0;
};

struct TrainSimResult {
  std::vector<double> accuracy;  // per round
  std::vector<double> bias;      // per round, aggregate vs benign gradients
  double final_accuracy = 0.0;
  bool diverged = false;
};

// Total-bias prediction for chunked aggregation under per-chunk corruption,
// with c the chunk count of a (d, m) plan:
//   sqrt(eps * c) * sqrt(xi / (eps + (1 - eps)^2))
double theoretical_bias(double eps, std::size_t d, std::size_t m, double xi);

BiasSweepResult bias_sweep(const ExperimentSpec& spec);
std::vector<DncSweepTrial> dnc_beta_sweep(const ExperimentSpec& spec);
TrainSimResult train_sim(const ExperimentSpec& spec);

void write_sweep_csv(const std::string& path, const std::vector<SweepTrial>& trials);
void write_dnc_csv(const std::string& path, const std::vector<DncSweepTrial>& trials);
void write_train_csv(const std::string& path, const TrainSimResult& result);

// Least-squares helpers for scaling checks.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit fit_linear(const std::vector<double>& xs, const std::vector<double>& ys);
double r2_through_origin(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace ragg

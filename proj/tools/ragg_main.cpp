// Command-line front end for the robust-aggregation toolkit: data
// generation, aggregation, attacks, sweeps, and the reduction pipeline.
#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>

#include "ragg/aggregators.hpp"
#include "ragg/attacks.hpp"
#include "ragg/datagen.hpp"
#include "ragg/harness.hpp"
#include "ragg/io.hpp"
#include "ragg/linalg.hpp"
#include "ragg/reduction.hpp"
#include "ragg/rng.hpp"

namespace {

using json = nlohmann::json;
using namespace ragg;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumeric = 3;

std::size_t thread_count(std::size_t flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("RAGG_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed > 0) return static_cast<std::size_t>(parsed);
  }
  return 1;
}

VarianceProfile profile_from_flags(const std::string& kind, double sigma,
                                   double sigma_min) {
  if (kind == "spherical") return VarianceProfile::spherical(sigma);
  if (kind == "logspaced") return VarianceProfile::log_spaced(sigma_min, sigma);
  throw std::invalid_argument("unknown profile: " + kind);
}

struct GenArgs {
  std::string out;
  std::size_t n = 100;
  std::size_t d = 10;
  std::string profile = "spherical";
  double sigma = 1.0;
  double sigma_min = 0.1;
  double mean_value = 0.0;
  std::uint64_t seed = 1;
};

int run_gen(const GenArgs& args) {
  const VarianceProfile profile =
      profile_from_flags(args.profile, args.sigma, args.sigma_min);
  const Vector mean(args.d, args.mean_value);
  const SampleSet x = gaussian_samples(args.n, args.d, profile, mean, args.seed);
  write_matrix_file(args.out, x);
  return kExitOk;
}

struct AggregateArgs {
  std::string in;
  std::string out;
  std::string diag;
  std::string alg = "filtering";
  double eps = 0.2;
  double sigma_max_sq = 1.0;
  double k = kDefaultThresholdK;
  std::size_t chunk_size = 1000;
  std::size_t dnc_dims = 0;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

int run_aggregate(const AggregateArgs& args) {
  const SampleSet y = read_matrix_file(args.in);
  Vector mean;
  json diag;
  diag["algorithm"] = args.alg;
  bool warned = false;

  if (args.alg == "mean") {
    mean = sample_mean(y);
  } else if (args.alg == "median") {
    mean = coordinate_median(y);
  } else if (args.alg == "trimmed-mean") {
    mean = coordinate_trimmed_mean(y, args.eps);
  } else if (args.alg == "krum") {
    mean = krum(y, args.eps);
  } else if (args.alg == "dnc") {
    const std::size_t dims =
        args.dnc_dims > 0 ? args.dnc_dims : std::min<std::size_t>(y.d, 1000);
    const auto outcome = dnc_aggregate(y, args.eps, dims, args.seed);
    mean = outcome.mean;
    diag["removed"] = outcome.removed;
  } else if (args.alg == "filtering" || args.alg == "noregret") {
    const Subroutine sub =
        args.alg == "filtering" ? Subroutine::kFiltering : Subroutine::kNoRegret;
    const ThresholdConfig cfg = ThresholdConfig::make(args.sigma_max_sq, args.k);
    if (args.eps == 0.0) {
      mean = sample_mean(y);
      diag["iterations"] = 0;
    } else {
      const auto outcome = chunked_aggregate(y, args.chunk_size, args.eps, cfg, sub,
                                             args.seed, thread_count(args.threads));
      mean = outcome.mean;
      json chunks = json::array();
      for (std::size_t c = 0; c < outcome.chunks.size(); ++c) {
        const auto& chunk = outcome.chunks[c];
        chunks.push_back({{"chunk", c},
                          {"iterations", chunk.iterations},
                          {"spectral_norm", chunk.final_spectral_norm},
                          {"converged", chunk.converged},
                          {"degenerate", chunk.degenerate}});
        if (chunk.power_iteration_warning) warned = true;
        if (chunk.degenerate) warned = true;
      }
      diag["chunks"] = chunks;
      diag["xi"] = cfg.xi;
    }
  } else {
    throw CLI::ValidationError("--alg", "unknown aggregator: " + args.alg);
  }

  SampleSet out(1, mean.size());
  for (std::size_t j = 0; j < mean.size(); ++j) out.at(0, j) = mean[j];
  write_matrix_file(args.out, out);

  if (!args.diag.empty()) {
    std::ofstream f(args.diag, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + args.diag);
    if (diag.contains("chunks")) {
      for (const auto& chunk : diag["chunks"]) f << chunk.dump() << '\n';
    } else {
      f << diag.dump() << '\n';
    }
  }
  if (warned) {
    std::cerr << "warning: non-converged or degenerate chunk encountered\n";
  }
  return kExitOk;
}

struct AttackArgs {
  std::string in;
  std::string out;
  std::string report;
  std::string attack = "hidra";
  double eps = 0.2;
  double sigma_max_sq = 1.0;
  double k = kDefaultThresholdK;
  double attacker_sigma_max_sq = 0.0;
  std::size_t chunk_size = 1000;
  double delta = 0.0;
  double scale = 1e6;
  double beta = 10.0;
  double c = 0.02;
  std::size_t visible = 0;
  bool randomize_indices = false;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

int run_attack(const AttackArgs& args) {
  const SampleSet x = read_matrix_file(args.in);
  json report;
  report["attack"] = args.attack;
  SampleSet corrupted;

  if (args.attack == "hidra") {
    AttackConfig cfg;
    cfg.eps = args.eps;
    cfg.xi = ThresholdConfig::make(args.sigma_max_sq, args.k).xi;
    cfg.delta = args.delta;
    cfg.randomize_indices = args.randomize_indices;
    if (args.attacker_sigma_max_sq > 0.0) cfg.sigma_max_sq = args.attacker_sigma_max_sq;
    if (args.visible > 0) {
      cfg.knowledge = Knowledge::kPartial;
      cfg.visible.resize(std::min<std::size_t>(args.visible, x.n));
      for (std::size_t i = 0; i < cfg.visible.size(); ++i) cfg.visible[i] = i;
    }
    const auto res = hidra_corrupt_chunked(x, args.chunk_size, cfg, args.seed, nullptr,
                                           thread_count(args.threads));
    corrupted = res.corrupted;
    report["corrupted_indices"] = res.report.corrupted_indices;
    report["per_chunk_z"] = res.report.per_chunk_z;
    report["achieved_bias"] = res.report.achieved_bias;
    report["zero_mean_fallback"] = res.report.zero_mean_fallback;
  } else if (args.attack == "signflip") {
    corrupted = sign_flip_baseline(x, args.eps, args.scale);
    report["scale"] = args.scale;
    report["achieved_bias"] = measure_bias(x, sample_mean(corrupted));
  } else if (args.attack == "dnc-binary") {
    const auto res = dnc_binary_attack(x, args.eps, args.beta, args.c, args.seed);
    corrupted = res.corrupted;
    report["b1_index"] = res.b1_index;
    report["b2_indices"] = res.b2_indices;
    report["achieved_bias"] = measure_bias(x, sample_mean(corrupted));
  } else {
    throw CLI::ValidationError("--attack", "unknown attack: " + args.attack);
  }

  write_matrix_file(args.out, corrupted);
  if (!args.report.empty()) {
    std::ofstream f(args.report, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + args.report);
    f << report.dump(2) << '\n';
  }
  return kExitOk;
}

struct SpecArgs {
  std::string spec;
  std::string out;
  std::size_t threads = 0;
};

int run_sweep(const SpecArgs& args) {
  ExperimentSpec spec = ExperimentSpec::from_file(args.spec);
  spec.threads = thread_count(args.threads == 0 ? spec.threads : args.threads);
  const auto result = bias_sweep(spec);
  write_sweep_csv(args.out, result.trials);
  for (const auto& row : result.summary) {
    std::cout << "d=" << row.d << " attack=" << row.attack
              << " bias=" << format_double(row.empirical_bias_mean)
              << " +/- " << format_double(row.empirical_bias_std)
              << " theory=" << format_double(row.theoretical_bias) << '\n';
  }
  return kExitOk;
}

int run_dnc(const SpecArgs& args) {
  ExperimentSpec spec = ExperimentSpec::from_file(args.spec);
  spec.threads = thread_count(args.threads == 0 ? spec.threads : args.threads);
  const auto rows = dnc_beta_sweep(spec);
  write_dnc_csv(args.out, rows);
  return kExitOk;
}

int run_trainsim(const SpecArgs& args) {
  ExperimentSpec spec = ExperimentSpec::from_file(args.spec);
  spec.threads = thread_count(args.threads == 0 ? spec.threads : args.threads);
  const auto result = train_sim(spec);
  write_train_csv(args.out, result);
  std::cout << "final_accuracy=" << format_double(result.final_accuracy)
            << (result.diverged ? " (diverged)" : "") << '\n';
  if (result.diverged) {
    std::cerr << "warning: training diverged\n";
  }
  return kExitOk;
}

struct ReductionArgs {
  std::size_t n = 1000;
  std::size_t d = 200;
  double eps = 0.1;
  std::size_t trials = 20;
  double sigma_max_sq = 1.0;
  double tol_angle = 0.01;
  std::uint64_t seed = 1;
};

int run_reduction(const ReductionArgs& args) {
  const ThresholdConfig cfg = ThresholdConfig::make(args.sigma_max_sq, kDefaultThresholdK);
  const PowerIterationOptions power{1e-7, 800};
  std::size_t alignment_pass = 0, angle_pass = 0, recovered = 0, fallbacks = 0;
  double agg_seconds = 0.0, overhead_seconds = 0.0;

  for (std::size_t t = 0; t < args.trials; ++t) {
    const std::uint64_t seed = derive_seed(args.seed, t);
    const ECInstance ec = construct_ec(args.n, args.d, args.eps, seed);

    const auto alignment = verify_planted_alignment(ec, args.tol_angle, derive_seed(seed, 1), power);
    if (alignment.pass) ++alignment_pass;

    const AggregatorFn aggregator = [&](const SampleSet& y) {
      return meta_aggregate(y, args.eps, cfg, Subroutine::kFiltering,
                            derive_seed(seed, 2), power)
          .mean;
    };
    const auto reduction = reduce_max_variance(ec, args.eps, aggregator);
    if (reduction.used_fallback) ++fallbacks;

    const auto oracle =
        top_eigenpair(ec.yprime, uniform_weights(ec.yprime.n), derive_seed(seed, 3), power);
    const double cosine =
        std::abs(dot(reduction.direction, oracle.pair.direction));
    if (cosine >= std::cos(8.0 * M_PI / 180.0)) ++angle_pass;

    auto sorted = reduction.candidates;
    std::sort(sorted.begin(), sorted.end());
    if (sorted == ec.corrupted_indices) ++recovered;

    const auto timing = reduction_timing(ec, args.eps, aggregator);
    agg_seconds += timing.aggregator_seconds;
    overhead_seconds += timing.overhead_seconds;
  }

  std::cout << "trials=" << args.trials << '\n'
            << "max_variance_alignment_pass=" << alignment_pass << '\n'
            << "reduction_angle_within_8deg=" << angle_pass << '\n'
            << "corrupted_set_recovered=" << recovered << '\n'
            << "orthogonal_pair_fallbacks=" << fallbacks << '\n'
            << "mean_aggregator_seconds=" << format_double(agg_seconds / args.trials)
            << '\n'
            << "mean_overhead_seconds=" << format_double(overhead_seconds / args.trials)
            << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine-robust aggregation toolkit: aggregators, attacks, and experiments"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a Gaussian sample-set file");
  gen_cmd->add_option("--out", gen.out, "output matrix file")->required();
  gen_cmd->add_option("--n", gen.n, "number of samples")->default_val(gen.n);
  gen_cmd->add_option("--d", gen.d, "dimension")->default_val(gen.d);
  gen_cmd->add_option("--profile", gen.profile, "spherical|logspaced")
      ->default_val(gen.profile);
  gen_cmd->add_option("--sigma", gen.sigma, "max per-axis stddev")->default_val(gen.sigma);
  gen_cmd->add_option("--sigma-min", gen.sigma_min, "min stddev for logspaced")
      ->default_val(gen.sigma_min);
  gen_cmd->add_option("--mean-value", gen.mean_value, "constant mean per coordinate")
      ->default_val(gen.mean_value);
  gen_cmd->add_option("--seed", gen.seed, "PRNG seed")->default_val(gen.seed);

  AggregateArgs agg;
  auto* agg_cmd = app.add_subcommand("aggregate", "Aggregate a sample-set file");
  agg_cmd->add_option("--in", agg.in, "input matrix file")->required();
  agg_cmd->add_option("--out", agg.out, "output matrix file (1 x d mean)")->required();
  agg_cmd->add_option("--diag", agg.diag, "JSON-lines diagnostics path");
  agg_cmd->add_option("--alg", agg.alg,
                      "filtering|noregret|median|trimmed-mean|krum|dnc|mean")
      ->default_val(agg.alg);
  agg_cmd->add_option("--eps", agg.eps, "assumed corruption fraction")
      ->default_val(agg.eps);
  agg_cmd->add_option("--sigma-max-sq", agg.sigma_max_sq, "benign max variance estimate")
      ->default_val(agg.sigma_max_sq);
  agg_cmd->add_option("--k", agg.k, "threshold multiplier, xi = k * sigma_max_sq")
      ->default_val(format_double(kDefaultThresholdK));
  agg_cmd->add_option("--chunk-size", agg.chunk_size, "dimensions per chunk")
      ->default_val(agg.chunk_size);
  agg_cmd->add_option("--dnc-dims", agg.dnc_dims, "sampled dimensions for dnc (0=auto)")
      ->default_val(agg.dnc_dims);
  agg_cmd->add_option("--seed", agg.seed, "PRNG seed")->default_val(agg.seed);
  agg_cmd->add_option("--threads", agg.threads, "worker threads (0: RAGG_THREADS or 1)")
      ->default_val(agg.threads);

  AttackArgs atk;
  auto* atk_cmd = app.add_subcommand("attack", "Corrupt a benign sample-set file");
  atk_cmd->add_option("--in", atk.in, "benign matrix file")->required();
  atk_cmd->add_option("--out", atk.out, "corrupted matrix file")->required();
  atk_cmd->add_option("--report", atk.report, "JSON corruption report path");
  atk_cmd->add_option("--attack", atk.attack, "hidra|signflip|dnc-binary")
      ->default_val(atk.attack);
  atk_cmd->add_option("--eps", atk.eps, "corruption fraction")->default_val(atk.eps);
  atk_cmd->add_option("--sigma-max-sq", atk.sigma_max_sq,
                      "defense's benign variance estimate (xi = k * this)")
      ->default_val(atk.sigma_max_sq);
  atk_cmd->add_option("--k", atk.k, "defense threshold multiplier")
      ->default_val(format_double(kDefaultThresholdK));
  atk_cmd->add_option("--attacker-sigma-max-sq", atk.attacker_sigma_max_sq,
                      "attacker's own variance estimate (0: derive xi/sqrt(20))")
      ->default_val(atk.attacker_sigma_max_sq);
  atk_cmd->add_option("--chunk-size", atk.chunk_size, "dimensions per chunk")
      ->default_val(atk.chunk_size);
  atk_cmd->add_option("--delta", atk.delta, "probabilistic slack")->default_val(atk.delta);
  atk_cmd->add_option("--scale", atk.scale, "sign-flip magnitude")->default_val(atk.scale);
  atk_cmd->add_option("--beta", atk.beta, "dnc-binary distance multiplier")
      ->default_val(atk.beta);
  atk_cmd->add_option("--c", atk.c, "dnc-binary secondary magnitude fraction")
      ->default_val(atk.c);
  atk_cmd->add_option("--visible", atk.visible,
                      "partial knowledge: first N samples visible (0: full)")
      ->default_val(atk.visible);
  atk_cmd->add_flag("--randomize-indices", atk.randomize_indices,
                    "corrupt a seeded random subset instead of the first indices");
  atk_cmd->add_option("--seed", atk.seed, "PRNG seed")->default_val(atk.seed);
  atk_cmd->add_option("--threads", atk.threads, "worker threads")->default_val(atk.threads);

  SpecArgs sweep_args, dnc_args, train_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Bias-vs-dimension sweep from a spec file");
  sweep_cmd->add_option("--spec", sweep_args.spec, "key=value spec file")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "output CSV")->required();
  sweep_cmd->add_option("--threads", sweep_args.threads, "worker threads")
      ->default_val(sweep_args.threads);

  auto* dnc_cmd = app.add_subcommand("dnc", "DnC beta sweep from a spec file");
  dnc_cmd->add_option("--spec", dnc_args.spec, "key=value spec file")->required();
  dnc_cmd->add_option("--out", dnc_args.out, "output CSV")->required();
  dnc_cmd->add_option("--threads", dnc_args.threads, "worker threads")
      ->default_val(dnc_args.threads);

  auto* train_cmd =
      app.add_subcommand("trainsim", "Federated logistic-regression simulation");
  train_cmd->add_option("--spec", train_args.spec, "key=value spec file")->required();
  train_cmd->add_option("--out", train_args.out, "output CSV")->required();
  train_cmd->add_option("--threads", train_args.threads, "worker threads")
      ->default_val(train_args.threads);

  ReductionArgs red;
  auto* red_cmd = app.add_subcommand("reduction", "Max-variance-direction reduction report");
  red_cmd->add_option("--n", red.n, "samples per instance")->default_val(red.n);
  red_cmd->add_option("--d", red.d, "dimension")->default_val(red.d);
  red_cmd->add_option("--eps", red.eps, "corruption fraction")->default_val(red.eps);
  red_cmd->add_option("--trials", red.trials, "number of seeded instances")
      ->default_val(red.trials);
  red_cmd->add_option("--sigma-max-sq", red.sigma_max_sq, "benign variance estimate")
      ->default_val(red.sigma_max_sq);
  red_cmd->add_option("--tol-angle", red.tol_angle, "alignment tolerance on 1 - |cos|")
      ->default_val(red.tol_angle);
  red_cmd->add_option("--seed", red.seed, "PRNG seed")->default_val(red.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return run_gen(gen);
    if (agg_cmd->parsed()) return run_aggregate(agg);
    if (atk_cmd->parsed()) return run_attack(atk);
    if (sweep_cmd->parsed()) return run_sweep(sweep_args);
    if (dnc_cmd->parsed()) return run_dnc(dnc_args);
    if (train_cmd->parsed()) return run_trainsim(train_args);
    if (red_cmd->parsed()) return run_reduction(red);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}

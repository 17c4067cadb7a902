#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabser/backend.hpp"
#include "tabser/dataset.hpp"
#include "tabser/prompt.hpp"
#include "tabser/serialize.hpp"

namespace tabser {

struct SplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded uniform permutation of the rows; the first floor(80%) are train.
SplitResult split(const Dataset& ds, std::uint64_t seed);

/// k row indices drawn class-balanced with replacement from the training
/// split: floor(k/|C|) per class, the k mod |C| remainder spread by a seeded
/// shuffle of the classes, result order shuffled by the same seed.
struct ShotSet {
  std::size_t k = 0;
  std::vector<std::size_t> indices;
  std::uint64_t seed = 0;
};

ShotSet sample_shots(const Dataset& ds, const std::vector<std::size_t>& train, std::size_t k,
                     std::uint64_t seed);

/// Mann-Whitney AUC: probability a random positive outscores a random
/// negative, ties counting one half.
double auc_binary(const std::vector<double>& scores, const std::vector<int>& labels);

/// Unweighted mean of one-vs-rest binary AUCs over classes with at least one
/// positive and one negative.
double auc_macro_ovr(const std::vector<std::vector<double>>& probs,
                     const std::vector<std::size_t>& labels, std::size_t n_classes);

double mean(const std::vector<double>& values);
double sample_sd(const std::vector<double>& values);  // n-1 denominator

struct EvalReport {
  std::vector<double> per_seed_auc;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t k = 0;
  std::string serializer_id;
};

struct ExperimentConfig {
  std::vector<std::size_t> shots_grid{0};
  std::vector<std::uint64_t> seeds{0};
  int threads = 1;
};

struct ExperimentResult {
  std::vector<EvalReport> reports;     // one per k in grid order
  std::vector<ShotSet> shot_sets;      // every (seed, k > 0) pair
};

/// The paper's protocol: per seed, split 80/20, classify the test rows with
/// the serializer + template + scoring backend, and report AUC per shot count
/// (shots are sampled and recorded for external fine-tuning systems; the
/// harness itself scores without fine-tuning).
ExperimentResult run_experiment(const Dataset& ds, const TaskTemplate& tpl,
                                const RowSerializer& serializer, Backend& backend,
                                const ExperimentConfig& config);

}  // namespace tabser

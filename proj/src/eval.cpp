#include "tabser/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "tabser/errors.hpp"
#include "tabser/rng.hpp"

namespace tabser {

SplitResult split(const Dataset& ds, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x73706c69);  // "spli"
  const std::vector<std::size_t> perm = random_permutation(ds.n_rows(), rng);
  const std::size_t train_size = ds.n_rows() * 4 / 5;
  SplitResult result;
  result.train.assign(perm.begin(), perm.begin() + train_size);
  result.test.assign(perm.begin() + train_size, perm.end());
  return result;
}

ShotSet sample_shots(const Dataset& ds, const std::vector<std::size_t>& train, std::size_t k,
                     std::uint64_t seed) {
  ShotSet shots;
  shots.k = k;
  shots.seed = seed;
  if (k == 0) {
    return shots;
  }

  const std::size_t n_classes = ds.class_names.size();
  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t idx : train) {
    by_class[ds.labels[idx]].push_back(idx);
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (by_class[c].empty()) {
      throw DataError(ErrorKind::missing_class_in_train,
                      "class '" + ds.class_names[c] + "' absent from the training split");
    }
  }

  Rng rng = make_rng(seed, 0x73686f74);  // "shot"
  std::vector<std::size_t> quota(n_classes, k / n_classes);
  std::vector<std::size_t> class_order = random_permutation(n_classes, rng);
  for (std::size_t i = 0; i < k % n_classes; ++i) {
    quota[class_order[i]] += 1;
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t draw = 0; draw < quota[c]; ++draw) {
      shots.indices.push_back(by_class[c][uniform_index(rng, by_class[c].size())]);
    }
  }
  shuffle_values(shots.indices, rng);
  return shots;
}

double auc_binary(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw DataError(ErrorKind::arity_mismatch, "scores and labels differ in length");
  }
  std::size_t n_pos = 0;
  for (int label : labels) {
    if (label != 0) ++n_pos;
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError(ErrorKind::single_class, "AUC requires both classes present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average ranks over tie groups; ranks are 1-based. Twice the rank stays
  // integral, so the tie average is exact.
  double twice_pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double twice_avg_rank = static_cast<double>(i + j + 1);  // 2 * (mean of ranks i+1..j)
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] != 0) {
        twice_pos_rank_sum += twice_avg_rank;
      }
    }
    i = j;
  }
  const double twice_u = twice_pos_rank_sum - static_cast<double>(n_pos) * (n_pos + 1);
  return twice_u / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auc_macro_ovr(const std::vector<std::vector<double>>& probs,
                     const std::vector<std::size_t>& labels, std::size_t n_classes) {
  if (probs.size() != labels.size()) {
    throw DataError(ErrorKind::arity_mismatch, "probs and labels differ in length");
  }
  double total = 0.0;
  std::size_t eligible = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::size_t pos = 0;
    for (std::size_t label : labels) {
      if (label == c) ++pos;
    }
    if (pos == 0 || pos == labels.size()) continue;
    std::vector<double> scores(labels.size());
    std::vector<int> binary(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      scores[i] = probs[i][c];
      binary[i] = labels[i] == c ? 1 : 0;
    }
    total += auc_binary(scores, binary);
    ++eligible;
  }
  if (eligible == 0) {
    throw DataError(ErrorKind::no_eligible_class, "no class has both positives and negatives");
  }
  return total / static_cast<double>(eligible);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) {
    ss += (v - m) * (v - m);
  }
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

namespace {

/// Rethrows `err` with (seed, k) context, keeping its concrete category so
/// exit-code mapping still works.
[[noreturn]] void rethrow_with_context(const Error& err, const std::string& context) {
  if (const auto* backend = dynamic_cast<const BackendError*>(&err)) {
    throw BackendError(backend->kind(), context + err.what(), backend->status());
  }
  if (dynamic_cast<const UsageError*>(&err) != nullptr) {
    throw UsageError(context + err.what());
  }
  throw DataError(err.kind(), context + err.what());
}

/// Class probabilities for every test row, classified in index order;
/// parallel over rows when threads > 1.
std::vector<std::vector<double>> classify_rows(const Dataset& ds, const TaskTemplate& tpl,
                                               const RowSerializer& serializer, Backend& backend,
                                               const std::vector<std::size_t>& rows, int threads) {
  std::vector<std::vector<double>> probs(rows.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= rows.size()) break;
      try {
        const SerializedExample example = serializer.run(ds, rows[i]);
        const RenderedPrompt prompt = render(tpl, example);
        probs[i] = classify(prompt, backend).probs;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(rows.size());
        break;
      }
    }
  };

  const int n_threads = std::max(1, threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }
  if (failure) std::rethrow_exception(failure);
  return probs;
}

}  // namespace

ExperimentResult run_experiment(const Dataset& ds, const TaskTemplate& tpl,
                                const RowSerializer& serializer, Backend& backend,
                                const ExperimentConfig& config) {
  if (tpl.answer_choices.size() != ds.class_names.size()) {
    throw DataError(ErrorKind::arity_mismatch,
                    "template has " + std::to_string(tpl.answer_choices.size()) +
                        " answer choices for " + std::to_string(ds.class_names.size()) + " classes");
  }

  ExperimentResult result;
  std::vector<std::vector<double>> auc_by_k(config.shots_grid.size());

  for (std::uint64_t seed : config.seeds) {
    SplitResult parts = split(ds, seed);
    double auc = 0.0;
    try {
      const auto probs = classify_rows(ds, tpl, serializer, backend, parts.test, config.threads);
      std::vector<std::size_t> test_labels;
      test_labels.reserve(parts.test.size());
      for (std::size_t idx : parts.test) {
        test_labels.push_back(ds.labels[idx]);
      }
      if (ds.class_names.size() == 2) {
        std::vector<double> positive_probs(probs.size());
        std::vector<int> binary(probs.size());
        for (std::size_t i = 0; i < probs.size(); ++i) {
          positive_probs[i] = probs[i][1];
          binary[i] = test_labels[i] == 1 ? 1 : 0;
        }
        auc = auc_binary(positive_probs, binary);
      } else {
        auc = auc_macro_ovr(probs, test_labels, ds.class_names.size());
      }
    } catch (const Error& err) {
      rethrow_with_context(err, "seed " + std::to_string(seed) + ": ");
    }

    for (std::size_t ki = 0; ki < config.shots_grid.size(); ++ki) {
      const std::size_t k = config.shots_grid[ki];
      if (k > 0) {
        try {
          result.shot_sets.push_back(sample_shots(ds, parts.train, k, seed));
        } catch (const Error& err) {
          rethrow_with_context(
              err, "seed " + std::to_string(seed) + ", k=" + std::to_string(k) + ": ");
        }
      }
      auc_by_k[ki].push_back(auc);
    }
  }

  for (std::size_t ki = 0; ki < config.shots_grid.size(); ++ki) {
    EvalReport report;
    report.per_seed_auc = auc_by_k[ki];
    report.mean = mean(report.per_seed_auc);
    report.sd = sample_sd(report.per_seed_auc);
    report.k = config.shots_grid[ki];
    report.serializer_id = serializer.id;
    result.reports.push_back(std::move(report));
  }
  return result;
}

}  // namespace tabser

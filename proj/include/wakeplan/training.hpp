#pragma once

#include <string>
#include <vector>

#include "wakeplan/corpus_io.hpp"
#include "wakeplan/dataset.hpp"
#include "wakeplan/mlp.hpp"

namespace wakeplan {

// Normalized train/validation splits built from one planner method's paths.
struct PreparedData {
  std::vector<TrainingSample> train;  // z-scored with the training statistics
  std::vector<TrainingSample> val;
  NormStats norm;
  std::vector<std::string> train_keys;
  std::vector<std::string> val_keys;
  std::size_t skipped_overlong = 0;
};

inline PreparedData prepare_training(const std::vector<PathRecord>& recs, double train_fraction, std::uint64_t seed) {
  PreparedData d;
  const auto raw = samples_from_path_records(recs, &d.skipped_overlong);
  if (raw.size() < 2) throw ConfigError("train: need at least two usable paths");
  const Split split = split_stratified(raw, train_fraction, seed);
  std::vector<TrainingSample> tr, va;
  for (auto i : split.train) tr.push_back(raw[i]);
  for (auto i : split.val) va.push_back(raw[i]);
  d.norm = compute_norm_stats(tr);
  for (const auto& s : tr) {
    d.train_keys.push_back(s.key);
    d.train.push_back(normalize(s, d.norm));
  }
  for (const auto& s : va) {
    d.val_keys.push_back(s.key);
    d.val.push_back(normalize(s, d.norm));
  }
  return d;
}

inline TrainConfig overfit_config(std::uint64_t seed, int samples) {
  TrainConfig c;
  c.lr = 1e-3;
  c.batch_size = samples;
  c.max_epochs = 500;
  c.patience = 0;
  c.seed = seed;
  return c;
}

// Memorization check: train and validate on the same few trajectories.
inline std::pair<MlpModel, TrainReport> overfit_smoke(const std::vector<TrainingSample>& raw, std::uint64_t seed,
                                                      std::size_t count = 32) {
  if (raw.size() < count) throw ConfigError("overfit smoke: need " + std::to_string(count) + " trajectories");
  std::vector<TrainingSample> subset(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(count));
  const NormStats norm = compute_norm_stats(subset);
  for (auto& s : subset) s = normalize(s, norm);
  return train(subset, subset, overfit_config(seed, static_cast<int>(count)), norm, subset.front().variant);
}

}  // namespace wakeplan

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "astprobe/probe.hpp"

namespace astprobe {

/// Schedule and objective settings for probe training.
struct TrainConfig {
  double lr = 1e-3;
  double lr_decay = 0.1;  // multiplier applied when validation loss does not improve
  int max_epochs = 20;
  int patience = 5;       // non-improving epochs tolerated before stopping
  double lambda = 5.0;    // orthogonality weight
  int batch_size = 32;
  std::uint64_t seed = 0;
  int jobs = 1;           // worker threads for per-sequence gradients

  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

/// One token sequence: word vectors (rows) and its gold tuple.
struct TrainingSample {
  std::string id;
  Matrix<float> words;
  GoldTuple gold;
};

struct ProbeShape {
  Eigen::Index ambient_dim = 0;
  Eigen::Index subspace_dim = 0;
  Eigen::Index c_labels = 0;
  Eigen::Index u_labels = 0;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0;
  double train_loss = 0;
  LossBreakdown<double> validation;
  bool improved = false;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 0: initial parameters were kept
  double best_validation_loss = 0;
  std::string stop_reason;
};

nlohmann::json to_json(const TrainLog& log);
TrainLog train_log_from_json(const nlohmann::json& j);

struct TrainResult {
  ProbeParams<float> params;
  TrainLog log;
};

/// Mean loss over `samples` (orthogonality added once, weighted by lambda).
LossBreakdown<double> dataset_loss(const ProbeParams<float>& params,
                                   std::span<const TrainingSample> samples, double lambda,
                                   int jobs = 1);

/// Adam over shuffled mini-batches; after every epoch the validation loss is
/// compared with the best so far. No improvement multiplies the learning
/// rate by lr_decay and counts toward patience; training stops once
/// `patience` such epochs accumulate in a row, or at max_epochs. Returns the
/// parameters of the best validation epoch.
///
/// Throws EmptyDataset when either split is empty.
TrainResult train(std::span<const TrainingSample> train_split,
                  std::span<const TrainingSample> validation_split, const ProbeShape& shape,
                  const TrainConfig& config);

/// Runs `fn(i)` for i in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace astprobe

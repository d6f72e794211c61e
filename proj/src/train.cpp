#include "astprobe/train.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "astprobe/adam.hpp"
#include "astprobe/errors.hpp"

namespace astprobe {

void TrainConfig::validate() const {
  if (!(lr > 0)) throw std::invalid_argument("lr must be positive");
  if (!(lr_decay > 0 && lr_decay <= 1)) throw std::invalid_argument("lr_decay must lie in (0, 1]");
  if (max_epochs < 0) throw std::invalid_argument("max_epochs must be non-negative");
  if (patience < 0) throw std::invalid_argument("patience must be non-negative");
  if (!(lambda >= 0)) throw std::invalid_argument("lambda must be non-negative");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < count; i += workers) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

nlohmann::json to_json(const TrainLog& log) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : log.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"lr", e.lr},
                      {"train_loss", e.train_loss},
                      {"val_loss", e.validation.total},
                      {"val_distance", e.validation.distance},
                      {"val_c", e.validation.c_label},
                      {"val_u", e.validation.u_label},
                      {"val_orthogonality", e.validation.orthogonality},
                      {"improved", e.improved}});
  }
  return {{"epochs", epochs},
          {"best_epoch", log.best_epoch},
          {"best_val_loss", log.best_validation_loss},
          {"stop_reason", log.stop_reason}};
}

TrainLog train_log_from_json(const nlohmann::json& j) {
  TrainLog log;
  for (const auto& e : j.at("epochs")) {
    EpochRecord r;
    r.epoch = e.at("epoch").get<int>();
    r.lr = e.at("lr").get<double>();
    r.train_loss = e.at("train_loss").get<double>();
    r.validation.total = e.at("val_loss").get<double>();
    r.validation.distance = e.at("val_distance").get<double>();
    r.validation.c_label = e.at("val_c").get<double>();
    r.validation.u_label = e.at("val_u").get<double>();
    r.validation.orthogonality = e.at("val_orthogonality").get<double>();
    r.improved = e.at("improved").get<bool>();
    log.epochs.push_back(r);
  }
  log.best_epoch = j.at("best_epoch").get<int>();
  log.best_validation_loss = j.at("best_val_loss").get<double>();
  log.stop_reason = j.at("stop_reason").get<std::string>();
  return log;
}

LossBreakdown<double> dataset_loss(const ProbeParams<float>& params,
                                   std::span<const TrainingSample> samples, double lambda,
                                   int jobs) {
  std::vector<LossBreakdown<float>> parts(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    parts[i] = sequence_loss_and_grad<float>(params, samples[i].words, samples[i].gold, nullptr);
  });
  LossBreakdown<double> mean;
  for (const auto& p : parts) {
    mean.distance += p.distance;
    mean.c_label += p.c_label;
    mean.u_label += p.u_label;
  }
  if (!samples.empty()) {
    const double count = static_cast<double>(samples.size());
    mean.distance /= count;
    mean.c_label /= count;
    mean.u_label /= count;
  }
  mean.orthogonality = orthogonality_penalty<float>(params.basis);
  mean.total = mean.distance + mean.c_label + mean.u_label + lambda * mean.orthogonality;
  return mean;
}

TrainResult train(std::span<const TrainingSample> train_split,
                  std::span<const TrainingSample> validation_split, const ProbeShape& shape,
                  const TrainConfig& config) {
  config.validate();
  if (train_split.empty()) throw EmptyDataset("training split is empty");
  if (validation_split.empty()) throw EmptyDataset("validation split is empty");

  ProbeParams<float> params =
      init_probe(shape.ambient_dim, shape.subspace_dim, shape.c_labels, shape.u_labels,
                 config.seed)
          .cast<float>();
  TrainResult result{params, {}};
  TrainLog& log = result.log;

  double best = dataset_loss(params, validation_split, config.lambda, config.jobs).total;
  log.best_validation_loss = best;
  log.stop_reason = "max_epochs";

  Adam<float> adam(params);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_split.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(config.batch_size);
  std::vector<ProbeGradient<float>> per_sample(std::min(batch, order.size()),
                                               ProbeGradient<float>::zeros_like(params));
  std::vector<float> per_sample_loss(per_sample.size());

  double lr = config.lr;
  int stale = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t size = std::min(batch, order.size() - start);
      parallel_for(size, config.jobs, [&](std::size_t k) {
        const auto& sample = train_split[order[start + k]];
        per_sample_loss[k] =
            sequence_loss_and_grad<float>(params, sample.words, sample.gold, &per_sample[k]).total;
      });
      // Fixed summation order keeps runs reproducible for any thread count.
      ProbeGradient<float> total = per_sample[0];
      double batch_loss = per_sample_loss[0];
      for (std::size_t k = 1; k < size; ++k) {
        total += per_sample[k];
        batch_loss += per_sample_loss[k];
      }
      total *= 1.0f / static_cast<float>(size);
      const float ortho = add_orthogonality_grad<float>(params.basis,
                                                        static_cast<float>(config.lambda),
                                                        total.basis);
      epoch_loss += batch_loss + static_cast<double>(size) * config.lambda * ortho;
      adam.step(params, total, lr);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.lr = lr;
    record.train_loss = epoch_loss / static_cast<double>(order.size());
    record.validation = dataset_loss(params, validation_split, config.lambda, config.jobs);
    record.improved = record.validation.total < best;
    log.epochs.push_back(record);

    if (record.improved) {
      best = record.validation.total;
      result.params = params;
      log.best_epoch = epoch;
      log.best_validation_loss = best;
      stale = 0;
    } else {
      lr *= config.lr_decay;
      if (++stale >= config.patience) {
        log.stop_reason = "early_stopping";
        break;
      }
    }
  }
  return result;
}

}  // namespace astprobe

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qtb/models/model.hpp"
#include "qtb/numerics/adam.hpp"
#include "qtb/numerics/rng.hpp"

namespace qtb {

struct TrainOptions {
  std::size_t epochs = 50;
  std::size_t patience = 10;
  double min_delta = 1e-6;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
};

enum class StopReason { Completed, EarlyStopped };

struct TrainLog {
  /// Token-weighted mean cross-entropy per epoch.
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> wall_seconds;
  StopReason stop_reason = StopReason::Completed;
  /// Number of epochs run.
  std::size_t stop_epoch = 0;
  /// 1-based epoch whose parameters were kept.
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
};

/// Same losses, epochs and stop decision; wall times are ignored.
bool same_trajectory(const TrainLog& a, const TrainLog& b);
/// Omits wall times so the output is reproducible.
nlohmann::json train_log_to_json(const TrainLog& log);

/// Cross-entropy pooled over every target token of the batch. PAD targets
/// are masked. Records on the active tape.
Tensor batch_loss(const LanguageModel& model, std::span<const std::vector<TokenId>> batch);
/// Pooled per-token NLL without recording.
double mean_token_nll(const LanguageModel& model, std::span<const std::vector<TokenId>> sequences);

using EpochCallback = std::function<void(std::size_t epoch, const TrainLog& log)>;

/// Adam over shuffled mini-batches with early stopping on validation loss.
/// An epoch improves when its validation loss beats the best by more than
/// min_delta; training stops after `patience` epochs without improvement and
/// the best parameters are restored. Throws NumericalError on a non-finite
/// loss, naming the epoch and batch.
TrainLog train(LanguageModel& model, std::span<const std::vector<TokenId>> train_set,
               std::span<const std::vector<TokenId>> val_set, const TrainOptions& options, Rng& rng,
               Adam* optimizer = nullptr, const EpochCallback& on_epoch = {});

}  // namespace qtb

#include "qtb/harness/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "qtb/errors.hpp"
#include "qtb/metrics/metrics.hpp"
#include "qtb/numerics/ops.hpp"

namespace qtb {

namespace {

std::size_t target_count(const std::vector<TokenId>& seq) {
  std::size_t count = 0;
  for (std::size_t t = 1; t < seq.size(); ++t) count += seq[t] != Vocabulary::kPad ? 1 : 0;
  return count;
}

}  // namespace

bool same_trajectory(const TrainLog& a, const TrainLog& b) {
  return a.train_loss == b.train_loss && a.val_loss == b.val_loss && a.stop_reason == b.stop_reason &&
         a.stop_epoch == b.stop_epoch && a.best_epoch == b.best_epoch && a.best_val_loss == b.best_val_loss;
}

nlohmann::json train_log_to_json(const TrainLog& log) {
  return {{"train_loss", log.train_loss},
          {"val_loss", log.val_loss},
          {"stop_reason", log.stop_reason == StopReason::Completed ? "completed" : "early_stopped"},
          {"stop_epoch", log.stop_epoch},
          {"best_epoch", log.best_epoch},
          {"best_val_loss", log.best_val_loss}};
}

Tensor batch_loss(const LanguageModel& model, std::span<const std::vector<TokenId>> batch) {
  std::vector<Tensor> parts;
  double tokens = 0.0;
  for (const auto& seq : batch) {
    if (seq.size() < 2) continue;
    const std::span<const TokenId> s(seq);
    const std::size_t count = target_count(seq);
    if (count == 0) continue;
    std::vector<std::uint8_t> valid(seq.size() - 1);
    for (std::size_t t = 1; t < seq.size(); ++t) valid[t - 1] = seq[t] != Vocabulary::kPad ? 1 : 0;
    const auto ce = cross_entropy(model.forward(s.first(seq.size() - 1)), s.subspan(1), valid);
    parts.push_back(scale(ce, static_cast<double>(count)));
    tokens += static_cast<double>(count);
  }
  if (parts.empty()) throw ContractError("batch_loss: batch has no target tokens");
  Tensor total = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) total = add(total, parts[i]);
  return scale(total, 1.0 / tokens);
}

double mean_token_nll(const LanguageModel& model, std::span<const std::vector<TokenId>> sequences) {
  NllTotal total;
  for (const auto& seq : sequences) total += sequence_nll(model, seq);
  if (total.tokens == 0) throw ContractError("mean_token_nll: no target tokens");
  return total.nll / static_cast<double>(total.tokens);
}

TrainLog train(LanguageModel& model, std::span<const std::vector<TokenId>> train_set,
               std::span<const std::vector<TokenId>> val_set, const TrainOptions& options, Rng& rng, Adam* optimizer,
               const EpochCallback& on_epoch) {
  if (train_set.empty() || val_set.empty()) throw ContractError("train: empty training or validation set");
  if (options.epochs < 1 || options.patience < 1 || options.batch_size < 1)
    throw ContractError("train: epochs, patience and batch_size must be at least 1");
  Adam local(model.parameters().tensors(), AdamOptions{options.learning_rate});
  Adam& opt = optimizer != nullptr ? *optimizer : local;

  TrainLog log;
  auto best = model.parameters().snapshot();
  log.best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(std::span<std::size_t>(order));
    double weighted = 0.0, tokens = 0.0;
    for (std::size_t b = 0; b * options.batch_size < order.size(); ++b) {
      std::vector<std::vector<TokenId>> batch;
      for (std::size_t i = b * options.batch_size; i < std::min(order.size(), (b + 1) * options.batch_size); ++i)
        batch.push_back(train_set[order[i]]);
      opt.zero_grad();
      Tape tape;
      Tape::Scope scope(tape);
      const auto loss = batch_loss(model, batch);
      const double value = loss.item();
      if (!std::isfinite(value))
        throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch) + " batch " + std::to_string(b + 1));
      tape.backward(loss);
      opt.step();
      double count = 0.0;
      for (const auto& s : batch) count += static_cast<double>(target_count(s));
      weighted += value * count;
      tokens += count;
    }
    const double val = mean_token_nll(model, val_set);
    if (!std::isfinite(val)) throw NumericalError("train: non-finite validation loss at epoch " + std::to_string(epoch));
    log.train_loss.push_back(weighted / tokens);
    log.val_loss.push_back(val);
    log.wall_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    log.stop_epoch = epoch;
    if (val < log.best_val_loss - options.min_delta) {
      log.best_val_loss = val;
      log.best_epoch = epoch;
      best = model.parameters().snapshot();
      stale = 0;
    } else {
      ++stale;
    }
    if (on_epoch) on_epoch(epoch, log);
    if (stale >= options.patience) {
      log.stop_reason = epoch < options.epochs ? StopReason::EarlyStopped : StopReason::Completed;
      break;
    }
  }
  model.parameters().restore(best);
  return log;
}

}  // namespace qtb

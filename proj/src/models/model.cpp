#include "qtb/models/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qtb/errors.hpp"
#include "qtb/models/baselines.hpp"
#include "qtb/models/qasa.hpp"
#include "qtb/models/qksan.hpp"
#include "qtb/models/qrwkv.hpp"

namespace qtb {

LanguageModel::LanguageModel(ModelConfig config) : config_(std::move(config)) { config_.validate(); }

Tensor LanguageModel::forward(std::span<const TokenId> ids) const {
  if (ids.empty()) throw LengthError("forward: empty sequence");
  if (ids.size() > config_.max_seq_len)
    throw LengthError("forward: sequence of " + std::to_string(ids.size()) + " tokens exceeds max_seq_len " +
                      std::to_string(config_.max_seq_len));
  for (auto id : ids)
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size)
      throw IndexError("forward: token id " + std::to_string(id) + " outside vocabulary of " +
                       std::to_string(config_.vocab_size));
  return forward_impl(ids);
}

std::unique_ptr<LanguageModel> create_model(const ModelConfig& config) {
  switch (config.arch) {
    case Architecture::Transformer: return std::make_unique<TransformerModel>(config);
    case Architecture::Mlp: return std::make_unique<MlpModel>(config);
    case Architecture::Qksan: return std::make_unique<QksanModel>(config);
    case Architecture::Qasa: return std::make_unique<QasaModel>(config);
    case Architecture::Qrwkv: return std::make_unique<QrwkvModel>(config);
  }
  throw ContractError("create_model: unknown architecture");
}

std::vector<TokenId> generate(const LanguageModel& model, std::span<const TokenId> prompt, const DecodeOptions& options,
                              Rng* rng) {
  if (prompt.empty()) throw ContractError("generate: prompt must not be empty");
  const auto limit = model.config().max_seq_len;
  if (prompt.size() > limit)
    throw LengthError("generate: prompt of " + std::to_string(prompt.size()) + " tokens exceeds max_seq_len " +
                      std::to_string(limit));
  if (options.mode == DecodeMode::Sample) {
    if (!(options.temperature > 0.0)) throw DomainError("generate: temperature must be positive");
    if (rng == nullptr) throw ContractError("generate: sampling needs an Rng");
  }
  std::vector<TokenId> out(prompt.begin(), prompt.end());
  const auto vocab = model.config().vocab_size;
  for (std::size_t step = 0; step < options.max_new && out.size() < limit; ++step) {
    const auto logits = model.forward(out);
    const auto row = logits.data().subspan((logits.rows() - 1) * vocab, vocab);
    TokenId next = Vocabulary::kEos;
    if (options.mode == DecodeMode::Greedy) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < vocab; ++j) {
        const auto id = static_cast<TokenId>(j);
        if (id == Vocabulary::kPad || id == Vocabulary::kBos) continue;
        if (row[j] > best) {
          best = row[j];
          next = id;
        }
      }
    } else {
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 2; j < vocab; ++j) peak = std::max(peak, row[j] / options.temperature);
      std::vector<double> weights(vocab, 0.0);
      double total = 0.0;
      for (std::size_t j = 2; j < vocab; ++j) total += weights[j] = std::exp(row[j] / options.temperature - peak);
      double u = rng->uniform() * total;
      next = static_cast<TokenId>(vocab - 1);
      for (std::size_t j = 2; j < vocab; ++j) {
        if (weights[j] <= 0.0) continue;
        if (u < weights[j]) {
          next = static_cast<TokenId>(j);
          break;
        }
        u -= weights[j];
      }
    }
    if (next == Vocabulary::kEos) break;
    out.push_back(next);
  }
  return out;
}

}  // namespace qtb

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "qtb/corpus/vocabulary.hpp"
#include "qtb/models/config.hpp"
#include "qtb/models/parameters.hpp"
#include "qtb/numerics/rng.hpp"
#include "qtb/numerics/tensor.hpp"

namespace qtb {

/// Token sequence -> next-token logits. Row t of the output scores the token
/// following position t and depends only on ids[0..t].
class LanguageModel {
 public:
  explicit LanguageModel(ModelConfig config);
  virtual ~LanguageModel() = default;
  LanguageModel(const LanguageModel&) = delete;
  LanguageModel& operator=(const LanguageModel&) = delete;

  const ModelConfig& config() const { return config_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }

  /// Logits of shape n x vocab_size. Throws LengthError when n exceeds
  /// max_seq_len or is 0, IndexError for an id outside the vocabulary.
  Tensor forward(std::span<const TokenId> ids) const;

 protected:
  virtual Tensor forward_impl(std::span<const TokenId> ids) const = 0;

  ModelConfig config_;
  ParameterSet params_;
};

/// Builds and initialises a model from `config.seed`. Validates the config.
std::unique_ptr<LanguageModel> create_model(const ModelConfig& config);

enum class DecodeMode { Greedy, Sample };

struct DecodeOptions {
  DecodeMode mode = DecodeMode::Greedy;
  double temperature = 1.0;
  std::size_t max_new = 16;
};

/// Autoregressive decoding. Returns the prompt followed by generated ids;
/// stops at EOS (not appended), after max_new tokens, or when the context is
/// full. PAD and BOS are never emitted. Sampling draws from `rng`.
std::vector<TokenId> generate(const LanguageModel& model, std::span<const TokenId> prompt, const DecodeOptions& options,
                              Rng* rng = nullptr);

}  // namespace qtb

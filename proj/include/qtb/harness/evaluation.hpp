#pragma once

#include <span>
#include <vector>

#include "qtb/corpus/vocabulary.hpp"
#include "qtb/metrics/report.hpp"
#include "qtb/models/model.hpp"

namespace qtb {

struct EvalOptions {
  DecodeMode mode = DecodeMode::Greedy;
  double temperature = 1.0;
  /// Share of the reference words given as the prompt, rounded up.
  double prompt_fraction = 0.25;
  /// Upper bound on candidate length in words (prompt included).
  std::size_t max_length_words = 16;
};

/// ceil(fraction * words), at least 1 and at most `words`.
std::size_t prompt_length(std::size_t words, double fraction = 0.25);

/// Prompts the model with BOS plus the opening words of `sequence` (a
/// BOS ... EOS sample) and decodes the continuation.
GenerationSample generate_sample(const LanguageModel& model, const Vocabulary& vocab, std::span<const TokenId> sequence,
                                 const EvalOptions& options, Rng* rng = nullptr);

/// Pooled perplexity on `sequences` plus one generation per sequence.
MetricsReport evaluate(const LanguageModel& model, const Vocabulary& vocab, const std::string& dataset,
                       std::span<const std::vector<TokenId>> sequences, const EvalOptions& options, Rng* rng = nullptr);

}  // namespace qtb

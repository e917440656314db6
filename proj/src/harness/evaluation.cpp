#include "qtb/harness/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "qtb/errors.hpp"

namespace qtb {

std::size_t prompt_length(std::size_t words, double fraction) {
  if (words == 0) return 0;
  const auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(words) - 1e-12));
  return std::clamp<std::size_t>(n, 1, words);
}

GenerationSample generate_sample(const LanguageModel& model, const Vocabulary& vocab, std::span<const TokenId> sequence,
                                 const EvalOptions& options, Rng* rng) {
  std::vector<TokenId> body;
  for (auto id : sequence)
    if (id != Vocabulary::kBos && id != Vocabulary::kEos && id != Vocabulary::kPad) body.push_back(id);
  if (body.empty()) throw ContractError("generate_sample: reference has no words");
  const std::size_t k = prompt_length(body.size(), options.prompt_fraction);
  std::vector<TokenId> prompt{Vocabulary::kBos};
  prompt.insert(prompt.end(), body.begin(), body.begin() + static_cast<std::ptrdiff_t>(k));

  DecodeOptions decode{options.mode, options.temperature, options.max_length_words > k ? options.max_length_words - k : 0};
  const auto output = generate(model, prompt, decode, rng);
  return {vocab.decode(prompt), vocab.decode(body), vocab.decode(output)};
}

MetricsReport evaluate(const LanguageModel& model, const Vocabulary& vocab, const std::string& dataset,
                       std::span<const std::vector<TokenId>> sequences, const EvalOptions& options, Rng* rng) {
  if (sequences.empty()) throw ContractError("evaluate: no evaluation sequences");
  const double ppl = perplexity(model, sequences);
  std::vector<GenerationSample> samples;
  for (const auto& seq : sequences) samples.push_back(generate_sample(model, vocab, seq, options, rng));
  return aggregate_report(architecture_name(model.config().arch), dataset, ppl, std::move(samples));
}

}  // namespace qtb

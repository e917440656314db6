#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "qtb/corpus/vocabulary.hpp"
#include "qtb/models/model.hpp"

namespace qtb {

/// A metric value plus a marker for inputs where the metric is undefined and
/// a convention value was substituted.
struct Score {
  double value = 0.0;
  bool degenerate = false;
};

/// Clipped k-gram precision: matches are capped by the reference count of
/// each gram. A candidate with fewer than k tokens has precision 0.
double clipped_precision(std::span<const std::string> candidate, std::span<const std::string> reference, std::size_t k);

/// exp(sum_{k<=n} ln(p_k) / n) without a brevity penalty; 0 when any p_k is 0.
/// An empty candidate scores 0 and is flagged degenerate. Throws DomainError
/// for n = 0.
Score bleu(std::span<const std::string> candidate, std::span<const std::string> reference, std::size_t n);
double bleu_n(std::span<const std::string> candidate, std::span<const std::string> reference, std::size_t n);

/// Unique n-grams over total n-grams; 1.0 when there are no n-grams.
double distinct_n(std::span<const std::string> tokens, std::size_t n);

/// Fraction of adjacent identical pairs; 0.0 for fewer than two tokens.
double repetition_rate(std::span<const std::string> tokens);

struct FluencyStats {
  double avg_sentence_length = 0.0;
  /// Population standard deviation over mean of sentence lengths.
  double length_variation = 0.0;
  bool degenerate = false;
};

/// Word counts of the sentences in `text`. Sentences end at '.', '!' or '?';
/// trailing words without terminal punctuation form a final sentence.
std::vector<std::size_t> sentence_lengths(std::string_view text);
/// Pools sentences across all texts. Throws ContractError for no texts; a
/// zero mean length gives variation 0 with the degenerate flag set.
FluencyStats fluency_stats(std::span<const std::string> texts);

/// Summed next-token negative log-likelihood and the number of scored targets.
struct NllTotal {
  double nll = 0.0;
  std::size_t tokens = 0;
  NllTotal& operator+=(const NllTotal& other);
};

/// Teacher-forced NLL of seq[1..] given its prefixes; PAD targets are skipped.
NllTotal sequence_nll(const LanguageModel& model, std::span<const TokenId> sequence);
/// exp(nll / tokens). Throws ContractError when no tokens were scored.
double perplexity(const NllTotal& total);
/// Pooled over every target token of every sequence.
double perplexity(const LanguageModel& model, std::span<const std::vector<TokenId>> sequences);
/// exp(-mean(ln p)) for explicit target probabilities.
double perplexity_from_probabilities(std::span<const double> probabilities);

}  // namespace qtb

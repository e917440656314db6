#include "qtb/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "qtb/errors.hpp"

namespace qtb {

namespace {

using Gram = std::vector<std::string>;

std::map<Gram, std::size_t> gram_counts(std::span<const std::string> tokens, std::size_t k) {
  std::map<Gram, std::size_t> counts;
  if (tokens.size() < k) return counts;
  for (std::size_t i = 0; i + k <= tokens.size(); ++i) ++counts[Gram(tokens.begin() + i, tokens.begin() + i + k)];
  return counts;
}

bool is_terminal(const std::string& token) { return token == "." || token == "!" || token == "?"; }

bool is_punctuation(const std::string& token) {
  return token.size() == 1 && std::string_view(".,!?;:").find(token[0]) != std::string_view::npos;
}

}  // namespace

double clipped_precision(std::span<const std::string> candidate, std::span<const std::string> reference, std::size_t k) {
  if (k == 0) throw DomainError("clipped_precision: gram order must be at least 1");
  if (candidate.size() < k) return 0.0;
  const auto cand = gram_counts(candidate, k);
  const auto ref = gram_counts(reference, k);
  std::size_t matched = 0;
  for (const auto& [gram, count] : cand) {
    const auto it = ref.find(gram);
    if (it != ref.end()) matched += std::min(count, it->second);
  }
  return static_cast<double>(matched) / static_cast<double>(candidate.size() - k + 1);
}

Score bleu(std::span<const std::string> candidate, std::span<const std::string> reference, std::size_t n) {
  if (n == 0) throw DomainError("bleu: n must be at least 1");
  if (candidate.empty()) return {0.0, true};
  double log_sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double p = clipped_precision(candidate, reference, k);
    if (p == 0.0) return {0.0, false};
    log_sum += std::log(p);
  }
  return {std::exp(log_sum / static_cast<double>(n)), false};
}

double bleu_n(std::span<const std::string> candidate, std::span<const std::string> reference, std::size_t n) {
  return bleu(candidate, reference, n).value;
}

double distinct_n(std::span<const std::string> tokens, std::size_t n) {
  if (n == 0) throw DomainError("distinct_n: n must be at least 1");
  if (tokens.size() < n) return 1.0;
  const auto counts = gram_counts(tokens, n);
  return static_cast<double>(counts.size()) / static_cast<double>(tokens.size() - n + 1);
}

double repetition_rate(std::span<const std::string> tokens) {
  if (tokens.size() < 2) return 0.0;
  std::size_t repeats = 0;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) repeats += tokens[i] == tokens[i + 1] ? 1 : 0;
  return static_cast<double>(repeats) / static_cast<double>(tokens.size() - 1);
}

std::vector<std::size_t> sentence_lengths(std::string_view text) {
  std::vector<std::size_t> lengths;
  std::size_t words = 0;
  for (const auto& token : tokenize(text)) {
    if (is_terminal(token)) {
      if (words > 0) lengths.push_back(words);
      words = 0;
    } else if (!is_punctuation(token)) {
      ++words;
    }
  }
  if (words > 0) lengths.push_back(words);
  return lengths;
}

FluencyStats fluency_stats(std::span<const std::string> texts) {
  if (texts.empty()) throw ContractError("fluency_stats: no texts");
  std::vector<double> lengths;
  for (const auto& text : texts)
    for (auto l : sentence_lengths(text)) lengths.push_back(static_cast<double>(l));
  if (lengths.empty()) return {0.0, 0.0, true};
  const double n = static_cast<double>(lengths.size());
  const double mean = std::accumulate(lengths.begin(), lengths.end(), 0.0) / n;
  double var = 0.0;
  for (double l : lengths) var += (l - mean) * (l - mean);
  return {mean, std::sqrt(var / n) / mean, false};
}

NllTotal& NllTotal::operator+=(const NllTotal& other) {
  nll += other.nll;
  tokens += other.tokens;
  return *this;
}

NllTotal sequence_nll(const LanguageModel& model, std::span<const TokenId> sequence) {
  NllTotal total;
  if (sequence.size() < 2) return total;
  const auto logits = model.forward(sequence.first(sequence.size() - 1));
  const std::size_t v = logits.cols();
  for (std::size_t t = 0; t + 1 < sequence.size(); ++t) {
    const TokenId target = sequence[t + 1];
    if (target == Vocabulary::kPad) continue;
    const auto row = logits.data().subspan(t * v, v);
    const double peak = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double x : row) z += std::exp(x - peak);
    total.nll += std::log(z) + peak - row[static_cast<std::size_t>(target)];
    ++total.tokens;
  }
  return total;
}

double perplexity(const NllTotal& total) {
  if (total.tokens == 0) throw ContractError("perplexity: no target tokens");
  return std::exp(total.nll / static_cast<double>(total.tokens));
}

double perplexity(const LanguageModel& model, std::span<const std::vector<TokenId>> sequences) {
  NllTotal total;
  for (const auto& seq : sequences) total += sequence_nll(model, seq);
  return perplexity(total);
}

double perplexity_from_probabilities(std::span<const double> probabilities) {
  NllTotal total;
  for (double p : probabilities) {
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("perplexity_from_probabilities: probability outside (0, 1]");
    total.nll -= std::log(p);
    ++total.tokens;
  }
  return perplexity(total);
}

}  // namespace qtb

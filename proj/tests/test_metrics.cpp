#include <cmath>
#include <filesystem>
#include <map>

#include "doctest.h"
#include "qtb/corpus/synthesis.hpp"
#include "qtb/errors.hpp"
#include "qtb/metrics/report.hpp"
#include "qtb/numerics/ops.hpp"

using namespace qtb;

namespace {

using Tokens = std::vector<std::string>;

Tokens words(std::string_view text) { return tokenize(text); }

std::unique_ptr<LanguageModel> uniform_model(std::size_t vocab) {
  auto model = create_model(ModelConfig::defaults(Architecture::Mlp, vocab));
  for (auto t : model->parameters().tensors())
    for (auto& v : t.mutable_data()) v = 0.0;
  return model;
}

// Independent count of clipped matches with a linear scan per gram.
double precision_oracle(const Tokens& cand, const Tokens& ref, std::size_t k) {
  if (cand.size() < k) return 0.0;
  std::vector<bool> used(ref.size() >= k ? ref.size() - k + 1 : 0, false);
  std::size_t matched = 0;
  for (std::size_t i = 0; i + k <= cand.size(); ++i)
    for (std::size_t j = 0; j < used.size(); ++j) {
      if (used[j]) continue;
      if (std::equal(cand.begin() + i, cand.begin() + i + k, ref.begin() + j)) {
        used[j] = true;
        ++matched;
        break;
      }
    }
  return static_cast<double>(matched) / static_cast<double>(cand.size() - k + 1);
}

}  // namespace

TEST_CASE("bleu: reference fixtures") {
  const auto ref = words("birds fly in the sky");
  CHECK(bleu_n(words("birds sings on the table"), ref, 1) == 0.4);
  const auto proverb = words("actions speak louder than words");
  CHECK(bleu_n(proverb, proverb, 1) == 1.0);
  for (std::size_t n = 1; n <= 4; ++n) CHECK(bleu_n(proverb, proverb, n) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(bleu_n(words("alpha beta"), ref, 1) == 0.0);

  // BLEU-2 of "birds fly in a sky" vs the reference: p1 = 4/5, p2 = 2/4.
  CHECK(bleu_n(words("birds fly in a sky"), ref, 2) == doctest::Approx(std::sqrt(0.8 * 0.5)).epsilon(1e-15));
  // Clipping: "the the the" has one reference "the".
  CHECK(clipped_precision(words("the the the"), ref, 1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  // Too short for bigrams.
  CHECK(bleu_n(words("birds"), ref, 2) == 0.0);

  const auto empty = bleu(Tokens{}, ref, 1);
  CHECK(empty.value == 0.0);
  CHECK(empty.degenerate);
  CHECK_THROWS_AS((void)bleu_n(ref, ref, 0), DomainError);
}

TEST_CASE("bleu: clipped precision oracle and range on random token lists") {
  Rng rng(1);
  const Tokens alphabet{"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 300; ++trial) {
    Tokens cand(1 + rng.below(10)), ref(1 + rng.below(10));
    for (auto& t : cand) t = alphabet[rng.below(5)];
    for (auto& t : ref) t = alphabet[rng.below(5)];
    for (std::size_t k = 1; k <= 4; ++k) CHECK(clipped_precision(cand, ref, k) == doctest::Approx(precision_oracle(cand, ref, k)));
    for (std::size_t n = 1; n <= 4; ++n) {
      const double b = bleu_n(cand, ref, n);
      CHECK(b >= 0.0);
      CHECK(b <= 1.0);
      double expected = 1.0;
      for (std::size_t k = 1; k <= n; ++k) expected *= std::pow(precision_oracle(cand, ref, k), 1.0 / static_cast<double>(n));
      CHECK(b == doctest::Approx(expected).epsilon(1e-12));
    }
    if (cand.size() >= 4) CHECK(bleu_n(cand, cand, 4) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("distinct_n and repetition_rate") {
  CHECK(distinct_n(Tokens{"a", "b", "c"}, 1) == 1.0);
  CHECK(distinct_n(Tokens{"the", "the", "cat"}, 1) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(distinct_n(Tokens{"a", "b", "a", "b"}, 2) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(distinct_n(Tokens{}, 1) == 1.0);
  CHECK(distinct_n(Tokens{"a"}, 2) == 1.0);

  CHECK(repetition_rate(Tokens{"a", "a", "b"}) == 0.5);
  CHECK(repetition_rate(Tokens{"a", "b", "c", "d"}) == 0.0);
  CHECK(repetition_rate(Tokens{"x", "x", "x", "x"}) == 1.0);
  CHECK(repetition_rate(Tokens{"x"}) == 0.0);

  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    Tokens unique;
    for (std::size_t i = 0, n = 1 + rng.below(8); i < n; ++i) unique.push_back("w" + std::to_string(i));
    Tokens doubled = unique;
    doubled.insert(doubled.end(), unique.begin(), unique.end());
    CHECK(distinct_n(doubled, 1) == doctest::Approx(distinct_n(unique, 1) / 2).epsilon(1e-15));

    Tokens seq(2 + rng.below(12));
    for (auto& t : seq) t = std::string(1, static_cast<char>('a' + rng.below(3)));
    Tokens relabeled;
    for (const auto& t : seq) relabeled.push_back(t == "a" ? "q" : t == "b" ? "a" : "z");
    CHECK(repetition_rate(seq) == repetition_rate(relabeled));
    for (std::size_t n = 1; n <= 2; ++n) {
      CHECK(distinct_n(seq, n) > 0.0);
      CHECK(distinct_n(seq, n) <= 1.0);
    }
  }
}

TEST_CASE("fluency_stats: sentence splitting and variation") {
  const std::vector<std::string> same{"one two three four five", "a b c d e.", "x y z w v!"};
  auto f = fluency_stats(same);
  CHECK(f.avg_sentence_length == 5.0);
  CHECK(f.length_variation == 0.0);

  const std::vector<std::string> mixed{"a b c d. e f g h i j."};
  f = fluency_stats(mixed);
  CHECK(f.avg_sentence_length == 5.0);
  CHECK(f.length_variation == doctest::Approx(0.2).epsilon(1e-15));

  const std::vector<std::string> single{"the quick brown fox jumps over dogs"};
  f = fluency_stats(single);
  CHECK(f.avg_sentence_length == 7.0);
  CHECK(f.length_variation == 0.0);
  CHECK(sentence_lengths("hello, world. again") == std::vector<std::size_t>{2, 1});

  const std::vector<std::string> blank{"", "."};
  f = fluency_stats(blank);
  CHECK(f.degenerate);
  CHECK(f.length_variation == 0.0);
  CHECK_THROWS_AS((void)fluency_stats(std::vector<std::string>{}), ContractError);
}

TEST_CASE("perplexity: uniform, perfect, toy and tensor-loss oracle") {
  const auto ds = synthesize_dataset("simple_sentences", 42);
  REQUIRE(ds.vocab.size() == 45);
  const auto uniform = uniform_model(ds.vocab.size());
  CHECK(std::abs(perplexity(*uniform, ds.sequences) - 45.0) < 1e-9);

  CHECK(perplexity_from_probabilities(std::vector<double>{1.0, 1.0, 1.0}) == 1.0);
  CHECK(perplexity_from_probabilities(std::vector<double>{0.5, 0.25}) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-15));
  CHECK_THROWS_AS((void)perplexity(NllTotal{}), ContractError);

  // Pooled NLL equals the token-weighted mean of the autodiff cross-entropy.
  auto c = ModelConfig::defaults(Architecture::Qksan, ds.vocab.size());
  const auto model = create_model(c);
  double weighted = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& seq = ds.sequences[i];
    const std::vector<TokenId> input(seq.begin(), seq.end() - 1), target(seq.begin() + 1, seq.end());
    weighted += cross_entropy(model->forward(input), target).item() * static_cast<double>(target.size());
    count += target.size();
  }
  const std::span<const std::vector<TokenId>> first6(ds.sequences.data(), 6);
  CHECK(perplexity(*model, first6) == doctest::Approx(std::exp(weighted / static_cast<double>(count))).epsilon(1e-12));
  CHECK(perplexity(*model, first6) >= 1.0);

  // PAD targets are not scored.
  std::vector<TokenId> padded = ds.sequences[0];
  padded.push_back(Vocabulary::kPad);
  padded.push_back(Vocabulary::kPad);
  const auto a = sequence_nll(*model, ds.sequences[0]);
  const auto b = sequence_nll(*model, padded);
  CHECK(a.tokens == b.tokens);
  CHECK(a.nll == doctest::Approx(b.nll).epsilon(1e-14));
}

TEST_CASE("aggregate_report: single sample, averaging and fluency") {
  const GenerationSample s{"birds", "birds fly in the sky", "birds sings on the table"};
  const auto one = aggregate_report("QKSAN", "simple_sentences", 3.0, std::vector<GenerationSample>{s});
  const auto score = score_sample(s);
  CHECK(one.bleu == score.bleu);
  CHECK(one.distinct == score.distinct);
  CHECK(one.repetition_rate == score.repetition_rate);
  CHECK(one.bleu[0] == 0.4);
  CHECK(one.perplexity == 3.0);
  CHECK(one.avg_sentence_length == 5.0);
  CHECK(one.samples.size() == 1);

  SampleScore zero, full;
  full.bleu = {1, 1, 1, 1};
  const std::vector<SampleScore> pair{zero, full};
  CHECK(aggregate_report("MLP", "haiku", 1.0, pair).bleu[0] == 0.5);
  CHECK_THROWS_AS((void)aggregate_report("MLP", "haiku", 1.0, std::span<const SampleScore>{}), ContractError);

  const GenerationSample empty{"", "birds fly", ""};
  const auto degenerate = aggregate_report("MLP", "haiku", 1.0, std::vector<GenerationSample>{empty});
  CHECK(degenerate.degenerate_samples == 1);
}

TEST_CASE("report tables: columns, row order, NA cells and averages") {
  std::vector<MetricsReport> reports;
  const std::vector<std::string> models{"MLP", "QASA", "QKSAN", "QRWKV", "Transformer"};
  for (const auto& d : kDatasetNames)
    for (std::size_t m = 0; m < models.size(); ++m) {
      MetricsReport r;
      r.model = models[m];
      r.dataset = d;
      r.perplexity = 1.0 + static_cast<double>(m);
      r.bleu = {0.1 * static_cast<double>(m), 0.05, 0, 0};
      r.distinct = {1.0, 1.0};
      r.repetition_rate = d == "haiku" ? 0.5 : 0.0;
      reports.push_back(r);
    }
  const auto table = dataset_table_csv(reports, "haiku");
  CHECK(table ==
        "Model,Perplexity,BLEU-1,BLEU-2,Distinct-1,Repetition Rate\n"
        "Transformer,5.0000,0.4000,0.0500,1.0000,0.5000\n"
        "QKSAN,3.0000,0.2000,0.0500,1.0000,0.5000\n"
        "QRWKV,4.0000,0.3000,0.0500,1.0000,0.5000\n"
        "QASA,2.0000,0.1000,0.0500,1.0000,0.5000\n"
        "MLP,1.0000,0.0000,0.0500,1.0000,0.5000\n");
  const auto overall = overall_table_csv(reports);
  CHECK(overall ==
        "Model,Perplexity,BLEU-1,Distinct-1,Repetition Rate\n"
        "Transformer,5.0000,0.4000,1.0000,0.1000\n"
        "MLP,1.0000,0.0000,1.0000,0.1000\n"
        "QKSAN,3.0000,0.2000,1.0000,0.1000\n"
        "QASA,2.0000,0.1000,1.0000,0.1000\n"
        "QRWKV,4.0000,0.3000,1.0000,0.1000\n");

  reports[0] = failed_report("MLP", std::string(kDatasetNames[0]), "diverged");
  CHECK(dataset_table_csv(reports, kDatasetNames[0]).find("MLP,NA,NA,NA,NA,NA\n") != std::string::npos);
  CHECK(overall_rows(reports)[1].cells == 4);
}

TEST_CASE("report JSON round trip and ordering") {
  MetricsReport r;
  r.model = "QRWKV";
  r.dataset = "proverbs";
  r.perplexity = 1.2345678901234567;
  r.bleu = {0.1, 0.2, 0.3, 0.4};
  r.distinct = {0.9, 0.8};
  r.repetition_rate = 0.01;
  r.avg_sentence_length = 6.5;
  r.length_variation = 0.125;
  r.samples = {{"actions", "actions speak louder than words", "actions speak"}};
  CHECK(report_from_json(report_to_json(r)) == r);
  auto failed = failed_report("MLP", "haiku", "boom");
  CHECK(report_from_json(report_to_json(failed)) == failed);

  std::vector<MetricsReport> v{r, failed};
  sort_reports(v);
  CHECK(v[0].dataset == "haiku");
  const auto path = std::filesystem::temp_directory_path() / "qtb_reports_test.json";
  write_reports_json(v, path);
  CHECK(read_reports_json(path) == v);
  std::filesystem::remove(path);
  CHECK_THROWS_AS((void)report_from_json(nlohmann::json{{"model", "x"}}), ContractError);
}

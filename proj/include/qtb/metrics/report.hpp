#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qtb/metrics/metrics.hpp"

namespace qtb {

/// One evaluation prompt. `output` is the full candidate text (prompt words
/// followed by generated words).
struct GenerationSample {
  std::string prompt;
  std::string reference;
  std::string output;
  bool operator==(const GenerationSample&) const = default;
};

/// Per-sample scores of a candidate against its reference.
struct SampleScore {
  std::array<double, 4> bleu{};
  std::array<double, 2> distinct{};
  double repetition_rate = 0.0;
  bool degenerate = false;
};

SampleScore score_sample(std::span<const std::string> candidate, std::span<const std::string> reference);
SampleScore score_sample(const GenerationSample& sample);

/// Metrics of one model on one dataset. A failed benchmark cell carries
/// `error` and no scores.
struct MetricsReport {
  std::string model;
  std::string dataset;
  double perplexity = 1.0;
  std::array<double, 4> bleu{};
  std::array<double, 2> distinct{};
  double repetition_rate = 0.0;
  double avg_sentence_length = 0.0;
  double length_variation = 0.0;
  std::size_t degenerate_samples = 0;
  std::vector<GenerationSample> samples;
  std::optional<std::string> error;
  bool operator==(const MetricsReport&) const = default;
};

/// Averages per-sample scores; perplexity is passed in already pooled.
/// Fluency statistics come from the sample outputs. Throws ContractError
/// when `scores` is empty.
MetricsReport aggregate_report(std::string model, std::string dataset, double perplexity, std::span<const SampleScore> scores,
                               std::vector<GenerationSample> samples = {});
/// Scores each sample, then aggregates.
MetricsReport aggregate_report(std::string model, std::string dataset, double perplexity,
                               std::vector<GenerationSample> samples);
MetricsReport failed_report(std::string model, std::string dataset, std::string error);

/// Orders by dataset, then by model name.
void sort_reports(std::vector<MetricsReport>& reports);

nlohmann::json report_to_json(const MetricsReport& report);
/// Throws ContractError on a malformed object.
MetricsReport report_from_json(const nlohmann::json& j);
void write_reports_json(std::span<const MetricsReport> reports, const std::filesystem::path& path);
std::vector<MetricsReport> read_reports_json(const std::filesystem::path& path);

inline constexpr std::array<std::string_view, 6> kDatasetTableColumns{"Model",      "Perplexity", "BLEU-1",
                                                                       "BLEU-2",     "Distinct-1", "Repetition Rate"};
inline constexpr std::array<std::string_view, 5> kOverallTableColumns{"Model", "Perplexity", "BLEU-1", "Distinct-1",
                                                                       "Repetition Rate"};
inline constexpr std::array<std::string_view, 5> kDatasetTableModelOrder{"Transformer", "QKSAN", "QRWKV", "QASA", "MLP"};
inline constexpr std::array<std::string_view, 5> kOverallTableModelOrder{"Transformer", "MLP", "QKSAN", "QASA", "QRWKV"};

/// Mean of the successful cells of one model across datasets.
struct OverallRow {
  std::string model;
  double perplexity = 0.0;
  double bleu1 = 0.0;
  double distinct1 = 0.0;
  double repetition_rate = 0.0;
  std::size_t cells = 0;
};

std::vector<OverallRow> overall_rows(std::span<const MetricsReport> reports);

/// Per-dataset table: one row per model present for `dataset`, in
/// kDatasetTableModelOrder (unlisted models follow by name). Values have four
/// decimals; a failed cell prints NA.
std::string dataset_table_csv(std::span<const MetricsReport> reports, std::string_view dataset);
/// Averages across datasets, rows in kOverallTableModelOrder.
std::string overall_table_csv(std::span<const MetricsReport> reports);

}  // namespace qtb

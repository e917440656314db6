#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qtb/corpus/dataset.hpp"
#include "qtb/harness/evaluation.hpp"
#include "qtb/harness/run_config.hpp"
#include "qtb/harness/training.hpp"
#include "qtb/metrics/report.hpp"

namespace qtb {

/// Seed of matrix cell `index` (dataset-major order).
constexpr std::uint64_t cell_seed(std::uint64_t seed, std::size_t index) { return seed ^ static_cast<std::uint64_t>(index); }

struct CellResult {
  std::size_t index = 0;
  Architecture arch = Architecture::Transformer;
  std::string dataset;
  std::uint64_t seed = 0;
  MetricsReport report;
  std::optional<TrainLog> log;
  double wall_seconds = 0.0;
};

/// A dataset with its train/validation split, shared by every model.
struct PreparedDataset {
  Dataset dataset;
  std::vector<std::vector<TokenId>> train;
  std::vector<std::vector<TokenId>> validation;
};

/// Synthesizes `name` from the run seed and splits it with the same seed.
PreparedDataset prepare_dataset(const RunConfig& config, const std::string& name);

TrainOptions train_options(const RunConfig& config);
EvalOptions eval_options(const RunConfig& config, const Dataset& dataset);

/// Trains and evaluates one model. Failures are captured in the report.
CellResult run_cell(const RunConfig& config, const PreparedDataset& data, Architecture arch, std::size_t index);

struct BenchmarkResult {
  std::vector<CellResult> cells;
  std::vector<MetricsReport> reports() const;
};

using CellCallback = std::function<void(const CellResult&)>;

/// Every configured model on every configured dataset. Cells are independent
/// and may run on `config.jobs` threads; results match serial execution.
BenchmarkResult run_benchmark(const RunConfig& config, const CellCallback& on_cell = {});

/// Writes under `dir`:
///   tables/<dataset>.csv  per-dataset table
///   tables/overall.csv    averages across datasets
///   reports.json          one report per cell
///   train_logs.json       per-cell training trajectories
/// Contents depend only on the run config, never on timing.
void write_benchmark_outputs(const BenchmarkResult& result, const std::filesystem::path& dir);

/// Rewrites the tables from an existing reports.json.
void write_tables(std::span<const MetricsReport> reports, const std::filesystem::path& dir);

}  // namespace qtb

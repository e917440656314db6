#include "qtb/harness/benchmark.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include "qtb/corpus/synthesis.hpp"

namespace qtb {

PreparedDataset prepare_dataset(const RunConfig& config, const std::string& name) {
  PreparedDataset p{synthesize_dataset(name, config.seed), {}, {}};
  const auto split = train_val_split(p.dataset.sequences.size(), config.train_fraction, config.seed);
  p.train = select(p.dataset.sequences, split.train);
  p.validation = select(p.dataset.sequences, split.validation);
  return p;
}

TrainOptions train_options(const RunConfig& config) {
  return {config.epochs, config.patience, config.min_delta, config.batch_size, config.learning_rate};
}

EvalOptions eval_options(const RunConfig& config, const Dataset& dataset) {
  return {config.decode, config.temperature, 0.25, dataset.max_length_words()};
}

CellResult run_cell(const RunConfig& config, const PreparedDataset& data, Architecture arch, std::size_t index) {
  CellResult cell;
  cell.index = index;
  cell.arch = arch;
  cell.dataset = data.dataset.name;
  cell.seed = cell_seed(config.seed, index);
  const auto start = std::chrono::steady_clock::now();
  try {
    auto model = create_model(config.model_config(arch, data.dataset.vocab.size(), cell.seed));
    Rng rng(cell.seed);
    cell.log = train(*model, data.train, data.validation, train_options(config), rng);
    cell.report = evaluate(*model, data.dataset.vocab, data.dataset.name, data.validation, eval_options(config, data.dataset), &rng);
  } catch (const std::exception& e) {
    cell.report = failed_report(architecture_name(arch), data.dataset.name, e.what());
  }
  cell.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

std::vector<MetricsReport> BenchmarkResult::reports() const {
  std::vector<MetricsReport> out;
  for (const auto& c : cells) out.push_back(c.report);
  return out;
}

BenchmarkResult run_benchmark(const RunConfig& config, const CellCallback& on_cell) {
  config.validate();
  std::vector<PreparedDataset> data;
  for (const auto& name : config.datasets) data.push_back(prepare_dataset(config, name));

  const std::size_t n_models = config.models.size();
  BenchmarkResult result;
  result.cells.resize(data.size() * n_models);
  std::atomic<std::size_t> next{0};
  std::mutex callback_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < result.cells.size(); i = next++) {
      result.cells[i] = run_cell(config, data[i / n_models], config.models[i % n_models].arch, i);
      if (on_cell) {
        std::lock_guard lock(callback_mutex);
        on_cell(result.cells[i]);
      }
    }
  };
  const std::size_t threads = std::min(config.jobs, result.cells.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return result;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

void write_tables(std::span<const MetricsReport> reports, const std::filesystem::path& dir) {
  std::vector<std::string> datasets;
  for (const auto& r : reports)
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
  for (const auto& d : datasets) write_text(dir / "tables" / (d + ".csv"), dataset_table_csv(reports, d));
  write_text(dir / "tables" / "overall.csv", overall_table_csv(reports));
}

void write_benchmark_outputs(const BenchmarkResult& result, const std::filesystem::path& dir) {
  const auto reports = result.reports();
  write_tables(reports, dir);
  write_reports_json(reports, dir / "reports.json");
  nlohmann::json logs = nlohmann::json::array();
  for (const auto& c : result.cells)
    logs.push_back({{"model", architecture_name(c.arch)},
                    {"dataset", c.dataset},
                    {"seed", c.seed},
                    {"log", c.log ? train_log_to_json(*c.log) : nlohmann::json(nullptr)}});
  write_text(dir / "train_logs.json", logs.dump(2) + "\n");
}

}  // namespace qtb

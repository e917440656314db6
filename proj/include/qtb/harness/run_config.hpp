#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "qtb/models/config.hpp"
#include "qtb/models/model.hpp"

namespace qtb {

/// Settings shared by training, evaluation and the benchmark matrix.
///
/// JSON form (every key optional):
///   models          [{"arch": "qksan", ...model config keys}]; vocab_size
///                   and seed are filled in per run. Default: all five
///                   architectures at their default sizes.
///   datasets        dataset names. Default: all five.
///   epochs          50
///   patience        10
///   min_delta       1e-6
///   batch_size      8
///   learning_rate   0.001
///   train_fraction  0.8
///   seed            42
///   output_dir      "out"
///   decode          "greedy" | "sample"
///   temperature     1.0
///   jobs            1 (benchmark cells run in parallel)
struct RunConfig {
  std::vector<ModelConfig> models;
  std::vector<std::string> datasets;
  std::size_t epochs = 50;
  std::size_t patience = 10;
  double min_delta = 1e-6;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
  std::filesystem::path output_dir = "out";
  DecodeMode decode = DecodeMode::Greedy;
  double temperature = 1.0;
  std::size_t jobs = 1;

  static RunConfig defaults();
  /// Throws ContractError when a field is out of range or a dataset or
  /// model is unknown.
  void validate() const;
  /// The model entry for `arch`, sized for `vocab_size` and seeded with `seed`.
  ModelConfig model_config(Architecture arch, std::size_t vocab_size, std::uint64_t seed) const;
};

nlohmann::json run_config_to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys throw ContractError.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

DecodeMode parse_decode_mode(const std::string& text);
std::string decode_mode_name(DecodeMode mode);

}  // namespace qtb

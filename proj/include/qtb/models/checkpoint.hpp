#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qtb/corpus/vocabulary.hpp"
#include "qtb/models/model.hpp"
#include "qtb/numerics/adam.hpp"
#include "qtb/numerics/rng.hpp"

namespace qtb {

inline constexpr int kCheckpointFormatVersion = 1;

struct OptimizerState {
  std::int64_t steps = 0;
  std::vector<std::vector<double>> first_moments;
  std::vector<std::vector<double>> second_moments;
};

/// Everything needed to resume training or run inference.
///
/// On disk this is a JSON object:
///   format_version  integer, currently 1
///   config          model config object
///   vocab           id-ordered token strings
///   params          [{name, shape, values}] in registration order
///   optimizer       {steps, m, v} or null
///   epoch           completed epochs
///   rng_state       four unsigned 64-bit words
/// Doubles are written with round-trip precision.
struct Checkpoint {
  ModelConfig config;
  std::vector<std::string> vocab;
  std::vector<std::string> param_names;
  std::vector<Shape> param_shapes;
  std::vector<std::vector<double>> param_values;
  std::optional<OptimizerState> optimizer;
  std::size_t epoch = 0;
  Rng::State rng_state{};
};

Checkpoint make_checkpoint(const LanguageModel& model, const Vocabulary& vocab, const Adam* optimizer = nullptr,
                           std::size_t epoch = 0, Rng::State rng_state = {});
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// Throws ContractError on a version or schema mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rebuilds the model and copies the stored parameter values into it.
std::unique_ptr<LanguageModel> restore_model(const Checkpoint& checkpoint);
void restore_optimizer(const Checkpoint& checkpoint, Adam& optimizer);

}  // namespace qtb

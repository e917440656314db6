#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qtb/corpus/vocabulary.hpp"

namespace qtb {

/// Corpus statistics. `vocab_size` counts the four reserved tokens, so it
/// equals the size of the model output layer.
struct DatasetManifest {
  std::string name;
  std::size_t samples = 0;
  double avg_length_words = 0.0;
  std::size_t vocab_size = 0;
  std::size_t max_length_words = 0;
  std::string description;

  bool operator==(const DatasetManifest&) const = default;
};

struct Dataset {
  std::string name;
  std::vector<std::string> texts;
  Vocabulary vocab;
  /// BOS + word ids + EOS per sample.
  std::vector<std::vector<TokenId>> sequences;
  DatasetManifest manifest;

  /// Tokenises, builds the vocabulary and computes the manifest.
  static Dataset from_texts(std::string name, std::string description, std::vector<std::string> texts);

  std::size_t max_length_words() const { return manifest.max_length_words; }
};

DatasetManifest compute_manifest(const std::string& name, const std::string& description,
                                 const std::vector<std::string>& texts);

/// Writes `<dir>/<name>.txt` (one sample per line) and `<dir>/<name>.manifest.json`.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);
/// Reads a dataset back and verifies the manifest against the content.
Dataset read_dataset(const std::filesystem::path& dir, const std::string& name);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Seeded shuffle then cut at round(fraction * n), keeping both sides non-empty.
Split train_val_split(std::size_t samples, double fraction, std::uint64_t seed);

std::vector<std::vector<TokenId>> select(const std::vector<std::vector<TokenId>>& sequences,
                                         const std::vector<std::size_t>& indices);

}  // namespace qtb

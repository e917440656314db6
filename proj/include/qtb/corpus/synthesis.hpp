#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qtb/corpus/dataset.hpp"

namespace qtb {

/// Target statistics for one synthesized corpus. `vocab_size` includes the
/// four reserved tokens.
struct DatasetTarget {
  std::string name;
  std::string description;
  std::size_t samples = 0;
  double avg_length_words = 0.0;
  std::size_t vocab_size = 0;
  std::size_t max_length_words = 0;
};

/// Template grammar. Template items in upper case name a word category;
/// anything else is a literal word. `required` templates are emitted exactly
/// once each (reference sentences live here).
struct Grammar {
  std::map<std::string, std::vector<std::string>> categories;
  std::vector<std::string> templates;
  std::vector<std::string> required;
};

inline const std::vector<std::string> kDatasetNames{"simple_sentences", "short_stories", "quantum_phrases", "haiku",
                                                    "proverbs"};

const std::vector<DatasetTarget>& dataset_targets();
const DatasetTarget& dataset_target(const std::string& name);
Grammar dataset_grammar(const std::string& name);

/// Samples `target.samples` sentences from `grammar` so that the sample count,
/// total word count, max length and vocabulary size hit the target exactly.
/// Throws GenerationError naming the statistic that could not be met.
std::vector<std::string> generate_texts(const Grammar& grammar, const DatasetTarget& target, std::uint64_t seed);

Dataset synthesize_dataset(const std::string& name, std::uint64_t seed);
std::vector<Dataset> synthesize_datasets(std::uint64_t seed);

}  // namespace qtb

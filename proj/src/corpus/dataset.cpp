#include "qtb/corpus/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "qtb/errors.hpp"
#include "qtb/numerics/rng.hpp"

namespace qtb {

using nlohmann::json;

DatasetManifest compute_manifest(const std::string& name, const std::string& description,
                                 const std::vector<std::string>& texts) {
  DatasetManifest m;
  m.name = name;
  m.description = description;
  m.samples = texts.size();
  std::size_t total = 0;
  for (const auto& t : texts) {
    const auto n = tokenize(t).size();
    total += n;
    m.max_length_words = std::max(m.max_length_words, n);
  }
  m.avg_length_words = texts.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(texts.size());
  m.vocab_size = Vocabulary::build(texts).size();
  return m;
}

Dataset Dataset::from_texts(std::string name, std::string description, std::vector<std::string> texts) {
  Dataset d;
  d.manifest = compute_manifest(name, description, texts);
  d.name = std::move(name);
  d.vocab = Vocabulary::build(texts);
  for (const auto& t : texts) {
    std::vector<TokenId> seq{Vocabulary::kBos};
    for (TokenId id : d.vocab.encode(t)) seq.push_back(id);
    seq.push_back(Vocabulary::kEos);
    d.sequences.push_back(std::move(seq));
  }
  d.texts = std::move(texts);
  return d;
}

namespace {

json manifest_json(const DatasetManifest& m) {
  json j;
  j["name"] = m.name;
  j["samples"] = m.samples;
  j["avg_length_words"] = m.avg_length_words;
  j["vocab_size"] = m.vocab_size;
  j["max_length_words"] = m.max_length_words;
  j["description"] = m.description;
  return j;
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  m.name = j.at("name").get<std::string>();
  m.samples = j.at("samples").get<std::size_t>();
  m.avg_length_words = j.at("avg_length_words").get<double>();
  m.vocab_size = j.at("vocab_size").get<std::size_t>();
  m.max_length_words = j.at("max_length_words").get<std::size_t>();
  m.description = j.at("description").get<std::string>();
  return m;
}

}  // namespace

void write_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / (dataset.name + ".txt"), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / (dataset.name + ".txt")).string());
    for (const auto& t : dataset.texts) out << t << '\n';
  }
  std::ofstream out(dir / (dataset.name + ".manifest.json"), std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / (dataset.name + ".manifest.json")).string());
  out << manifest_json(dataset.manifest).dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& dir, const std::string& name) {
  const auto text_path = dir / (name + ".txt");
  const auto manifest_path = dir / (name + ".manifest.json");
  std::ifstream in(text_path, std::ios::binary);
  if (!in) throw std::runtime_error("dataset file not found: " + text_path.string());
  std::vector<std::string> texts;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) texts.push_back(line);
  }
  std::ifstream min(manifest_path, std::ios::binary);
  if (!min) throw std::runtime_error("manifest not found: " + manifest_path.string());
  const auto stored = manifest_from_json(json::parse(min));
  auto dataset = Dataset::from_texts(name, stored.description, std::move(texts));
  if (!(dataset.manifest == stored)) {
    throw ContractError("dataset '" + name + "': manifest does not match content");
  }
  return dataset;
}

Split train_val_split(std::size_t samples, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw SplitError("train fraction must lie in (0, 1)");
  if (samples < 2) throw SplitError("need at least 2 samples to split, got " + std::to_string(samples));
  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  auto cut = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(samples)));
  cut = std::clamp<std::size_t>(cut, 1, samples - 1);
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  return s;
}

std::vector<std::vector<TokenId>> select(const std::vector<std::vector<TokenId>>& sequences,
                                         const std::vector<std::size_t>& indices) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(indices.size());
  for (auto i : indices) {
    if (i >= sequences.size()) throw IndexError("sample index " + std::to_string(i) + " out of range");
    out.push_back(sequences[i]);
  }
  return out;
}

}  // namespace qtb

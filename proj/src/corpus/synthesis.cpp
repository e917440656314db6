#include "qtb/corpus/synthesis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "qtb/errors.hpp"
#include "qtb/numerics/rng.hpp"

namespace qtb {

namespace {

constexpr int kMaxAttempts = 400;
constexpr int kMaxRedraws = 60;

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

bool is_category(const std::string& item) {
  return std::all_of(item.begin(), item.end(), [](char c) { return std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)); });
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::vector<std::string> cross(const std::vector<std::vector<std::string>>& parts) {
  std::vector<std::string> acc{""};
  for (const auto& options : parts) {
    std::vector<std::string> next;
    for (const auto& prefix : acc)
      for (const auto& opt : options) next.push_back(prefix.empty() ? opt : opt.empty() ? prefix : prefix + " " + opt);
    acc = std::move(next);
  }
  return acc;
}

Grammar simple_sentences() {
  Grammar g;
  g.categories = {
      {"DET", {"the", "a"}},
      {"NOUN", {"cat", "dog", "bird", "woman", "man", "child"}},
      {"NOUNS", {"birds", "cats", "dogs", "children"}},
      {"VERB", {"sits", "runs", "walks", "sleeps", "sings", "dances"}},
      {"VERBP", {"fly", "sing", "run", "play"}},
      {"PREP", {"in", "on", "by", "across", "through", "under"}},
      {"PLACE", {"sky", "river", "table", "forest", "park", "garden"}},
      {"ADJ", {"small", "old", "happy", "big"}},
      {"ADV", {"fast", "loudly", "quietly"}},
  };
  g.templates = {
      "NOUNS VERBP ADV",
      "DET NOUN VERB ADV",
      "NOUNS VERBP PREP DET PLACE",
      "DET ADJ NOUN VERB ADV",
      "DET NOUN VERB PREP DET PLACE",
      "NOUNS VERBP ADV PREP DET PLACE",
      "DET ADJ NOUN VERB PREP DET PLACE",
      "ADJ NOUNS VERBP ADV PREP DET PLACE",
  };
  g.required = {"birds fly in the sky"};
  return g;
}

Grammar short_stories() {
  Grammar g;
  g.categories = {
      {"DET", {"the", "a"}},
      {"ADJ", {"old", "young", "little", "brave", "quiet", "tired"}},
      {"NOUN", {"man", "girl", "boy", "woman", "fisherman", "farmer", "king"}},
      {"MOVED", {"walked", "ran", "wandered", "sailed", "climbed", "returned"}},
      {"PREP", {"to", "into", "across", "through", "along"}},
      {"PLACE", {"market", "forest", "village", "river", "hill", "castle", "harbor", "garden"}},
      {"CONJ", {"and", "but", "then"}},
      {"ACTED", {"found", "bought", "saw", "lost", "carried", "opened"}},
      {"OBJ", {"key", "bread", "lantern", "letter", "map", "door", "basket", "flower"}},
      {"OBJADJ", {"golden", "fresh", "strange", "hidden", "broken", "wooden"}},
      {"PRON", {"he", "she", "they"}},
      {"FELT", {"smiled", "wept", "laughed", "slept", "sang", "waited"}},
      {"ADV", {"softly", "quietly", "alone", "happily"}},
      {"TIME", {"morning", "night", "evening"}},
  };
  g.templates = cross({
      {"", "one TIME"},
      {"DET ADJ NOUN MOVED PREP DET PLACE", "DET NOUN MOVED PREP DET PLACE"},
      {"CONJ PRON ACTED DET OBJADJ OBJ", "CONJ PRON FELT ADV", "CONJ ACTED DET OBJ",
       "CONJ PRON FELT ADV PREP DET PLACE", "CONJ PRON ACTED DET OBJADJ OBJ PREP DET PLACE"},
  });
  return g;
}

Grammar quantum_phrases() {
  Grammar g;
  g.categories = {
      {"TOPIC", {"superposition", "entanglement", "interference", "decoherence", "tunneling", "measurement", "teleportation"}},
      {"VERB", {"allows", "creates", "links", "destroys", "enables", "encodes", "protects"}},
      {"ADJ", {"multiple", "distant", "fragile", "coherent", "parallel", "hidden", "entangled"}},
      {"THINGS", {"states", "qubits", "particles", "amplitudes", "gates", "circuits", "errors", "photons", "spins", "bits"}},
      {"PREP", {"across", "in", "between", "through", "with"}},
      {"DEVICE", {"computer", "processor", "algorithm", "register", "simulator"}},
      {"SIZE", {"noisy", "large", "small", "universal"}},
      {"ACTS", {"runs", "searches", "factors", "measures", "corrects"}},
      {"ADV", {"faster", "efficiently", "reliably", "exponentially"}},
  };
  g.templates = {
      "quantum TOPIC VERB ADJ THINGS",
      "TOPIC VERB ADJ THINGS PREP THINGS",
      "quantum TOPIC VERB ADJ THINGS PREP THINGS",
      "a SIZE quantum DEVICE ACTS ADJ THINGS ADV",
      "the quantum DEVICE ACTS THINGS PREP ADJ THINGS ADV",
      "TOPIC of THINGS VERB ADJ THINGS PREP a quantum DEVICE",
      "the SIZE quantum DEVICE ACTS ADJ THINGS ADV PREP ADJ THINGS",
      "the quantum TOPIC of ADJ THINGS VERB THINGS PREP the ADJ THINGS",
  };
  g.required = {"quantum superposition allows multiple states"};
  return g;
}

Grammar haiku() {
  Grammar g;
  g.categories = {
      {"ADJ", {"ancient", "silent", "cold", "quiet", "golden", "pale", "lonely", "gentle", "distant", "misty", "frozen"}},
      {"NOUN", {"pond", "frog", "moon", "crow", "wind", "river", "mountain", "leaf", "snow", "rain", "bell", "heron", "willow"}},
      {"VERB", {"ripples", "jumps", "drifts", "falls", "sleeps", "whispers", "glows", "sings", "waits", "trembles"}},
      {"PREP", {"beneath", "into", "over", "across", "through", "under", "along"}},
      {"PLACE", {"moonlight", "water", "stones", "clouds", "branches", "meadow", "shadows", "hills", "darkness", "twilight"}},
      {"NOUNS", {"petals", "leaves", "stars", "waves", "fireflies", "snowflakes", "cranes", "dewdrops"}},
      {"VERBP", {"drift", "fall", "dance", "scatter", "shimmer", "glide", "rest", "fade"}},
      {"ADV", {"slowly", "softly", "quietly", "alone", "again", "still", "forever"}},
      {"SEASON", {"autumn", "spring", "winter", "summer", "evening", "dawn", "midnight"}},
  };
  // Three lines of 5, 7 and 5 words.
  const std::vector<std::string> first{"ADJ NOUN VERB PREP PLACE", "NOUNS VERBP PREP the PLACE"};
  const std::vector<std::string> second{"the NOUN VERB PREP the ADJ PLACE", "ADJ NOUNS VERBP ADV PREP the PLACE"};
  const std::vector<std::string> third{"NOUNS VERBP ADV in SEASON", "the ADJ NOUN VERB ADV"};
  g.templates = cross({first, second, third});
  g.required = cross({{"cherry blossoms fall PREP PLACE"}, {second[0]}, {third[0]}});
  return g;
}

Grammar proverbs() {
  Grammar g;
  g.categories = {
      {"NOUNS", {"actions", "words", "deeds", "friends", "promises", "dreams"}},
      {"VERBP", {"speak", "matter", "last", "grow"}},
      {"MORE", {"louder", "stronger", "longer", "better"}},
      {"ADJ", {"rolling", "early", "silver", "best", "old", "wise", "patient"}},
      {"NOUN", {"stone", "bird", "cloud", "moss", "worm", "lining", "knowledge", "power", "patience", "time", "key",
                "wisdom", "teacher", "friend", "heart"}},
      {"VERB", {"gathers", "catches", "has", "finds", "speaks", "keeps"}},
  };
  g.templates = {
      "NOUNS VERBP MORE than NOUNS",
      "NOUNS VERBP MORE than ADJ NOUNS",
      "a ADJ NOUN VERB no NOUN",
      "the ADJ NOUN VERB the NOUN",
      "NOUN is the NOUN of NOUN",
      "NOUN is the ADJ NOUN of NOUN",
      "the ADJ NOUN VERB the NOUN of NOUN",
      "a ADJ NOUN VERB MORE than the ADJ NOUN",
  };
  g.required = {"actions speak louder than words"};
  return g;
}

struct Sample {
  std::vector<std::string> items;
  bool locked = false;
};

// Changes unlocked samples' templates until the total length equals `total`.
bool balance_lengths(std::vector<Sample>& samples, const std::vector<std::vector<std::string>>& templates,
                     std::size_t total, Rng& rng) {
  auto sum = [&] {
    std::size_t s = 0;
    for (const auto& x : samples) s += x.items.size();
    return s;
  };
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!samples[i].locked) free.push_back(i);
  if (free.empty()) return sum() == total;
  for (int iter = 0; iter < 20000; ++iter) {
    const std::size_t current = sum();
    if (current == total) return true;
    const auto i = free[rng.below(free.size())];
    const auto len = static_cast<long>(samples[i].items.size());
    const long wanted = len + static_cast<long>(total) - static_cast<long>(current);
    // Closest template length that moves in the right direction.
    std::vector<std::size_t> best;
    long best_gap = -1;
    for (std::size_t t = 0; t < templates.size(); ++t) {
      const auto tl = static_cast<long>(templates[t].size());
      if ((wanted > len && tl <= len) || (wanted < len && tl >= len)) continue;
      const long gap = std::labs(tl - wanted);
      if (best_gap < 0 || gap < best_gap) {
        best_gap = gap;
        best.clear();
      }
      if (gap == best_gap) best.push_back(t);
    }
    if (best.empty()) continue;
    samples[i].items = templates[best[rng.below(best.size())]];
  }
  return sum() == total;
}

std::string fill(const std::vector<std::string>& items, const Grammar& g, std::set<std::string>& used, bool prefer_unused,
                 Rng& rng) {
  std::vector<std::string> words;
  for (const auto& item : items) {
    if (!is_category(item)) {
      words.push_back(item);
      continue;
    }
    const auto& pool = g.categories.at(item);
    std::vector<const std::string*> fresh;
    if (prefer_unused)
      for (const auto& w : pool)
        if (!used.count(w)) fresh.push_back(&w);
    words.push_back(fresh.empty() ? pool[rng.below(pool.size())] : *fresh[rng.below(fresh.size())]);
  }
  for (const auto& w : words) used.insert(w);
  return join(words);
}

}  // namespace

const std::vector<DatasetTarget>& dataset_targets() {
  static const std::vector<DatasetTarget> targets{
      {"simple_sentences", "Basic sentence structures", 50, 5.2, 45, 7},
      {"short_stories", "Narrative text segments", 25, 12.8, 78, 18},
      {"quantum_phrases", "Domain-specific terminology", 30, 8.4, 62, 12},
      {"haiku", "Structured poetry format", 20, 17.0, 89, 17},
      {"proverbs", "Wisdom and cultural texts", 15, 6.8, 52, 9},
  };
  return targets;
}

const DatasetTarget& dataset_target(const std::string& name) {
  for (const auto& t : dataset_targets())
    if (t.name == name) return t;
  throw ContractError("unknown dataset '" + name + "'");
}

Grammar dataset_grammar(const std::string& name) {
  if (name == "simple_sentences") return simple_sentences();
  if (name == "short_stories") return short_stories();
  if (name == "quantum_phrases") return quantum_phrases();
  if (name == "haiku") return haiku();
  if (name == "proverbs") return proverbs();
  throw ContractError("unknown dataset '" + name + "'");
}

std::vector<std::string> generate_texts(const Grammar& grammar, const DatasetTarget& target, std::uint64_t seed) {
  std::vector<std::vector<std::string>> templates;
  for (const auto& t : grammar.templates) templates.push_back(split_words(t));
  if (templates.empty() || target.samples < grammar.required.size()) throw GenerationError("grammar cannot produce samples");
  const auto total_words = static_cast<std::size_t>(std::llround(target.avg_length_words * static_cast<double>(target.samples)));

  Rng rng(seed);
  std::string violated = "samples";
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Sample> samples;
    for (const auto& r : grammar.required) samples.push_back({split_words(r), true});
    while (samples.size() < target.samples) samples.push_back({templates[rng.below(templates.size())], false});

    const bool has_max = std::any_of(samples.begin(), samples.end(),
                                     [&](const Sample& s) { return s.items.size() == target.max_length_words; });
    if (!has_max) {
      std::vector<std::size_t> longest;
      for (std::size_t t = 0; t < templates.size(); ++t)
        if (templates[t].size() == target.max_length_words) longest.push_back(t);
      if (longest.empty()) throw GenerationError(target.name + ": no template reaches max_length_words");
      auto& s = samples[grammar.required.size() + rng.below(samples.size() - grammar.required.size())];
      s.items = templates[longest[rng.below(longest.size())]];
      s.locked = true;
    }
    if (!balance_lengths(samples, templates, total_words, rng)) {
      violated = "avg_length_words";
      continue;
    }

    // Required samples first, then the rest in random order, each preferring
    // words not used yet so every pool word appears somewhere.
    std::vector<std::size_t> order(samples.size() - grammar.required.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = grammar.required.size() + i;
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<std::string> texts(samples.size());
    std::set<std::string> used, seen;
    bool duplicate = false;
    for (std::size_t i = 0; i < grammar.required.size(); ++i) {
      texts[i] = fill(samples[i].items, grammar, used, true, rng);
      seen.insert(texts[i]);
    }
    for (auto i : order) {
      auto text = fill(samples[i].items, grammar, used, true, rng);
      for (int r = 0; r < kMaxRedraws && seen.count(text); ++r) text = fill(samples[i].items, grammar, used, false, rng);
      if (seen.count(text)) {
        duplicate = true;
        break;
      }
      seen.insert(text);
      texts[i] = std::move(text);
    }
    if (duplicate) {
      violated = "samples (distinct sentences)";
      continue;
    }
    const auto m = compute_manifest(target.name, target.description, texts);
    if (m.vocab_size != target.vocab_size) {
      violated = "vocab_size";
      continue;
    }
    if (m.max_length_words != target.max_length_words) {
      violated = "max_length_words";
      continue;
    }
    rng.shuffle(std::span<std::string>(texts));
    return texts;
  }
  throw GenerationError(target.name + ": could not satisfy " + violated + " after " + std::to_string(kMaxAttempts) +
                        " attempts");
}

Dataset synthesize_dataset(const std::string& name, std::uint64_t seed) {
  const auto& target = dataset_target(name);
  // Each corpus draws from its own stream so adding one never shifts another.
  std::uint64_t h = seed;
  for (char c : name) h = h * 1099511628211ULL ^ static_cast<unsigned char>(c);
  auto texts = generate_texts(dataset_grammar(name), target, h);
  return Dataset::from_texts(name, target.description, std::move(texts));
}

std::vector<Dataset> synthesize_datasets(std::uint64_t seed) {
  std::vector<Dataset> out;
  for (const auto& name : kDatasetNames) out.push_back(synthesize_dataset(name, seed));
  return out;
}

}  // namespace qtb

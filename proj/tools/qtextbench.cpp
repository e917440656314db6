// Command-line front end: corpus synthesis, training, generation, evaluation
// and the benchmark matrix. Exit codes: 0 success, 1 usage error, 2 runtime
// failure.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>

#include "CLI11.hpp"
#include "qtb/corpus/synthesis.hpp"
#include "qtb/errors.hpp"
#include "qtb/harness/benchmark.hpp"
#include "qtb/models/checkpoint.hpp"

using namespace qtb;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string model;
  std::string dataset;
  std::string decode;
  double temperature = 1.0;
  std::size_t epochs = 0;
  std::size_t jobs = 0;
  std::string prompt;
  std::size_t max_new = 16;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* temp_opt = nullptr;
};

RunConfig run_config(const Flags& f) {
  RunConfig c;
  try {
    c = f.config.empty() ? RunConfig::defaults() : load_run_config(f.config);
    if (f.seed_opt != nullptr && f.seed_opt->count() > 0) c.seed = f.seed;
    if (!f.out.empty()) c.output_dir = f.out;
    if (!f.decode.empty()) c.decode = parse_decode_mode(f.decode);
    if (f.temp_opt != nullptr && f.temp_opt->count() > 0) c.temperature = f.temperature;
    if (f.epochs > 0) c.epochs = f.epochs;
    if (f.jobs > 0) c.jobs = f.jobs;
    c.validate();
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  return c;
}

Architecture model_flag(const Flags& f) {
  try {
    return parse_architecture(f.model);
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
}

std::string dataset_flag(const Flags& f) {
  if (std::find(kDatasetNames.begin(), kDatasetNames.end(), f.dataset) == kDatasetNames.end())
    throw UsageError("unknown dataset '" + f.dataset + "'");
  return f.dataset;
}

fs::path checkpoint_path(const RunConfig& c, Architecture arch, const std::string& dataset) {
  return c.output_dir / "checkpoints" / (architecture_tag(arch) + "_" + dataset + ".json");
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

int cmd_synth(const Flags& f) {
  const auto c = run_config(f);
  const auto dir = c.output_dir / "data";
  std::vector<std::string> names(kDatasetNames.begin(), kDatasetNames.end());
  if (!f.dataset.empty()) names = {dataset_flag(f)};
  for (const auto& name : names) {
    const auto ds = synthesize_dataset(name, c.seed);
    write_dataset(ds, dir);
    const auto& m = ds.manifest;
    std::cout << name << ": " << m.samples << " samples, avg " << fmt(m.avg_length_words, 2) << " words, vocab "
              << m.vocab_size << ", max " << m.max_length_words << '\n';
  }
  std::cout << "wrote " << dir.string() << '\n';
  return 0;
}

int cmd_train(const Flags& f) {
  const auto c = run_config(f);
  const auto arch = model_flag(f);
  const auto data = prepare_dataset(c, dataset_flag(f));
  auto model = create_model(c.model_config(arch, data.dataset.vocab.size(), c.seed));
  Adam opt(model->parameters().tensors(), AdamOptions{c.learning_rate});
  Rng rng(c.seed);
  const auto log = train(*model, data.train, data.validation, train_options(c), rng, &opt,
                         [&](std::size_t epoch, const TrainLog& l) {
                           std::cerr << "epoch " << epoch << "/" << c.epochs << " train " << fmt(l.train_loss.back())
                                     << " val " << fmt(l.val_loss.back()) << '\n';
                         });
  const auto ckpt = checkpoint_path(c, arch, data.dataset.name);
  save_checkpoint(make_checkpoint(*model, data.dataset.vocab, &opt, log.stop_epoch, rng.state()), ckpt);
  const auto log_path = c.output_dir / "logs" / (architecture_tag(arch) + "_" + data.dataset.name + ".json");
  write_json(log_path, {{"run_config", run_config_to_json(c)}, {"log", train_log_to_json(log)}});
  std::cout << architecture_name(arch) << " on " << data.dataset.name << ": "
            << (log.stop_reason == StopReason::Completed ? "completed" : "early-stopped") << " after " << log.stop_epoch
            << " epochs, best val loss " << fmt(log.best_val_loss) << " (epoch " << log.best_epoch << ")\n"
            << "checkpoint " << ckpt.string() << '\n';
  return 0;
}

std::unique_ptr<LanguageModel> load_model(const RunConfig& c, Architecture arch, const std::string& dataset,
                                          Vocabulary& vocab) {
  const auto path = checkpoint_path(c, arch, dataset);
  if (!fs::exists(path)) throw std::runtime_error("no checkpoint at " + path.string() + " (run train first)");
  const auto ck = load_checkpoint(path);
  vocab = Vocabulary::from_tokens(ck.vocab);
  return restore_model(ck);
}

int cmd_generate(const Flags& f) {
  const auto c = run_config(f);
  const auto arch = model_flag(f);
  Vocabulary vocab;
  const auto model = load_model(c, arch, dataset_flag(f), vocab);
  std::vector<TokenId> prompt{Vocabulary::kBos};
  for (auto id : vocab.encode(f.prompt)) prompt.push_back(id);
  Rng rng(c.seed);
  const auto out = generate(*model, prompt, DecodeOptions{c.decode, c.temperature, f.max_new}, &rng);
  std::cout << vocab.decode(out) << '\n';
  return 0;
}

int cmd_evaluate(const Flags& f) {
  const auto c = run_config(f);
  const auto arch = model_flag(f);
  const auto data = prepare_dataset(c, dataset_flag(f));
  Vocabulary vocab;
  const auto model = load_model(c, arch, data.dataset.name, vocab);
  if (vocab.tokens() != data.dataset.vocab.tokens())
    throw std::runtime_error("checkpoint vocabulary differs from the dataset synthesized with seed " +
                             std::to_string(c.seed));
  Rng rng(c.seed);
  const auto report = evaluate(*model, vocab, data.dataset.name, data.validation, eval_options(c, data.dataset), &rng);
  const auto path = c.output_dir / "reports" / (architecture_tag(arch) + "_" + data.dataset.name + ".json");
  write_reports_json(std::span(&report, 1), path);
  std::cout << "perplexity " << fmt(report.perplexity) << "\nBLEU-1 " << fmt(report.bleu[0]) << "\nBLEU-2 "
            << fmt(report.bleu[1]) << "\nDistinct-1 " << fmt(report.distinct[0]) << "\nDistinct-2 "
            << fmt(report.distinct[1]) << "\nRepetition Rate " << fmt(report.repetition_rate)
            << "\nAvg sentence length " << fmt(report.avg_sentence_length) << "\nLength variation "
            << fmt(report.length_variation) << "\nreport " << path.string() << '\n';
  return 0;
}

int cmd_benchmark(const Flags& f) {
  const auto c = run_config(f);
  const auto result = run_benchmark(c, [&](const CellResult& cell) {
    std::cerr << "[" << cell.index + 1 << "/" << c.models.size() * c.datasets.size() << "] "
              << architecture_name(cell.arch) << " on " << cell.dataset << ": "
              << (cell.report.error ? "FAILED " + *cell.report.error : "ppl " + fmt(cell.report.perplexity)) << " ("
              << fmt(cell.wall_seconds, 1) << "s)\n";
  });
  write_benchmark_outputs(result, c.output_dir);
  std::cout << overall_table_csv(result.reports());
  std::size_t failed = 0;
  for (const auto& cell : result.cells) failed += cell.report.error ? 1 : 0;
  if (failed > 0) std::cerr << failed << " cell(s) failed; see reports.json\n";
  std::cout << "wrote " << (c.output_dir / "tables").string() << '\n';
  return 0;
}

int cmd_report(const Flags& f) {
  const auto c = run_config(f);
  const auto path = c.output_dir / "reports.json";
  if (!fs::exists(path)) throw std::runtime_error("no reports at " + path.string() + " (run benchmark first)");
  const auto reports = read_reports_json(path);
  write_tables(reports, c.output_dir);
  std::vector<std::string> datasets;
  for (const auto& r : reports)
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
  for (const auto& d : datasets) std::cout << "# " << d << '\n' << dataset_table_csv(reports, d) << '\n';
  std::cout << "# overall\n" << overall_table_csv(reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark of quantum-inspired and classical text generators on small corpora", "qtextbench"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "Run config JSON file")->check(CLI::ExistingFile);
    auto* seed = sub->add_option("--seed", f.seed, "Master seed (default 42)");
    sub->add_option("--out", f.out, "Output directory (default out)");
    return seed;
  };
  auto model_opt = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--model", f.model, "transformer | mlp | qksan | qasa | qrwkv");
    if (required) o->required();
  };
  auto dataset_opt = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--dataset", f.dataset, "simple_sentences | short_stories | quantum_phrases | haiku | proverbs");
    if (required) o->required();
  };
  auto decode_opts = [&](CLI::App* sub) {
    sub->add_option("--decode", f.decode, "greedy | sample");
    return sub->add_option("--temp", f.temperature, "Sampling temperature");
  };

  std::map<CLI::App*, std::pair<CLI::Option*, CLI::Option*>> opts;
  auto* synth = app.add_subcommand("synth-data", "Synthesize the five corpora into <out>/data");
  opts[synth] = {common(synth), nullptr};
  dataset_opt(synth, false);

  auto* train_cmd = app.add_subcommand("train", "Train one model on one dataset and write a checkpoint");
  opts[train_cmd] = {common(train_cmd), nullptr};
  model_opt(train_cmd, true);
  dataset_opt(train_cmd, true);
  train_cmd->add_option("--epochs", f.epochs, "Epoch budget (default 50)");

  auto* gen = app.add_subcommand("generate", "Continue a prompt with a trained checkpoint");
  opts[gen] = {common(gen), nullptr};
  model_opt(gen, true);
  dataset_opt(gen, true);
  opts[gen].second = decode_opts(gen);
  gen->add_option("--prompt", f.prompt, "Prompt text (default: empty)");
  gen->add_option("--max-new", f.max_new, "Maximum generated tokens (default 16)");

  auto* eval = app.add_subcommand("evaluate", "Score a trained checkpoint on its validation split");
  opts[eval] = {common(eval), nullptr};
  model_opt(eval, true);
  dataset_opt(eval, true);
  opts[eval].second = decode_opts(eval);

  auto* bench = app.add_subcommand("benchmark", "Train and evaluate every model on every dataset");
  opts[bench] = {common(bench), nullptr};
  opts[bench].second = decode_opts(bench);
  bench->add_option("--epochs", f.epochs, "Epoch budget (default 50)");
  bench->add_option("--jobs", f.jobs, "Cells run in parallel (default 1)");

  auto* report = app.add_subcommand("report", "Rebuild tables from <out>/reports.json");
  opts[report] = {common(report), nullptr};

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (auto& [sub, o] : opts)
      if (sub->parsed()) {
        f.seed_opt = o.first;
        f.temp_opt = o.second;
      }
    if (synth->parsed()) return cmd_synth(f);
    if (train_cmd->parsed()) return cmd_train(f);
    if (gen->parsed()) return cmd_generate(f);
    if (eval->parsed()) return cmd_evaluate(f);
    if (bench->parsed()) return cmd_benchmark(f);
    if (report->parsed()) return cmd_report(f);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\nrun with --help for usage\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

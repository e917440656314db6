#include "qtb/metrics/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "qtb/errors.hpp"

namespace qtb {

using nlohmann::json;

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

template <std::size_t N>
std::size_t order_index(const std::array<std::string_view, N>& order, const std::string& model) {
  return static_cast<std::size_t>(std::find(order.begin(), order.end(), model) - order.begin());
}

template <std::size_t N>
void sort_by_order(std::vector<std::string>& models, const std::array<std::string_view, N>& order) {
  std::sort(models.begin(), models.end(), [&](const std::string& a, const std::string& b) {
    const auto ia = order_index(order, a), ib = order_index(order, b);
    return ia != ib ? ia < ib : a < b;
  });
}

template <std::size_t N>
std::string header(const std::array<std::string_view, N>& columns) {
  std::string out;
  for (std::size_t i = 0; i < N; ++i) {
    if (i) out += ',';
    out += columns[i];
  }
  return out + '\n';
}

}  // namespace

SampleScore score_sample(std::span<const std::string> candidate, std::span<const std::string> reference) {
  SampleScore s;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto b = bleu(candidate, reference, n);
    s.bleu[n - 1] = b.value;
    s.degenerate = s.degenerate || b.degenerate;
  }
  for (std::size_t n = 1; n <= 2; ++n) s.distinct[n - 1] = distinct_n(candidate, n);
  s.repetition_rate = repetition_rate(candidate);
  return s;
}

SampleScore score_sample(const GenerationSample& sample) {
  const auto candidate = tokenize(sample.output);
  const auto reference = tokenize(sample.reference);
  return score_sample(candidate, reference);
}

MetricsReport aggregate_report(std::string model, std::string dataset, double perplexity, std::span<const SampleScore> scores,
                               std::vector<GenerationSample> samples) {
  if (scores.empty()) throw ContractError("aggregate_report: no sample scores");
  MetricsReport r;
  r.model = std::move(model);
  r.dataset = std::move(dataset);
  r.perplexity = perplexity;
  const double n = static_cast<double>(scores.size());
  for (const auto& s : scores) {
    for (std::size_t i = 0; i < 4; ++i) r.bleu[i] += s.bleu[i] / n;
    for (std::size_t i = 0; i < 2; ++i) r.distinct[i] += s.distinct[i] / n;
    r.repetition_rate += s.repetition_rate / n;
    r.degenerate_samples += s.degenerate ? 1 : 0;
  }
  if (!samples.empty()) {
    std::vector<std::string> outputs;
    for (const auto& s : samples) outputs.push_back(s.output);
    const auto fluency = fluency_stats(outputs);
    r.avg_sentence_length = fluency.avg_sentence_length;
    r.length_variation = fluency.length_variation;
  }
  r.samples = std::move(samples);
  return r;
}

MetricsReport aggregate_report(std::string model, std::string dataset, double perplexity,
                               std::vector<GenerationSample> samples) {
  std::vector<SampleScore> scores;
  for (const auto& s : samples) scores.push_back(score_sample(s));
  return aggregate_report(std::move(model), std::move(dataset), perplexity, scores, std::move(samples));
}

MetricsReport failed_report(std::string model, std::string dataset, std::string error) {
  MetricsReport r;
  r.model = std::move(model);
  r.dataset = std::move(dataset);
  r.error = std::move(error);
  return r;
}

void sort_reports(std::vector<MetricsReport>& reports) {
  std::stable_sort(reports.begin(), reports.end(), [](const MetricsReport& a, const MetricsReport& b) {
    return a.dataset != b.dataset ? a.dataset < b.dataset : a.model < b.model;
  });
}

json report_to_json(const MetricsReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples) samples.push_back({{"prompt", s.prompt}, {"reference", s.reference}, {"output", s.output}});
  return json{{"model", r.model},
              {"dataset", r.dataset},
              {"perplexity", r.perplexity},
              {"bleu", r.bleu},
              {"distinct", r.distinct},
              {"repetition_rate", r.repetition_rate},
              {"avg_sentence_length", r.avg_sentence_length},
              {"length_variation", r.length_variation},
              {"degenerate_samples", r.degenerate_samples},
              {"samples", samples},
              {"error", r.error ? json(*r.error) : json(nullptr)}};
}

MetricsReport report_from_json(const json& j) {
  MetricsReport r;
  try {
    r.model = j.at("model").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.perplexity = j.at("perplexity").get<double>();
    r.bleu = j.at("bleu").get<std::array<double, 4>>();
    r.distinct = j.at("distinct").get<std::array<double, 2>>();
    r.repetition_rate = j.at("repetition_rate").get<double>();
    r.avg_sentence_length = j.at("avg_sentence_length").get<double>();
    r.length_variation = j.at("length_variation").get<double>();
    r.degenerate_samples = j.at("degenerate_samples").get<std::size_t>();
    for (const auto& s : j.at("samples"))
      r.samples.push_back({s.at("prompt").get<std::string>(), s.at("reference").get<std::string>(),
                           s.at("output").get<std::string>()});
    if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
  } catch (const json::exception& e) {
    throw ContractError(std::string("malformed metrics report: ") + e.what());
  }
  return r;
}

void write_reports_json(std::span<const MetricsReport> reports, const std::filesystem::path& path) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r));
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << arr.dump(2) << '\n';
}

std::vector<MetricsReport> read_reports_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  json arr;
  try {
    arr = json::parse(in);
  } catch (const json::exception& e) {
    throw ContractError("malformed reports file " + path.string() + ": " + e.what());
  }
  if (!arr.is_array()) throw ContractError("reports file " + path.string() + " must hold a JSON array");
  std::vector<MetricsReport> reports;
  for (const auto& j : arr) reports.push_back(report_from_json(j));
  return reports;
}

std::vector<OverallRow> overall_rows(std::span<const MetricsReport> reports) {
  std::map<std::string, OverallRow> rows;
  for (const auto& r : reports) {
    auto& row = rows[r.model];
    row.model = r.model;
    if (r.error) continue;
    row.perplexity += r.perplexity;
    row.bleu1 += r.bleu[0];
    row.distinct1 += r.distinct[0];
    row.repetition_rate += r.repetition_rate;
    ++row.cells;
  }
  std::vector<std::string> models;
  for (const auto& [name, _] : rows) models.push_back(name);
  sort_by_order(models, kOverallTableModelOrder);
  std::vector<OverallRow> out;
  for (const auto& m : models) {
    auto row = rows[m];
    if (row.cells > 0) {
      const double n = static_cast<double>(row.cells);
      row.perplexity /= n;
      row.bleu1 /= n;
      row.distinct1 /= n;
      row.repetition_rate /= n;
    }
    out.push_back(row);
  }
  return out;
}

std::string dataset_table_csv(std::span<const MetricsReport> reports, std::string_view dataset) {
  std::map<std::string, const MetricsReport*> by_model;
  for (const auto& r : reports)
    if (r.dataset == dataset) by_model[r.model] = &r;
  std::vector<std::string> models;
  for (const auto& [name, _] : by_model) models.push_back(name);
  sort_by_order(models, kDatasetTableModelOrder);
  std::ostringstream out;
  out << header(kDatasetTableColumns);
  for (const auto& m : models) {
    const auto& r = *by_model[m];
    out << r.model;
    if (r.error)
      out << ",NA,NA,NA,NA,NA\n";
    else
      out << ',' << fixed4(r.perplexity) << ',' << fixed4(r.bleu[0]) << ',' << fixed4(r.bleu[1]) << ','
          << fixed4(r.distinct[0]) << ',' << fixed4(r.repetition_rate) << '\n';
  }
  return out.str();
}

std::string overall_table_csv(std::span<const MetricsReport> reports) {
  std::ostringstream out;
  out << header(kOverallTableColumns);
  for (const auto& row : overall_rows(reports)) {
    out << row.model;
    if (row.cells == 0)
      out << ",NA,NA,NA,NA\n";
    else
      out << ',' << fixed4(row.perplexity) << ',' << fixed4(row.bleu1) << ',' << fixed4(row.distinct1) << ','
          << fixed4(row.repetition_rate) << '\n';
  }
  return out.str();
}

}  // namespace qtb

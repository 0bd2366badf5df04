// citeimpact: command-line front end over the library.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "citeimpact/cleanse/cleanse.hpp"
#include "citeimpact/common/error.hpp"
#include "citeimpact/corpus/loaders.hpp"
#include "citeimpact/corpus/stats.hpp"
#include "citeimpact/harness/config.hpp"
#include "citeimpact/harness/experiment.hpp"
#include "citeimpact/harness/fetch.hpp"
#include "citeimpact/harness/report.hpp"
#include "citeimpact/metrics/metrics.hpp"
#include "citeimpact/splits/splits.hpp"

namespace fs = std::filesystem;
using namespace citeimpact;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string sniff_format(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    if (line[start] != '{') return "csc";
    const auto j = nlohmann::json::parse(line, nullptr, false);
    const bool corpus = j.is_object() && j.value("format", "") == "citeimpact.corpus";
    return corpus ? "corpus" : "scicite";
  }
  throw FormatError(path.string() + " is empty");
}

Corpus load_any(const std::string& input, std::string format) {
  const auto path = resolve_data_path(input);
  if (format == "auto") format = sniff_format(path);
  if (format == "csc") return load_csc(path);
  if (format == "corpus") return import_corpus(path);
  if (format == "scicite") return load_scicite_split(path, path.stem().string());
  throw FormatError("unknown input format '" + format + "'");
}

std::string render_distribution(const std::vector<std::pair<std::string, DistributionStats>>& blocks,
                                const std::string& format) {
  std::ostringstream out;
  if (format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [name, d] : blocks) {
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t c = 0; c < d.labels.size(); ++c) {
        rows.push_back({{"label", d.labels[c]}, {"count", d.counts[c]}, {"percent", format_percent(d.fractions[c])}});
      }
      j.push_back({{"name", name}, {"total", d.total}, {"classes", rows}});
    }
    return j.dump(2) + "\n";
  }
  for (const auto& [name, d] : blocks) {
    if (format == "md") {
      out << "### " << name << "\n\n| label | count | percent |\n|---|---:|---:|\n";
      for (std::size_t c = 0; c < d.labels.size(); ++c) {
        out << "| " << d.labels[c] << " | " << d.counts[c] << " | " << format_percent(d.fractions[c]) << " |\n";
      }
      out << "| total | " << d.total << " | 100.00 |\n\n";
    } else {
      if (blocks.size() > 1) out << "# " << name << '\n';
      out << distribution_csv(d);
    }
  }
  return out.str();
}

std::map<std::string, std::string> read_label_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(n) + ": expected id,label");
    }
    auto id = line.substr(0, comma);
    auto label = line.substr(comma + 1);
    if (n == 1 && id == "id" && label == "label") continue;
    if (!out.emplace(id, label).second) {
      throw FormatError(path.string() + ":" + std::to_string(n) + ": duplicate id '" + id + "'");
    }
  }
  if (out.empty()) throw FormatError(path.string() + " holds no labels");
  return out;
}

std::vector<fs::path> find_summaries(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_regular_file(p)) {
      out.push_back(p);
    } else if (fs::is_directory(p)) {
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (e.is_regular_file() && e.path().filename() == "summary.json") out.push_back(e.path());
      }
    } else {
      throw IoError("no such run or summary: " + in);
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw PreconditionError("no summary.json found under the given paths");
  return out;
}

void emit(const std::string& text, const std::string& out_file) {
  if (out_file.empty()) {
    std::cout << text;
  } else {
    write_text(out_file, text);
  }
}

void print_error(const std::string& kind, const std::string& message,
                 const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json j = {{"error", {{"kind", kind}, {"message", message}}}};
  for (const auto& [k, v] : extra.items()) j["error"][k] = v;
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Citation intent and sentiment experiment toolkit"};
  app.require_subcommand(1);

  std::vector<std::string> inputs;
  std::string input, out, config_path, format = "csv", input_format = "auto";
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;

  auto* stats = app.add_subcommand("stats", "Class distribution and length statistics");
  stats->add_option("--input", inputs, "Dataset file(s); several are also reported pooled")->required();
  stats->add_option("--input-format", input_format, "auto, csc, scicite or corpus");
  stats->add_option("--out", out, "Directory for distribution, length and histogram files");
  stats->add_option("--format", format, "stdout format")->check(CLI::IsMember({"csv", "md", "json"}));
  std::size_t bucket = 10;
  stats->add_option("--bucket-width", bucket, "Token-length histogram bucket width");

  auto* clean = app.add_subcommand("clean", "Remove conflicting groups, then duplicates");
  clean->add_option("--input", input, "Dataset file")->required();
  clean->add_option("--input-format", input_format, "auto, csc, scicite or corpus");
  clean->add_option("--out", out, "Output directory")->required();

  auto* split = app.add_subcommand("split", "Write a fixed or k-fold partition");
  std::string kind = "fixed_ratio";
  double ratio = 0.7;
  std::size_t k = 10;
  bool unstratified = false;
  split->add_option("--input", input, "Dataset file")->required();
  split->add_option("--input-format", input_format, "auto, csc, scicite or corpus");
  split->add_option("--kind", kind, "fixed_ratio or kfold")->check(CLI::IsMember({"fixed_ratio", "kfold"}));
  split->add_option("--ratio", ratio, "Train share for fixed_ratio");
  split->add_option("--k", k, "Fold count for kfold");
  split->add_option("--seed", seed, "Split seed (default 1)");
  split->add_flag("--unstratified", unstratified, "Plain shuffle for fixed_ratio");
  split->add_option("--out", out, "Output directory")->required();

  auto* train_cmd = app.add_subcommand("train", "Run a fixed-split experiment from a config");
  auto* cv = app.add_subcommand("cv", "Run a k-fold experiment from a config");
  for (auto* sub : {train_cmd, cv}) {
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--workers", workers, "Concurrent fold workers")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "Override the output directory");
    sub->add_option("--format", format, "stdout format")->check(CLI::IsMember({"csv", "md", "json"}));
  }

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against gold labels");
  std::string gold_path, pred_path, task, eval_format = "json";
  evaluate_cmd->add_option("--gold", gold_path, "CSV id,label")->required();
  evaluate_cmd->add_option("--pred", pred_path, "CSV id,label")->required();
  evaluate_cmd->add_option("--task", task, "intent or sentiment (default: labels seen, sorted)");
  evaluate_cmd->add_option("--format", eval_format, "Output format")->check(CLI::IsMember({"csv", "md", "json"}));
  evaluate_cmd->add_option("--out", out, "Output file (default stdout)");

  auto* report = app.add_subcommand("report", "Results table over finished runs");
  report->add_option("--runs", inputs, "Run directories or summary.json files")->required();
  report->add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "md", "json"}));
  report->add_option("--out", out, "Output file (default stdout)");

  auto* fetch = app.add_subcommand("fetch", "Download a dataset file and verify its checksum");
  std::string url, sha;
  fetch->add_option("--url", url, "http(s) or file URL")->required();
  fetch->add_option("--out", out, "Destination file")->required();
  fetch->add_option("--sha256", sha, "Expected SHA-256");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (stats->parsed()) {
      std::vector<Corpus> corpora;
      for (const auto& in : inputs) corpora.push_back(load_any(in, input_format));
      std::vector<std::pair<std::string, DistributionStats>> blocks;
      for (std::size_t i = 0; i < corpora.size(); ++i) {
        blocks.emplace_back(inputs[i], class_distribution(corpora[i]));
      }
      const Corpus pooled = corpora.size() > 1 ? concatenate(corpora, "overall") : corpora.front();
      if (corpora.size() > 1) blocks.emplace_back("overall", class_distribution(pooled));
      std::cout << render_distribution(blocks, format);
      if (!out.empty()) {
        const fs::path dir(out);
        const auto lengths = length_stats(pooled, Tokenizer{}, bucket);
        write_text(dir / "distribution.csv", distribution_csv(class_distribution(pooled)));
        write_text(dir / "lengths.csv", length_csv(lengths));
        write_text(dir / "length_histogram.json", length_histogram_json(lengths));
      }
      return 0;
    }

    if (clean->parsed()) {
      const auto corpus = load_any(input, input_format);
      const auto result = cleanse(corpus);
      const fs::path dir(out);
      fs::create_directories(dir);
      export_corpus(result.retained, dir / "corpus.jsonl");
      write_text(dir / "ledger.csv", ledger_csv(result));
      std::vector<CitationInstance> removed = result.removed_conflicting;
      removed.insert(removed.end(), result.removed_duplicate.begin(), result.removed_duplicate.end());
      std::ofstream rm(dir / "removed.jsonl");
      for (const auto& inst : removed) {
        const bool conflict = std::any_of(result.removed_conflicting.begin(), result.removed_conflicting.end(),
                                          [&](const CitationInstance& c) { return c.id == inst.id; });
        rm << nlohmann::json{{"id", inst.id},
                             {"label", corpus.scheme().name(inst.label)},
                             {"reason", conflict ? "conflicting" : "duplicate"},
                             {"text", inst.text}}
                  .dump()
           << '\n';
      }
      write_text(dir / "report.txt", cleanse_report(result));
      std::cout << ledger_csv(result);
      return 0;
    }

    if (split->parsed()) {
      const auto corpus = load_any(input, input_format);
      const fs::path dir(out);
      const auto s = seed.value_or(1);
      if (kind == "kfold") {
        write_text(dir / "folds.csv", kfold_csv(corpus, kfold(corpus, k, s)));
      } else {
        write_text(dir / "split.csv", fixed_split_csv(corpus, fixed_split(corpus, ratio, s, !unstratified)));
      }
      write_text(dir / "split.json", nlohmann::json{{"input", input},
                                                    {"kind", kind},
                                                    {"ratio", ratio},
                                                    {"k", k},
                                                    {"seed", s},
                                                    {"stratified", !unstratified}}
                                             .dump(2) +
                                         "\n");
      return 0;
    }

    if (train_cmd->parsed() || cv->parsed()) {
      auto config = ExperimentConfig::load(config_path);
      if (seed) config.seed = *seed;
      const bool want_cv = cv->parsed();
      if (want_cv != (config.split.kind == SplitKind::kfold)) {
        throw PreconditionError(want_cv ? "cv needs a config with split kind 'kfold'"
                                        : "train needs a non-kfold config; use cv for kfold");
      }
      RunOptions options;
      options.workers = workers;
      if (!out.empty()) options.output_dir = fs::path(out);
      const auto result = run_experiment(config, options);
      std::cout << render_report({result.row}, report_format_from_string(format));
      std::cerr << "run directory: " << result.manifest.run_dir << '\n';
      return 0;
    }

    if (evaluate_cmd->parsed()) {
      const auto gold = read_label_csv(gold_path);
      const auto pred = read_label_csv(pred_path);
      std::vector<std::string> labels;
      if (!task.empty()) {
        labels = LabelScheme::for_task(task_from_string(task)).labels();
      } else {
        std::set<std::string> seen;
        for (const auto& [id, l] : gold) seen.insert(l);
        for (const auto& [id, l] : pred) seen.insert(l);
        labels.assign(seen.begin(), seen.end());
        if (labels.size() < 2) labels.push_back(labels.front() == "other" ? "other_" : "other");
      }
      std::map<std::string, std::size_t> index;
      for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = i;
      auto lookup = [&](const std::string& l, const std::string& where) {
        const auto it = index.find(l);
        if (it == index.end()) throw FormatError("label '" + l + "' in " + where + " is not in the label set");
        return it->second;
      };
      std::vector<std::size_t> g, p;
      for (const auto& [id, l] : gold) {
        const auto it = pred.find(id);
        if (it == pred.end()) throw FormatError("prediction missing for id '" + id + "'");
        g.push_back(lookup(l, gold_path));
        p.push_back(lookup(it->second, pred_path));
      }
      if (pred.size() != gold.size()) throw FormatError("predictions include ids absent from the gold file");
      const auto r = citeimpact::evaluate(g, p, labels);
      const auto f = report_format_from_string(eval_format);
      emit(f == ReportFormat::json ? to_json(r).dump(2) + "\n" : render_report({ReportRow{"-", "-", r}}, f), out);
      return 0;
    }

    if (report->parsed()) {
      std::vector<ReportRow> rows;
      for (const auto& path : find_summaries(inputs)) {
        std::ifstream in(path);
        const auto j = nlohmann::json::parse(in);
        rows.push_back(ReportRow{j.at("topology").get<std::string>(), j.at("modification").get<std::string>(),
                                 evaluation_from_json(j.at("evaluation"))});
      }
      emit(render_report(std::move(rows), report_format_from_string(format)), out);
      return 0;
    }

    if (fetch->parsed()) {
      const auto digest = fetch_file(url, out, sha.empty() ? std::nullopt : std::optional<std::string>(sha));
      std::cout << nlohmann::json{{"path", out}, {"sha256", digest}}.dump() << '\n';
      return 0;
    }
  } catch (const ExperimentError& e) {
    print_error(e.kind(), e.what(),
                {{"stage", e.stage()}, {"cause", e.cause_kind()}, {"run_dir", e.manifest().run_dir}});
    return 1;
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const nlohmann::json::exception& e) {
    print_error("format", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}

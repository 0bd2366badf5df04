#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "citeimpact/common/error.hpp"
#include "citeimpact/common/hash.hpp"
#include "citeimpact/corpus/loaders.hpp"
#include "citeimpact/harness/config.hpp"
#include "citeimpact/harness/experiment.hpp"
#include "citeimpact/harness/fetch.hpp"
#include "citeimpact/harness/report.hpp"
#include "support/synthetic.hpp"

using namespace citeimpact;
namespace fs = std::filesystem;

namespace {

ExperimentConfig kfold_config(const fs::path& data) {
  ExperimentConfig c;
  c.name = "synthetic-cv";
  c.task = Task::sentiment;
  c.dataset.format = "corpus";
  c.dataset.paths = {data.string()};
  c.split.kind = SplitKind::kfold;
  c.split.k = 10;
  c.model = ModelConfig::parse("CNN", "L 2 F 6 C 2,3");
  c.model.embedding_dim = 8;
  c.model.max_seq_len = 16;
  c.training.epochs = 2;
  c.training.batch_size = 16;
  c.seed = 42;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

EvaluationReport some_report(std::size_t offset) {
  ConfusionMatrix m({"positive", "negative", "neutral"});
  for (std::size_t i = 0; i < 30 + offset; ++i) m.add(i % 3, (i + (i % 4 == 0 ? 1 : 0)) % 3);
  return evaluate(m);
}

}  // namespace

TEST_CASE("experiment configs reject unknown keys and hash canonically") {
  ExperimentConfig c;
  c.dataset.paths = {"data.jsonl"};
  const auto j = c.to_json();
  CHECK(ExperimentConfig::from_json(j).to_json() == j);
  auto extra = j;
  extra["learning_rate"] = 0.1;
  CHECK_THROWS_AS(ExperimentConfig::from_json(extra), FormatError);
  auto nested = j;
  nested["split"]["folds"] = 3;
  CHECK_THROWS_AS(ExperimentConfig::from_json(nested), FormatError);

  auto moved = c;
  moved.output_dir = "/elsewhere";
  CHECK(moved.hash() == c.hash());
  CHECK(c.hash() == sha256_hex(c.canonical()));
  CHECK(c.hash().size() == 64);
  auto reseeded = c;
  reseeded.seed = 2;
  CHECK(reseeded.hash() != c.hash());
}

TEST_CASE("inconsistent experiment configs are refused") {
  ExperimentConfig c;
  c.dataset.paths = {"x"};
  auto down = c;
  down.sampling = SamplingStrategy::downsample_balanced;
  CHECK_THROWS_AS(down.validate(), PreconditionError);
  down.split.kind = SplitKind::kfold;
  CHECK_NOTHROW(down.validate());
  auto provided = c;
  provided.split.kind = SplitKind::provided;
  CHECK_THROWS_AS(provided.validate(), PreconditionError);
  auto sci = c;
  sci.dataset.format = "scicite";
  sci.dataset.paths = {"a", "b", "c"};
  sci.task = Task::intent;
  CHECK_NOTHROW(sci.validate());
  sci.cleanse = true;
  CHECK_THROWS_AS(sci.validate(), PreconditionError);
  auto csc = c;
  csc.dataset.format = "csc";
  csc.task = Task::intent;
  CHECK_THROWS_AS(csc.validate(), PreconditionError);
}

TEST_CASE("ten-fold run writes per-fold reports and a complete manifest") {
  const auto dir = testing::scratch_dir("harness-cv");
  const auto corpus = testing::keyword_corpus(100);
  export_corpus(corpus, dir / "data.jsonl");
  auto config = kfold_config(dir / "data.jsonl");
  config.dataset.sha256[(dir / "data.jsonl").string()] = sha256_file(dir / "data.jsonl");
  RunOptions opt;
  opt.output_dir = dir / "runs";
  const auto r = run_experiment(config, opt);

  REQUIRE(r.cv);
  CHECK(r.cv->folds == 10);
  REQUIRE(r.folds.size() == 10);
  std::set<std::string> all_ids;
  for (const auto& i : corpus) all_ids.insert(i.id);
  std::set<std::string> tested;
  for (const auto& f : r.folds) {
    std::set<std::string> seen(f.train_ids.begin(), f.train_ids.end());
    seen.insert(f.validation_ids.begin(), f.validation_ids.end());
    CHECK(seen.size() == f.train_ids.size() + f.validation_ids.size());
    for (const auto& id : f.test_ids) {
      CHECK_FALSE(seen.count(id));
      CHECK(tested.insert(id).second);
    }
    CHECK(seen.size() + f.test_ids.size() == corpus.size());
    CHECK(f.report.instances == f.test_ids.size());
    CHECK(f.training.seed == config.seed + f.fold);
  }
  CHECK(tested == all_ids);

  const auto& m = r.manifest;
  CHECK(m.status == "ok");
  CHECK(m.config_hash == config.hash());
  CHECK(m.toolkit_version == std::string(kToolkitVersion));
  CHECK(m.dataset_checksums.size() == 1);
  CHECK(fs::path(m.run_dir).filename() == "synthetic-cv-" + config.hash().substr(0, 12));
  for (const char* f : {"config.json", "folds.csv", "cv_report.json", "summary.json", "report.md",
                        "report.csv", "manifest.json", "fold-00/train_report.json",
                        "fold-09/predictions.csv", "fold-09/evaluation.json"}) {
    CAPTURE(f);
    CHECK(std::find(m.artifacts.begin(), m.artifacts.end(), f) != m.artifacts.end());
  }
  CHECK(std::is_sorted(m.artifacts.begin(), m.artifacts.end()));
  for (const auto& a : m.artifacts) CHECK(fs::exists(fs::path(m.run_dir) / a));
  std::set<std::string> stages;
  for (const auto& t : m.timings) stages.insert(t.stage);
  for (const char* s : {"configure", "ingest", "split", "report"}) CHECK(stages.count(s));
  const auto on_disk = nlohmann::json::parse(slurp(fs::path(m.run_dir) / "manifest.json"));
  CHECK(on_disk.at("config_hash") == m.config_hash);
  CHECK(on_disk.at("prng_algorithm") == std::string(kPrngAlgorithm));
  CHECK(r.row.topology == "CNN");
  CHECK(r.row.modification == "L 2 F 6 C 2,3");
}

TEST_CASE("results do not depend on the worker count") {
  const auto dir = testing::scratch_dir("harness-workers");
  export_corpus(testing::keyword_corpus(30), dir / "data.jsonl");
  auto config = kfold_config(dir / "data.jsonl");
  config.split.k = 4;
  config.sampling = SamplingStrategy::smote;
  config.training.smote_k = 2;
  RunOptions one;
  one.output_dir = dir / "one";
  RunOptions four = one;
  four.workers = 4;
  four.output_dir = dir / "four";
  const auto a = run_experiment(config, one);
  const auto b = run_experiment(config, four);
  REQUIRE(a.folds.size() == b.folds.size());
  for (std::size_t f = 0; f < a.folds.size(); ++f) {
    CHECK(a.folds[f].report.matrix == b.folds[f].report.matrix);
    CHECK(a.folds[f].training.train_loss == b.folds[f].training.train_loss);
  }
  CHECK(a.cv->pooled.matrix == b.cv->pooled.matrix);
  CHECK(slurp(fs::path(a.manifest.run_dir) / "fold-02/predictions.csv") ==
        slurp(fs::path(b.manifest.run_dir) / "fold-02/predictions.csv"));
}

TEST_CASE("single-split run saves a model and records the split") {
  const auto dir = testing::scratch_dir("harness-fixed");
  export_corpus(testing::keyword_corpus(20), dir / "data.jsonl");
  auto config = kfold_config(dir / "data.jsonl");
  config.split.kind = SplitKind::fixed_ratio;
  config.sampling = SamplingStrategy::focal;
  RunOptions opt;
  opt.output_dir = dir / "runs";
  const auto r = run_experiment(config, opt);
  CHECK_FALSE(r.cv);
  REQUIRE(r.folds.size() == 1);
  CHECK(r.report.instances == 18);
  CHECK(r.row.modification == "L 2 F 6 C 2,3 + focal");
  for (const char* f : {"split.csv", "model.bin", "predictions.csv", "train_report.json"}) {
    CHECK(fs::exists(fs::path(r.manifest.run_dir) / f));
  }
}

TEST_CASE("failures name the stage and leave a failed manifest") {
  const auto dir = testing::scratch_dir("harness-fail");
  export_corpus(testing::counts_corpus({12, 3, 12}), dir / "data.jsonl");
  auto config = kfold_config(dir / "data.jsonl");
  RunOptions opt;
  opt.output_dir = dir / "runs";
  try {
    run_experiment(config, opt);
    FAIL("expected an experiment error");
  } catch (const ExperimentError& e) {
    CHECK(e.stage() == "split");
    CHECK(e.cause_kind() == "precondition");
    CHECK(std::string(e.what()).find("negative") != std::string::npos);
    CHECK(e.manifest().status == "failed");
    CHECK(e.manifest().failed_stage == std::optional<std::string>("split"));
    const auto j = nlohmann::json::parse(slurp(fs::path(e.manifest().run_dir) / "manifest.json"));
    CHECK(j.at("status") == "failed");
  }

  config.dataset.sha256[config.dataset.paths[0]] = std::string(64, '0');
  CHECK_THROWS_WITH_AS(run_experiment(config, opt), doctest::Contains("ingest"), ExperimentError);
  config.dataset.sha256.clear();
  config.task = Task::intent;
  CHECK_THROWS_WITH_AS(run_experiment(config, opt), doctest::Contains("ingest"), ExperimentError);
}

TEST_CASE("result tables") {
  const ReportRow row{"CNN", "L 3 F 100 C 3,4,5", some_report(0)};
  const auto md = render_report({row}, ReportFormat::markdown);
  std::istringstream lines(md);
  std::string header, rule, body, extra;
  std::getline(lines, header);
  std::getline(lines, rule);
  std::getline(lines, body);
  CHECK_FALSE(std::getline(lines, extra));
  CHECK(header == "| Topology | Modification | positive | negative | neutral | micro-F1 | macro-F1 |");
  std::vector<std::string> cells;
  std::istringstream b(body);
  for (std::string cell; std::getline(b, cell, '|');) {
    const auto first = cell.find_first_not_of(' ');
    if (first != std::string::npos) cells.push_back(cell.substr(first, cell.find_last_not_of(' ') - first + 1));
  }
  REQUIRE(cells.size() == 7);
  for (std::size_t i = 2; i < 7; ++i) {
    CAPTURE(cells[i]);
    const auto dot = cells[i].find('.');
    REQUIRE(dot != std::string::npos);
    CHECK(cells[i].size() - dot == 3);
    CHECK(std::stod(cells[i]) >= 0.0);
    CHECK(std::stod(cells[i]) <= 100.0);
  }
  CHECK(cells[5] == percent2(row.report.micro_f1));
  CHECK_THROWS_AS(render_report({}, ReportFormat::csv), PreconditionError);
  ReportRow other{"CNN", "x", evaluate(ConfusionMatrix({"a", "b"}, {{1, 0}, {0, 1}}))};
  CHECK_THROWS_AS(render_report({row, other}, ReportFormat::markdown), PreconditionError);

  std::vector<ReportRow> grid;
  const auto configs = intent_baseline_grid();
  for (std::size_t i = configs.size(); i-- > 0;) {
    grid.push_back({configs[i].first, configs[i].second, some_report(i)});
  }
  const auto csv = render_report(grid, ReportFormat::csv);
  std::istringstream csv_lines(csv);
  std::string line;
  std::getline(csv_lines, line);
  CHECK(line == "topology,modification,accuracy_positive,accuracy_negative,accuracy_neutral,micro_f1,macro_f1");
  std::vector<std::pair<std::string, std::string>> order;
  while (std::getline(csv_lines, line)) {
    // CNN modifications contain commas and arrive quoted.
    const auto c1 = line.find(',');
    const bool quoted = line[c1 + 1] == '"';
    const auto end = quoted ? line.find('"', c1 + 2) : line.find(',', c1 + 1);
    const auto begin = c1 + (quoted ? 2 : 1);
    order.emplace_back(line.substr(0, c1), line.substr(begin, end - begin));
  }
  CHECK(order.size() == 9);
  auto sorted = configs;
  std::sort(sorted.begin(), sorted.end());
  CHECK(order == sorted);
  const auto j = nlohmann::json::parse(render_report(grid, ReportFormat::json));
  CHECK(j.size() == 9);
  // Sorted first: the CNN with widths 2,4,6, grid entry 1.
  CHECK(j[0].at("modification") == "L 3 F 100 C 2,4,6");
  CHECK(evaluation_from_json(j[0].at("evaluation")).matrix == some_report(1).matrix);
  CHECK(report_format_from_string("md") == ReportFormat::markdown);
  CHECK_THROWS(report_format_from_string("xlsx"));
}

TEST_CASE("file URLs fetch with checksum verification") {
  const auto dir = testing::scratch_dir("fetch");
  {
    std::ofstream out(dir / "source.txt");
    out << "payload bytes\n";
  }
  const auto url = "file://" + (dir / "source.txt").string();
  const auto digest = fetch_file(url, dir / "copy.txt");
  CHECK(digest == sha256_hex("payload bytes\n"));
  CHECK(slurp(dir / "copy.txt") == "payload bytes\n");
  CHECK(fetch_file(url, dir / "copy2.txt", digest) == digest);
  CHECK_THROWS_AS(fetch_file(url, dir / "bad.txt", std::string(64, 'a')), IntegrityError);
  CHECK_FALSE(fs::exists(dir / "bad.txt"));
  CHECK_THROWS(fetch_file("file://" + (dir / "absent").string(), dir / "x.txt"));
}

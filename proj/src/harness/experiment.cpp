#include "citeimpact/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "citeimpact/cleanse/cleanse.hpp"
#include "citeimpact/common/hash.hpp"
#include "citeimpact/corpus/loaders.hpp"
#include "citeimpact/models/pretrained.hpp"
#include "citeimpact/models/serialization.hpp"
#include "citeimpact/splits/splits.hpp"

namespace citeimpact {
namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kValidationStream = 0x76616c;

double since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::pair<std::string, std::string> describe(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const Error& e) {
    return {e.kind(), e.what()};
  } catch (const std::exception& e) {
    return {"internal", e.what()};
  }
}

class RunContext {
 public:
  RunContext(std::filesystem::path dir, RunManifest& manifest)
      : dir_(std::move(dir)), manifest_(manifest) {}

  const std::filesystem::path& dir() const { return dir_; }

  void write(const std::string& relative, const std::string& content) {
    const auto path = dir_ / relative;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("failed writing " + path.string());
    record(relative);
  }

  void record(const std::string& relative) {
    std::lock_guard lock(mutex_);
    auto& a = manifest_.artifacts;
    if (std::find(a.begin(), a.end(), relative) == a.end()) a.push_back(relative);
  }

  void time(const std::string& stage, double seconds) {
    std::lock_guard lock(mutex_);
    for (auto& t : manifest_.timings) {
      if (t.stage == stage) {
        t.seconds += seconds;
        return;
      }
    }
    manifest_.timings.push_back({stage, seconds});
  }

  [[noreturn]] void fail(const std::string& stage, std::exception_ptr error) {
    const auto [kind, message] = describe(error);
    manifest_.status = "failed";
    manifest_.failed_stage = stage;
    manifest_.error = message;
    try {
      write_manifest();
    } catch (const std::exception&) {
      // The run directory itself may be what failed.
    }
    throw ExperimentError(stage, kind, message, manifest_);
  }

  template <typename F>
  auto stage(const std::string& name, F&& body) {
    const auto start = Clock::now();
    try {
      if constexpr (std::is_void_v<decltype(body())>) {
        body();
        time(name, since(start));
      } else {
        auto value = body();
        time(name, since(start));
        return value;
      }
    } catch (const ExperimentError&) {
      throw;
    } catch (...) {
      fail(name, std::current_exception());
    }
  }

  void write_manifest() {
    record("manifest.json");
    std::sort(manifest_.artifacts.begin(), manifest_.artifacts.end());
    std::filesystem::create_directories(dir_);
    std::ofstream out(dir_ / "manifest.json", std::ios::trunc);
    if (!out) throw IoError("cannot write manifest in " + dir_.string());
    out << manifest_.to_json().dump(2) << '\n';
  }

 private:
  std::filesystem::path dir_;
  RunManifest& manifest_;
  std::mutex mutex_;
};

struct Job {
  std::size_t fold = 0;
  std::string prefix;  // artifact directory, empty for single-split runs
  std::uint64_t seed = 0;
  Corpus train;
  std::optional<Corpus> val;
  Corpus test;
};

struct JobOutcome {
  std::optional<FoldResult> result;
  std::exception_ptr error;
  std::string stage;
};

std::pair<Corpus, std::optional<Corpus>> carve_validation(const Corpus& train,
                                                          const SplitConfig& split,
                                                          std::uint64_t seed) {
  if (split.validation_fraction <= 0.0) return {train, std::nullopt};
  auto parts = fixed_split(train, 1.0 - split.validation_fraction,
                           derive_seed(seed, kValidationStream), true);
  if (parts.test.empty()) return {train, std::nullopt};
  return {parts.train.renamed(train.name() + "-train"), parts.test.renamed(train.name() + "-val")};
}

std::vector<std::string> ids_of(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& i : c) out.push_back(i.id);
  return out;
}

std::string predictions_csv(const Corpus& test, const Predictions& p) {
  std::ostringstream out;
  out << "id,gold,predicted";
  for (const auto& l : test.scheme().labels()) out << ",p_" << l;
  out << '\n';
  char buf[40];
  for (std::size_t i = 0; i < test.size(); ++i) {
    out << test[i].id << ',' << test.scheme().name(test[i].label) << ','
        << test.scheme().name(p.labels[i]);
    for (Eigen::Index c = 0; c < p.probabilities.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", p.probabilities(static_cast<Eigen::Index>(i), c));
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string topology_label(const ModelConfig& model) {
  switch (model.topology) {
    case Topology::cnn: return "CNN";
    case Topology::lstm: return "LSTM";
    case Topology::rnn: return "RNN";
    case Topology::pretrained:
      return pretrained::CheckpointId::parse(model.pretrained_checkpoint).backend;
  }
  return "?";
}

JobOutcome run_job(const Job& job, const ExperimentConfig& config, const RunOptions& options,
                   RunContext& ctx) {
  JobOutcome outcome;
  outcome.stage = "train";
  try {
    auto start = Clock::now();
    auto trained = train(config.model, job.train, job.val, config.loss, config.sampling,
                         config.training, job.seed);
    ctx.time("train", since(start));
    ctx.write(job.prefix + "train_report.json", trained.report.to_json().dump(2) + "\n");
    if (job.prefix.empty() && options.save_model) {
      save_model(trained.classifier, ctx.dir() / "model.bin");
      ctx.record("model.bin");
    }

    outcome.stage = "evaluate";
    start = Clock::now();
    const auto predictions = trained.classifier.predict(job.test);
    FoldResult result;
    result.fold = job.fold;
    result.train_ids = ids_of(job.train);
    if (job.val) result.validation_ids = ids_of(*job.val);
    result.test_ids = ids_of(job.test);
    result.report = evaluate(job.test.labels(), predictions.labels, job.test.scheme().labels());
    result.training = std::move(trained.report);
    ctx.time("evaluate", since(start));
    ctx.write(job.prefix + "predictions.csv", predictions_csv(job.test, predictions));
    ctx.write(job.prefix + "evaluation.json", to_json(result.report).dump(2) + "\n");
    outcome.result = std::move(result);
  } catch (...) {
    outcome.error = std::current_exception();
  }
  return outcome;
}

std::vector<JobOutcome> run_jobs(const std::vector<Job>& jobs, const ExperimentConfig& config,
                                 const RunOptions& options, RunContext& ctx) {
  std::vector<JobOutcome> outcomes(jobs.size());
  const auto workers = std::max<std::size_t>(1, std::min(options.workers, jobs.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) outcomes[i] = run_job(jobs[i], config, options, ctx);
    return outcomes;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (auto i = next++; i < jobs.size(); i = next++) {
        outcomes[i] = run_job(jobs[i], config, options, ctx);
      }
    });
  }
  for (auto& t : pool) t.join();
  return outcomes;
}

}  // namespace

nlohmann::json RunManifest::to_json() const {
  nlohmann::json timing = nlohmann::json::array();
  for (const auto& t : timings) timing.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  nlohmann::json j = {{"config_hash", config_hash},
                      {"toolkit_version", toolkit_version},
                      {"prng_algorithm", prng_algorithm},
                      {"config", config},
                      {"dataset_checksums", dataset_checksums},
                      {"timings", timing},
                      {"artifacts", artifacts},
                      {"run_dir", run_dir},
                      {"status", status},
                      {"failed_stage", nullptr},
                      {"error", nullptr}};
  if (failed_stage) j["failed_stage"] = *failed_stage;
  if (error) j["error"] = *error;
  return j;
}

std::string modification_label(const ExperimentConfig& config) {
  std::string label = config.model.topology == Topology::pretrained
                          ? pretrained::CheckpointId::parse(config.model.pretrained_checkpoint).location
                          : config.model.architecture();
  if (config.sampling != SamplingStrategy::none) {
    label += " + " + std::string(to_string(config.sampling));
  }
  return label;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  RunManifest manifest;
  manifest.config = config.to_json();
  manifest.config_hash = config.hash();
  const auto base = options.output_dir ? *options.output_dir : std::filesystem::path(config.output_dir);
  const auto dir = base / (config.name + "-" + manifest.config_hash.substr(0, 12));
  manifest.run_dir = dir.string();
  RunContext ctx(dir, manifest);

  ctx.stage("configure", [&] {
    config.validate();
    std::filesystem::create_directories(dir);
    ctx.write("config.json", manifest.config.dump(2) + "\n");
  });

  // ingest
  std::optional<Corpus> corpus;
  std::optional<SciCiteSplits> scicite;
  ctx.stage("ingest", [&] {
    std::vector<std::filesystem::path> resolved;
    for (const auto& p : config.dataset.paths) {
      resolved.push_back(resolve_data_path(p));
      const auto digest = sha256_file(resolved.back());
      if (auto it = config.dataset.sha256.find(p); it != config.dataset.sha256.end()) {
        if (it->second != digest) {
          throw IntegrityError("checksum mismatch for " + p + ": expected " + it->second +
                               ", got " + digest);
        }
      }
      manifest.dataset_checksums[p] = digest;
    }
    if (config.dataset.format == "csc") {
      corpus = load_csc(resolved[0]);
    } else if (config.dataset.format == "corpus") {
      corpus = import_corpus(resolved[0]);
    } else {
      scicite = load_scicite(resolved[0], resolved[1], resolved[2]);
    }
    const auto& scheme = corpus ? corpus->scheme() : scicite->train.scheme();
    if (scheme.task() != config.task) {
      throw PreconditionError("dataset holds " + std::string(to_string(scheme.task())) +
                              " labels but the config task is " + std::string(to_string(config.task)));
    }
  });

  if (config.cleanse) {
    ctx.stage("cleanse", [&] {
      auto result = cleanse(*corpus);
      ctx.write("cleanse_ledger.csv", ledger_csv(result));
      corpus = std::move(result.retained);
    });
  }

  std::vector<Job> jobs;
  ctx.stage("split", [&] {
    const auto& s = config.split;
    if (s.kind == SplitKind::provided) {
      auto [train, val] = s.use_provided_validation
                              ? std::pair<Corpus, std::optional<Corpus>>{scicite->train, scicite->val}
                              : carve_validation(scicite->train, s, config.seed);
      jobs.push_back(Job{0, "", config.seed, std::move(train), std::move(val), scicite->test});
      return;
    }
    if (!corpus) {
      const std::vector<Corpus> parts = {scicite->train, scicite->val, scicite->test};
      corpus = concatenate(parts, "scicite");
    }
    if (s.kind == SplitKind::fixed_ratio) {
      auto split = fixed_split(*corpus, s.ratio, config.seed, s.stratified);
      ctx.write("split.csv", fixed_split_csv(*corpus, split));
      auto [train, val] = carve_validation(split.train, s, config.seed);
      jobs.push_back(Job{0, "", config.seed, std::move(train), std::move(val), split.test});
      return;
    }
    const auto folds = kfold(*corpus, s.k, config.seed);
    ctx.write("folds.csv", kfold_csv(*corpus, folds));
    for (const auto& f : folds) {
      char prefix[32];
      std::snprintf(prefix, sizeof prefix, "fold-%02zu/", f.fold);
      const auto fold_seed = config.seed + f.fold;
      auto [train, val] = carve_validation(
          corpus->subset(f.train, corpus->name() + "-fold" + std::to_string(f.fold) + "-train"), s,
          fold_seed);
      jobs.push_back(Job{f.fold, prefix, fold_seed, std::move(train), std::move(val),
                         corpus->subset(f.test, corpus->name() + "-fold" +
                                                    std::to_string(f.fold) + "-test")});
    }
  });

  auto outcomes = run_jobs(jobs, config, options, ctx);
  ExperimentResult result;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    if (o.error) {
      ctx.fail(jobs.size() > 1 ? o.stage + "[fold " + std::to_string(jobs[i].fold) + "]" : o.stage,
               o.error);
    }
    result.folds.push_back(std::move(*o.result));
  }

  ctx.stage("report", [&] {
    if (config.split.kind == SplitKind::kfold) {
      std::vector<EvaluationReport> reports;
      for (const auto& f : result.folds) reports.push_back(f.report);
      result.cv = aggregate_cv(reports);
      result.report = result.cv->averaged;
      ctx.write("cv_report.json", to_json(*result.cv).dump(2) + "\n");
    } else {
      result.report = result.folds.front().report;
    }
    result.row = ReportRow{topology_label(config.model), modification_label(config), result.report};
    ctx.write("summary.json", nlohmann::json{{"topology", result.row.topology},
                                             {"modification", result.row.modification},
                                             {"config_hash", manifest.config_hash},
                                             {"evaluation", to_json(result.report)}}
                                      .dump(2) +
                                  "\n");
    ctx.write("report.md", render_report({result.row}, ReportFormat::markdown));
    ctx.write("report.csv", render_report({result.row}, ReportFormat::csv));
  });

  manifest.status = "ok";
  try {
    ctx.write_manifest();
  } catch (...) {
    ctx.fail("manifest", std::current_exception());
  }
  result.manifest = manifest;
  return result;
}

}  // namespace citeimpact

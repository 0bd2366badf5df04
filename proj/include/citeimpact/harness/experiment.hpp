#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "citeimpact/common/error.hpp"
#include "citeimpact/common/random.hpp"
#include "citeimpact/harness/config.hpp"
#include "citeimpact/harness/report.hpp"
#include "citeimpact/metrics/metrics.hpp"
#include "citeimpact/models/trainer.hpp"

namespace citeimpact {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunManifest {
  std::string config_hash;
  std::string toolkit_version{kToolkitVersion};
  std::string prng_algorithm{kPrngAlgorithm};
  nlohmann::json config;
  /// Dataset path as configured -> SHA-256 of the file read.
  std::map<std::string, std::string> dataset_checksums;
  std::vector<StageTiming> timings;
  /// Files written, relative to run_dir, sorted; includes the manifest.
  std::vector<std::string> artifacts;
  std::string run_dir;
  /// "ok" or "failed".
  std::string status = "running";
  std::optional<std::string> failed_stage;
  std::optional<std::string> error;

  nlohmann::json to_json() const;
};

/// A stage failure; carries the stage name and the manifest as far as it got.
class ExperimentError : public Error {
 public:
  ExperimentError(std::string stage, std::string cause_kind, const std::string& message,
                  RunManifest manifest)
      : Error("experiment", "stage '" + stage + "' failed (" + cause_kind + "): " + message),
        stage_(std::move(stage)),
        cause_kind_(std::move(cause_kind)),
        manifest_(std::move(manifest)) {}

  const std::string& stage() const { return stage_; }
  const std::string& cause_kind() const { return cause_kind_; }
  const RunManifest& manifest() const { return manifest_; }

 private:
  std::string stage_;
  std::string cause_kind_;
  RunManifest manifest_;
};

struct FoldResult {
  std::size_t fold = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> validation_ids;
  std::vector<std::string> test_ids;
  EvaluationReport report;
  TrainReport training;
};

struct ExperimentResult {
  /// Single-split evaluation, or the averaged view for kfold.
  EvaluationReport report;
  std::optional<CvReport> cv;
  std::vector<FoldResult> folds;
  RunManifest manifest;
  /// The row this run contributes to a results table.
  ReportRow row;
};

struct RunOptions {
  /// Concurrent fold workers; results do not depend on it.
  std::size_t workers = 1;
  /// Overrides the config's output_dir.
  std::optional<std::filesystem::path> output_dir;
  /// Save the trained model of single-split runs.
  bool save_model = true;
};

/// ingest -> cleanse -> split -> train -> evaluate -> report. Artifacts go to
/// <output_dir>/<name>-<first 12 hex of the config hash>/.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Table modification label: the architecture string, plus the imbalance
/// strategy when one is used.
std::string modification_label(const ExperimentConfig& config);

}  // namespace citeimpact

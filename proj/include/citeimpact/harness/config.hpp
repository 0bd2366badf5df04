#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "citeimpact/balance/loss.hpp"
#include "citeimpact/corpus/corpus.hpp"
#include "citeimpact/models/config.hpp"
#include "citeimpact/splits/splits.hpp"

namespace citeimpact {

/// Dataset root used to resolve relative dataset paths.
inline constexpr const char* kDataRootEnv = "CITEIMPACT_DATA_ROOT";

struct DatasetConfig {
  /// csc (one raw file), scicite (train, dev, test JSONL) or corpus (one
  /// exported corpus file).
  std::string format = "corpus";
  std::vector<std::string> paths;
  /// Expected SHA-256 per path, as written in `paths`. Optional.
  std::map<std::string, std::string> sha256;
};

struct SplitConfig {
  SplitKind kind = SplitKind::fixed_ratio;
  double ratio = 0.7;
  std::size_t k = 10;
  bool stratified = true;
  /// Stratified share of each training portion held out for early stopping
  /// (0 disables it). Not used for scicite's provided split when
  /// use_provided_validation is set.
  double validation_fraction = 0.1;
  bool use_provided_validation = true;
};

/// The declarative description of one run. Every field is listed in to_json(),
/// defaults included, so the canonical text fully determines the run.
struct ExperimentConfig {
  std::string name = "experiment";
  Task task = Task::sentiment;
  DatasetConfig dataset;
  bool cleanse = false;
  SplitConfig split;
  SamplingStrategy sampling = SamplingStrategy::none;
  ModelConfig model;
  LossConfig loss;
  TrainOptions training;
  std::uint64_t seed = 1;
  std::string output_dir = "runs";

  /// Throws PreconditionError for inconsistent combinations.
  void validate() const;

  nlohmann::json to_json() const;
  /// Rejects unknown keys at every level.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Sorted-key compact JSON without output_dir.
  std::string canonical() const;
  /// SHA-256 of canonical().
  std::string hash() const;
};

/// Relative paths resolve under $CITEIMPACT_DATA_ROOT when it is set.
std::filesystem::path resolve_data_path(const std::string& path);

}  // namespace citeimpact

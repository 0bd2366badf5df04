#include "citeimpact/harness/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

#include "citeimpact/common/error.hpp"
#include "citeimpact/common/hash.hpp"

namespace citeimpact {
namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& where) {
  if (!j.is_object()) throw FormatError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw FormatError("unknown key '" + key + "' in " + where);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (name.empty()) throw PreconditionError("experiment name is empty");
  const auto& f = dataset.format;
  if (f != "csc" && f != "scicite" && f != "corpus") {
    throw PreconditionError("dataset format must be csc, scicite or corpus, not '" + f + "'");
  }
  const std::size_t want = f == "scicite" ? 3 : 1;
  if (dataset.paths.size() != want) {
    throw PreconditionError("dataset format " + f + " takes " + std::to_string(want) +
                            " path(s), got " + std::to_string(dataset.paths.size()));
  }
  for (const auto& [path, sum] : dataset.sha256) {
    if (std::find(dataset.paths.begin(), dataset.paths.end(), path) == dataset.paths.end()) {
      throw PreconditionError("checksum given for unlisted path '" + path + "'");
    }
  }
  if (f == "csc" && task != Task::sentiment) throw PreconditionError("csc is a sentiment dataset");
  if (f == "scicite" && task != Task::intent) throw PreconditionError("scicite is an intent dataset");
  if (cleanse && f == "scicite") {
    throw PreconditionError("cleansing applies to single-file datasets, not scicite");
  }
  if (split.kind == SplitKind::provided && f != "scicite") {
    throw PreconditionError("split kind 'provided' needs the scicite dataset");
  }
  if (sampling == SamplingStrategy::downsample_balanced && split.kind != SplitKind::kfold) {
    throw PreconditionError("downsample_balanced is only valid with kfold splits");
  }
  if (!(split.validation_fraction >= 0.0 && split.validation_fraction < 1.0)) {
    throw PreconditionError("validation_fraction must lie in [0, 1)");
  }
  SplitPlan{split.kind, split.ratio, split.k, seed, split.stratified}.validate();
  model.validate();
  loss.validate(LabelScheme::for_task(task).size());
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"name", name},
          {"task", to_string(task)},
          {"dataset", {{"format", dataset.format}, {"paths", dataset.paths}, {"sha256", dataset.sha256}}},
          {"cleanse", cleanse},
          {"split",
           {{"kind", to_string(split.kind)},
            {"ratio", split.ratio},
            {"k", split.k},
            {"stratified", split.stratified},
            {"validation_fraction", split.validation_fraction},
            {"use_provided_validation", split.use_provided_validation}}},
          {"sampling", to_string(sampling)},
          {"model", model.to_json()},
          {"loss",
           {{"kind", to_string(loss.kind)},
            {"gamma", loss.gamma},
            {"class_weights", loss.class_weights}}},
          {"training", training.to_json()},
          {"seed", seed},
          {"output_dir", output_dir}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  reject_unknown(j,
                 {"name", "task", "dataset", "cleanse", "split", "sampling", "model", "loss",
                  "training", "seed", "output_dir"},
                 "experiment config");
  ExperimentConfig c;
  try {
    c.name = j.value("name", c.name);
    if (j.contains("task")) c.task = task_from_string(j.at("task").get<std::string>());
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      reject_unknown(d, {"format", "paths", "sha256"}, "dataset");
      c.dataset.format = d.value("format", c.dataset.format);
      c.dataset.paths = d.value("paths", c.dataset.paths);
      c.dataset.sha256 = d.value("sha256", c.dataset.sha256);
    }
    c.cleanse = j.value("cleanse", c.cleanse);
    if (j.contains("split")) {
      const auto& s = j.at("split");
      reject_unknown(s, {"kind", "ratio", "k", "stratified", "validation_fraction",
                         "use_provided_validation"},
                     "split");
      if (s.contains("kind")) c.split.kind = split_kind_from_string(s.at("kind").get<std::string>());
      c.split.ratio = s.value("ratio", c.split.ratio);
      c.split.k = s.value("k", c.split.k);
      c.split.stratified = s.value("stratified", c.split.stratified);
      c.split.validation_fraction = s.value("validation_fraction", c.split.validation_fraction);
      c.split.use_provided_validation =
          s.value("use_provided_validation", c.split.use_provided_validation);
    }
    if (j.contains("sampling")) c.sampling = sampling_from_string(j.at("sampling").get<std::string>());
    if (j.contains("model")) c.model = ModelConfig::from_json(j.at("model"));
    if (j.contains("loss")) {
      const auto& l = j.at("loss");
      reject_unknown(l, {"kind", "gamma", "class_weights"}, "loss");
      if (l.contains("kind")) c.loss.kind = loss_kind_from_string(l.at("kind").get<std::string>());
      c.loss.gamma = l.value("gamma", c.loss.gamma);
      c.loss.class_weights = l.value("class_weights", c.loss.class_weights);
    }
    if (j.contains("training")) c.training = TrainOptions::from_json(j.at("training"));
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::string ExperimentConfig::canonical() const {
  auto j = to_json();
  j.erase("output_dir");
  return j.dump();
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical()); }

std::filesystem::path resolve_data_path(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative()) {
    if (const char* root = std::getenv(kDataRootEnv); root && *root) return std::filesystem::path(root) / p;
  }
  return p;
}

}  // namespace citeimpact

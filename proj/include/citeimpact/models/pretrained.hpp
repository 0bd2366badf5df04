#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citeimpact/models/trainer.hpp"

namespace citeimpact::pretrained {

/// "<backend>:<location>", e.g. "static-embedding:/data/glove.6B.100d.txt" or
/// "bert:bert-base-uncased".
struct CheckpointId {
  std::string backend;
  std::string location;

  static CheckpointId parse(std::string_view id);
  std::string str() const { return backend + ":" + location; }
};

/// A family of pretrained encoders that can be fine-tuned into a Classifier.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual TrainResult fine_tune(const std::string& location, const ModelConfig& config,
                                const Corpus& train, const std::optional<Corpus>& val,
                                const LossConfig& loss, SamplingStrategy sampling,
                                const TrainOptions& options, std::uint64_t seed) const = 0;
  /// Rebuilds a model from the description it wrote into a model file.
  virtual std::shared_ptr<const ClassifierModel> load(const nlohmann::json& description) const = 0;
};

/// Environment variable holding the command of an external fine-tuning
/// process. When set, the bert, albert and xlnet backends are registered.
inline constexpr const char* kExternalCommandEnv = "CITEIMPACT_TRANSFORMERS_CMD";

class BackendRegistry {
 public:
  /// Process-wide registry: static-embedding always, external backends when
  /// kExternalCommandEnv is set.
  static BackendRegistry& global();

  void add(std::shared_ptr<const Backend> backend);
  bool contains(std::string_view name) const;
  /// Throws CapabilityError naming the backend when it is not registered.
  const Backend& get(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Backend>, std::less<>> backends_;
};

/// Word vectors in word2vec/GloVe text format; fine-tuned under a mean-pooling
/// encoder with a linear head.
std::shared_ptr<const Backend> static_embedding_backend();

/// Runs `command fine-tune ...` / `command predict ...` with JSONL files.
std::shared_ptr<const Backend> external_backend(std::string name, std::string command);

struct WordVectors {
  std::vector<std::string> tokens;
  Eigen::MatrixXd vectors;
};

/// Reads "token v1 ... vD" lines; an optional leading "count dim" line is skipped.
WordVectors read_word_vectors(const std::filesystem::path& path);

/// Fine-tunes the checkpoint through the registered backend. `config` supplies
/// max_seq_len, dropout and the like; its topology and checkpoint are overridden.
TrainResult fine_tune(const std::string& checkpoint, const Corpus& train,
                      const std::optional<Corpus>& val, const TrainOptions& options,
                      std::uint64_t seed, ModelConfig config = {}, const LossConfig& loss = {},
                      SamplingStrategy sampling = SamplingStrategy::none);

}  // namespace citeimpact::pretrained

#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "citeimpact/balance/loss.hpp"
#include "citeimpact/corpus/corpus.hpp"
#include "citeimpact/models/classifier.hpp"
#include "citeimpact/models/config.hpp"
#include "citeimpact/models/network.hpp"
#include "citeimpact/models/vocabulary.hpp"

namespace citeimpact {

struct TrainReport {
  /// Mean training loss per epoch run.
  std::vector<double> train_loss;
  /// Accuracy on the real (non-synthetic) training examples after each epoch.
  std::vector<double> train_accuracy;
  /// Macro-F1 used for model selection: on validation data when given,
  /// otherwise on the training examples.
  std::vector<double> selection_macro_f1;
  bool selection_on_validation = false;
  /// Index into the traces of the returned weights; empty when no epoch ran.
  std::optional<std::size_t> best_epoch;
  std::string stop_reason;
  double seconds = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json config;
  /// Training-set class counts after sampling.
  std::vector<std::size_t> sampled_counts;
  /// Loss actually optimised after resolving the sampling strategy.
  LossConfig loss;

  std::size_t epochs_run() const { return train_loss.size(); }
  nlohmann::json to_json() const;
};

struct TrainResult {
  Classifier classifier;
  TrainReport report;
};

/// Trains a model. The sampling strategy touches only `train`; the vocabulary
/// is built from the unsampled `train`. `seed` replaces config.seed. Pretrained
/// topologies are routed to the backend named by the checkpoint id.
TrainResult train(const ModelConfig& config, const Corpus& train, const std::optional<Corpus>& val,
                  const LossConfig& loss, SamplingStrategy sampling, const TrainOptions& options,
                  std::uint64_t seed);

/// The training loop on an already initialised network over `vocab`.
TrainResult train_network(Network initial, Vocabulary vocab, const Corpus& train,
                          const std::optional<Corpus>& val, const LossConfig& loss,
                          SamplingStrategy sampling, const TrainOptions& options,
                          std::uint64_t seed);

/// The loss the trainer optimises for a given strategy: focal and
/// class_weights force their loss kind; missing weights become the
/// inverse-frequency weights of `train`.
LossConfig resolve_loss(const LossConfig& loss, SamplingStrategy sampling, const Corpus& train);

}  // namespace citeimpact

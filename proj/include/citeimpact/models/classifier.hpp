#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <memory>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "citeimpact/corpus/corpus.hpp"
#include "citeimpact/models/network.hpp"
#include "citeimpact/models/vocabulary.hpp"

namespace citeimpact {

struct Predictions {
  /// One probability row per instance, columns in scheme order.
  Eigen::MatrixXd probabilities;
  /// Row argmax; ties go to the lower class index.
  std::vector<std::size_t> labels;
};

/// Trained state behind a Classifier. Implementations are immutable once built
/// and safe to call from several threads.
class ClassifierModel {
 public:
  virtual ~ClassifierModel() = default;
  /// "network" for in-process networks, otherwise the backend name.
  virtual std::string family() const = 0;
  virtual Eigen::MatrixXd probabilities(std::span<const std::string> texts) const = 0;
  /// Everything except raw weights, as written into model files.
  virtual nlohmann::json describe() const = 0;
};

/// Embedding network plus the vocabulary it was trained with.
class NetworkModel final : public ClassifierModel {
 public:
  NetworkModel(Network network, Vocabulary vocabulary)
      : network_(std::move(network)), vocabulary_(std::move(vocabulary)) {}

  std::string family() const override { return "network"; }
  Eigen::MatrixXd probabilities(std::span<const std::string> texts) const override;
  nlohmann::json describe() const override;

  const Network& network() const { return network_; }
  const Vocabulary& vocabulary() const { return vocabulary_; }

 private:
  Network network_;
  Vocabulary vocabulary_;
};

class Classifier {
 public:
  /// Untrained: predict() throws.
  Classifier() = default;
  Classifier(LabelScheme scheme, std::shared_ptr<const ClassifierModel> model);

  bool trained() const { return model_ != nullptr; }
  const LabelScheme& scheme() const;
  const ClassifierModel& model() const;
  std::shared_ptr<const ClassifierModel> shared_model() const { return model_; }

  Predictions predict(std::span<const std::string> texts) const;
  Predictions predict(const Corpus& corpus) const;

 private:
  std::shared_ptr<LabelScheme> scheme_;
  std::shared_ptr<const ClassifierModel> model_;
};

/// Argmax of each row, lower index on ties.
std::vector<std::size_t> argmax_rows(const Eigen::MatrixXd& probabilities);

}  // namespace citeimpact

#include "citeimpact/models/classifier.hpp"

#include <cmath>

#include "citeimpact/balance/loss.hpp"
#include "citeimpact/common/error.hpp"

namespace citeimpact {

Eigen::MatrixXd NetworkModel::probabilities(std::span<const std::string> texts) const {
  const auto& config = network_.config();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()),
                      static_cast<Eigen::Index>(network_.num_classes()));
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto ids = vocabulary_.encode_unpadded(texts[i], config.max_seq_len);
    out.row(static_cast<Eigen::Index>(i)) =
        softmax(network_.forward(SequenceInput{ids})).transpose();
  }
  return out;
}

nlohmann::json NetworkModel::describe() const {
  return {{"family", family()},
          {"config", network_.config().to_json()},
          {"num_classes", network_.num_classes()},
          {"vocabulary", vocabulary_.tokens()},
          {"min_frequency", vocabulary_.min_frequency()}};
}

Classifier::Classifier(LabelScheme scheme, std::shared_ptr<const ClassifierModel> model)
    : scheme_(std::make_shared<LabelScheme>(std::move(scheme))), model_(std::move(model)) {
  if (!model_) throw PreconditionError("classifier needs a trained model");
}

const LabelScheme& Classifier::scheme() const {
  if (!scheme_) throw PreconditionError("classifier is untrained");
  return *scheme_;
}

const ClassifierModel& Classifier::model() const {
  if (!model_) throw PreconditionError("classifier is untrained");
  return *model_;
}

Predictions Classifier::predict(std::span<const std::string> texts) const {
  if (!model_) throw PreconditionError("cannot predict with an untrained classifier");
  Predictions out;
  out.probabilities = model_->probabilities(texts);
  if (out.probabilities.rows() != static_cast<Eigen::Index>(texts.size()) ||
      out.probabilities.cols() != static_cast<Eigen::Index>(scheme_->size())) {
    throw IntegrityError("model returned a probability matrix of the wrong shape");
  }
  for (Eigen::Index r = 0; r < out.probabilities.rows(); ++r) {
    const auto row = out.probabilities.row(r);
    if (!row.allFinite() || row.minCoeff() < 0.0 || std::abs(row.sum() - 1.0) > 1e-6) {
      throw IntegrityError("model produced a probability row off the simplex");
    }
  }
  out.labels = argmax_rows(out.probabilities);
  return out;
}

Predictions Classifier::predict(const Corpus& corpus) const {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& inst : corpus) texts.push_back(inst.text);
  return predict(texts);
}

std::vector<std::size_t> argmax_rows(const Eigen::MatrixXd& probabilities) {
  std::vector<std::size_t> labels(static_cast<std::size_t>(probabilities.rows()));
  for (Eigen::Index r = 0; r < probabilities.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probabilities.cols(); ++c) {
      if (probabilities(r, c) > probabilities(r, best)) best = c;
    }
    labels[static_cast<std::size_t>(r)] = static_cast<std::size_t>(best);
  }
  return labels;
}

}  // namespace citeimpact

#include "citeimpact/balance/loss.hpp"

#include <cmath>

#include "citeimpact/common/error.hpp"

namespace citeimpact {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::cross_entropy: return "cross_entropy";
    case LossKind::focal: return "focal";
    case LossKind::weighted_cross_entropy: return "weighted_cross_entropy";
  }
  return "?";
}

LossKind loss_kind_from_string(std::string_view name) {
  if (name == "cross_entropy") return LossKind::cross_entropy;
  if (name == "focal") return LossKind::focal;
  if (name == "weighted_cross_entropy") return LossKind::weighted_cross_entropy;
  throw FormatError("unknown loss kind '" + std::string(name) + "'");
}

void LossConfig::validate(std::size_t num_classes) const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw PreconditionError("focal gamma must be a finite non-negative number");
  }
  if (!class_weights.empty()) {
    if (class_weights.size() != num_classes) {
      throw PreconditionError("expected " + std::to_string(num_classes) + " class weights, got " +
                              std::to_string(class_weights.size()));
    }
    for (double w : class_weights) {
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw PreconditionError("class weights must be finite and positive");
      }
    }
  }
}

double focal_loss(const Eigen::MatrixXd& probabilities, std::span<const std::size_t> gold,
                  double gamma, std::span<const double> class_weights) {
  const auto rows = static_cast<std::size_t>(probabilities.rows());
  if (rows == 0) throw PreconditionError("focal loss of an empty batch");
  if (gold.size() != rows) throw PreconditionError("gold labels do not match batch size");
  if (!(gamma >= 0.0)) throw PreconditionError("focal gamma must be non-negative");
  const auto classes = static_cast<std::size_t>(probabilities.cols());
  if (!class_weights.empty() && class_weights.size() != classes) {
    throw PreconditionError("class weight count does not match probability width");
  }

  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = probabilities.row(static_cast<Eigen::Index>(r));
    if ((row.array() < 0.0).any() || std::abs(row.sum() - 1.0) > 1e-6 || !row.allFinite()) {
      throw PreconditionError("row " + std::to_string(r) + " is not a probability vector");
    }
    if (gold[r] >= classes) throw PreconditionError("gold label outside probability width");
    const double p = row(static_cast<Eigen::Index>(gold[r]));
    const double w = class_weights.empty() ? 1.0 : class_weights[gold[r]];
    const double focus = gamma == 0.0 ? 1.0 : std::pow(1.0 - p, gamma);
    total += -w * focus * std::log(std::max(p, kProbabilityFloor));
  }
  return total / static_cast<double>(rows);
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double peak = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - peak).exp();
  return e / e.sum();
}

LossAndGradient loss_from_logits(const Eigen::VectorXd& logits, std::size_t gold, double gamma,
                                 double weight) {
  const auto y = static_cast<Eigen::Index>(gold);
  const double peak = logits.maxCoeff();
  const Eigen::ArrayXd shifted = logits.array() - peak;
  const double log_norm = std::log(shifted.exp().sum());
  const Eigen::VectorXd p = (shifted - log_norm).exp().matrix();

  const double log_p_raw = shifted(y) - log_norm;
  const bool floored = log_p_raw < std::log(kProbabilityFloor);
  const double log_p = floored ? std::log(kProbabilityFloor) : log_p_raw;
  const double py = p(y);
  const double rest = 1.0 - py;

  const double focus = gamma == 0.0 ? 1.0 : std::pow(rest, gamma);
  LossAndGradient out;
  out.loss = -weight * focus * log_p;

  // g = (dL/dp_y) * p_y; then dL/dz_j = g * (delta_jy - p_j).
  double focus_term = 0.0;
  if (gamma != 0.0 && rest > 0.0) {
    focus_term = gamma * std::pow(rest, gamma - 1.0) * py * log_p;
  }
  const double log_term = floored ? 0.0 : focus;
  const double g = -weight * (log_term - focus_term);

  out.grad = -g * p;
  out.grad(y) += g;
  return out;
}

std::vector<double> class_weights_from(const Corpus& train) {
  const auto counts = train.class_counts();
  const double n = static_cast<double>(train.size());
  const double k = static_cast<double>(counts.size());
  std::vector<double> weights;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw PreconditionError("cannot weight class '" + train.scheme().name(c) +
                              "': no training instances");
    }
    weights.push_back(n / (k * static_cast<double>(counts[c])));
  }
  return weights;
}

}  // namespace citeimpact

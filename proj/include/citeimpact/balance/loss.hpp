#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "citeimpact/corpus/corpus.hpp"

namespace citeimpact {

enum class LossKind { cross_entropy, focal, weighted_cross_entropy };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

/// Floor applied to the gold-class probability inside the logarithm.
inline constexpr double kProbabilityFloor = 1e-12;

struct LossConfig {
  LossKind kind = LossKind::cross_entropy;
  /// Focusing exponent; only read when kind == focal.
  double gamma = 2.0;
  /// Per-class weights. Empty means all ones (or, for focal and weighted
  /// cross-entropy in the trainer, inverse-frequency weights of the train split).
  std::vector<double> class_weights;

  void validate(std::size_t num_classes) const;
  /// Focusing exponent actually applied (0 unless kind == focal).
  double effective_gamma() const { return kind == LossKind::focal ? gamma : 0.0; }
};

/// Mean over rows of -w_y * (1 - p_y)^gamma * log(max(p_y, floor)).
/// `probabilities` holds one probability vector per row. Throws
/// PreconditionError for an empty batch or rows off the simplex by more than 1e-6.
double focal_loss(const Eigen::MatrixXd& probabilities, std::span<const std::size_t> gold,
                  double gamma, std::span<const double> class_weights = {});

struct LossAndGradient {
  double loss = 0.0;
  /// d loss / d logits
  Eigen::VectorXd grad;
};

/// Per-example loss evaluated from raw logits (softmax applied internally),
/// together with the gradient with respect to the logits.
LossAndGradient loss_from_logits(const Eigen::VectorXd& logits, std::size_t gold,
                                 double gamma, double weight);

/// Numerically stable softmax.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

/// Inverse-frequency weights N / (num_classes * count_c). Every class must be present.
std::vector<double> class_weights_from(const Corpus& train);

}  // namespace citeimpact

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "citeimpact/corpus/corpus.hpp"

namespace citeimpact {

/// counts[gold][predicted] over a fixed list of class names.
class ConfusionMatrix {
 public:
  /// Zero classes; a placeholder until assigned.
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> labels);
  explicit ConfusionMatrix(const LabelScheme& scheme) : ConfusionMatrix(scheme.labels()) {}
  ConfusionMatrix(std::vector<std::string> labels, std::vector<std::vector<std::size_t>> counts);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t num_classes() const { return labels_.size(); }
  std::size_t at(std::size_t gold, std::size_t predicted) const;
  void add(std::size_t gold, std::size_t predicted, std::size_t n = 1);

  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(std::size_t gold) const;
  std::size_t column_sum(std::size_t predicted) const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> counts_;
};

/// Tallies (gold, predicted) pairs. Sequences must be equally long, non-empty
/// and inside the label list.
ConfusionMatrix confusion(std::span<const std::size_t> gold, std::span<const std::size_t> predicted,
                          std::vector<std::string> labels);

/// diagonal / row sum, i.e. per-class recall. Absent for classes without gold instances.
std::vector<std::optional<double>> per_class_accuracy(const ConfusionMatrix& matrix);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

/// Precision/recall/F1 per class; a zero denominator yields 0.
std::vector<ClassScores> per_class_scores(const ConfusionMatrix& matrix);

/// F1 from TP/FP/FN pooled over classes.
double micro_f1(const ConfusionMatrix& matrix);

/// Unweighted mean of per-class F1. Classes without support contribute 0.
double macro_f1(const ConfusionMatrix& matrix);

struct EvaluationReport {
  ConfusionMatrix matrix;
  std::vector<std::optional<double>> class_accuracy;
  std::vector<ClassScores> class_scores;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::size_t instances = 0;
  /// Classes with no gold instances, whose F1 entered the macro mean as 0.
  std::vector<std::string> warnings;
};

EvaluationReport evaluate(const ConfusionMatrix& matrix);
EvaluationReport evaluate(std::span<const std::size_t> gold, std::span<const std::size_t> predicted,
                          std::vector<std::string> labels);

/// Cross-validation summary: fold-mean of every scalar (the averaged view) and
/// the metrics recomputed on the summed confusion matrix (the pooled view).
struct CvReport {
  std::size_t folds = 0;
  /// Fold means. Its matrix is the pooled (summed) matrix; a class accuracy is
  /// averaged over the folds where it is defined.
  EvaluationReport averaged;
  EvaluationReport pooled;
};

/// Throws PreconditionError on an empty list or differing label lists.
CvReport aggregate_cv(std::span<const EvaluationReport> reports);

}  // namespace citeimpact

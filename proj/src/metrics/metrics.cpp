#include "citeimpact/metrics/metrics.hpp"

#include "citeimpact/common/error.hpp"

namespace citeimpact {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {
  if (labels_.empty()) throw PreconditionError("confusion matrix needs at least one class");
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels,
                                 std::vector<std::vector<std::size_t>> counts)
    : ConfusionMatrix(std::move(labels)) {
  if (counts.size() != labels_.size()) throw PreconditionError("confusion matrix must be square");
  for (std::size_t g = 0; g < counts.size(); ++g) {
    if (counts[g].size() != labels_.size()) {
      throw PreconditionError("confusion matrix must be square");
    }
    for (std::size_t p = 0; p < counts[g].size(); ++p) add(g, p, counts[g][p]);
  }
}

std::size_t ConfusionMatrix::at(std::size_t gold, std::size_t predicted) const {
  return counts_.at(gold * labels_.size() + predicted);
}

void ConfusionMatrix::add(std::size_t gold, std::size_t predicted, std::size_t n) {
  if (gold >= labels_.size() || predicted >= labels_.size()) {
    throw PreconditionError("label outside the confusion matrix scheme");
  }
  counts_[gold * labels_.size() + predicted] += n;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t c = 0; c < labels_.size(); ++c) t += at(c, c);
  return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t gold) const {
  std::size_t t = 0;
  for (std::size_t p = 0; p < labels_.size(); ++p) t += at(gold, p);
  return t;
}

std::size_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::size_t t = 0;
  for (std::size_t g = 0; g < labels_.size(); ++g) t += at(g, predicted);
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.labels_ != labels_) throw PreconditionError("cannot add matrices of different schemes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix confusion(std::span<const std::size_t> gold, std::span<const std::size_t> predicted,
                          std::vector<std::string> labels) {
  if (gold.size() != predicted.size()) {
    throw PreconditionError("gold and predicted sequences differ in length (" +
                            std::to_string(gold.size()) + " vs " +
                            std::to_string(predicted.size()) + ")");
  }
  if (gold.empty()) throw PreconditionError("cannot evaluate an empty prediction set");
  ConfusionMatrix matrix(std::move(labels));
  for (std::size_t i = 0; i < gold.size(); ++i) matrix.add(gold[i], predicted[i]);
  return matrix;
}

std::vector<std::optional<double>> per_class_accuracy(const ConfusionMatrix& matrix) {
  std::vector<std::optional<double>> out(matrix.num_classes());
  for (std::size_t c = 0; c < matrix.num_classes(); ++c) {
    const auto row = matrix.row_sum(c);
    if (row > 0) out[c] = static_cast<double>(matrix.at(c, c)) / static_cast<double>(row);
  }
  return out;
}

namespace {

double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_from(double tp, double fp, double fn) {
  return ratio_or_zero(2.0 * tp, 2.0 * tp + fp + fn);
}

}  // namespace

std::vector<ClassScores> per_class_scores(const ConfusionMatrix& matrix) {
  std::vector<ClassScores> out(matrix.num_classes());
  for (std::size_t c = 0; c < matrix.num_classes(); ++c) {
    const double tp = static_cast<double>(matrix.at(c, c));
    const double fn = static_cast<double>(matrix.row_sum(c)) - tp;
    const double fp = static_cast<double>(matrix.column_sum(c)) - tp;
    out[c].precision = ratio_or_zero(tp, tp + fp);
    out[c].recall = ratio_or_zero(tp, tp + fn);
    out[c].f1 = f1_from(tp, fp, fn);
    out[c].support = matrix.row_sum(c);
  }
  return out;
}

double micro_f1(const ConfusionMatrix& matrix) {
  double tp = 0.0, fp = 0.0, fn = 0.0;
  for (std::size_t c = 0; c < matrix.num_classes(); ++c) {
    const double diag = static_cast<double>(matrix.at(c, c));
    tp += diag;
    fn += static_cast<double>(matrix.row_sum(c)) - diag;
    fp += static_cast<double>(matrix.column_sum(c)) - diag;
  }
  return f1_from(tp, fp, fn);
}

double macro_f1(const ConfusionMatrix& matrix) {
  double sum = 0.0;
  for (const auto& s : per_class_scores(matrix)) sum += s.f1;
  return sum / static_cast<double>(matrix.num_classes());
}

EvaluationReport evaluate(const ConfusionMatrix& matrix) {
  EvaluationReport report{matrix, per_class_accuracy(matrix), per_class_scores(matrix),
                          micro_f1(matrix), macro_f1(matrix), matrix.total(), {}};
  for (std::size_t c = 0; c < matrix.num_classes(); ++c) {
    if (matrix.row_sum(c) == 0) {
      report.warnings.push_back("class '" + matrix.labels()[c] +
                                "' has no gold instances; its F1 counts as 0 in macro-F1");
    }
  }
  return report;
}

EvaluationReport evaluate(std::span<const std::size_t> gold, std::span<const std::size_t> predicted,
                          std::vector<std::string> labels) {
  return evaluate(confusion(gold, predicted, std::move(labels)));
}

CvReport aggregate_cv(std::span<const EvaluationReport> reports) {
  if (reports.empty()) throw PreconditionError("cannot aggregate zero fold reports");
  const auto& labels = reports.front().matrix.labels();
  ConfusionMatrix pooled(labels);
  for (const auto& r : reports) {
    if (r.matrix.labels() != labels) {
      throw PreconditionError("fold reports use different label schemes");
    }
    pooled += r.matrix;
  }

  const auto k = labels.size();
  const double n = static_cast<double>(reports.size());
  EvaluationReport averaged{pooled, std::vector<std::optional<double>>(k),
                            std::vector<ClassScores>(k), 0.0, 0.0, pooled.total(), {}};
  std::vector<std::size_t> defined(k, 0);
  std::vector<double> accuracy_sum(k, 0.0);
  for (const auto& r : reports) {
    averaged.micro_f1 += r.micro_f1;
    averaged.macro_f1 += r.macro_f1;
    for (std::size_t c = 0; c < k; ++c) {
      if (r.class_accuracy[c]) {
        accuracy_sum[c] += *r.class_accuracy[c];
        ++defined[c];
      }
      averaged.class_scores[c].precision += r.class_scores[c].precision;
      averaged.class_scores[c].recall += r.class_scores[c].recall;
      averaged.class_scores[c].f1 += r.class_scores[c].f1;
      averaged.class_scores[c].support += r.class_scores[c].support;
    }
    averaged.warnings.insert(averaged.warnings.end(), r.warnings.begin(), r.warnings.end());
  }
  averaged.micro_f1 /= n;
  averaged.macro_f1 /= n;
  for (std::size_t c = 0; c < k; ++c) {
    averaged.class_scores[c].precision /= n;
    averaged.class_scores[c].recall /= n;
    averaged.class_scores[c].f1 /= n;
    if (defined[c] > 0) averaged.class_accuracy[c] = accuracy_sum[c] / static_cast<double>(defined[c]);
  }
  return CvReport{reports.size(), std::move(averaged), evaluate(pooled)};
}

}  // namespace citeimpact

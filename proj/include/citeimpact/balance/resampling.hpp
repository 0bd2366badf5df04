#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "citeimpact/corpus/corpus.hpp"

namespace citeimpact {

/// Row-per-instance feature vectors of a common dimension, finite values only.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Eigen::MatrixXd rows);

  const Eigen::MatrixXd& rows() const { return rows_; }
  std::size_t size() const { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(rows_.cols()); }

 private:
  Eigen::MatrixXd rows_;
};

/// Where a synthetic point came from: base + lambda * (neighbor - base).
struct SmoteOrigin {
  std::size_t base = 0;
  std::size_t neighbor = 0;
  double lambda = 0.0;
};

struct SmoteResult {
  Eigen::MatrixXd features;
  std::vector<std::size_t> labels;
  std::vector<SmoteOrigin> origins;
};

/// Indices of the k nearest same-set neighbours of `row` among `candidates`
/// (Euclidean, the row itself excluded). Equal distances favour the lower index.
std::vector<std::size_t> nearest_neighbors(const Eigen::MatrixXd& points, std::size_t row,
                                           std::span<const std::size_t> candidates,
                                           std::size_t k);

/// SMOTE: synthesises target[c] - count[c] points for every class by
/// interpolating between a random member and one of its k nearest same-class
/// neighbours. A class that needs points must have at least k + 1 members.
SmoteResult smote(const FeatureMatrix& features, std::span<const std::size_t> labels,
                  std::size_t k_neighbors, std::span<const std::size_t> target_counts,
                  std::uint64_t seed);

/// Duplicates minority-class instances (drawn with replacement) until every
/// class matches the majority count. Originals come first, unchanged; copies
/// get fresh ids and meta["upsampled_from"].
Corpus random_upsample(const Corpus& corpus, std::uint64_t seed);

/// Tab-separated dump: label followed by the feature values.
void write_feature_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& features,
                          std::span<const std::size_t> labels);

}  // namespace citeimpact

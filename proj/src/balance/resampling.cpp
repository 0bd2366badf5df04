#include "citeimpact/balance/resampling.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "citeimpact/common/error.hpp"
#include "citeimpact/common/random.hpp"

namespace citeimpact {

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
  if (!rows_.allFinite()) throw PreconditionError("feature matrix holds non-finite values");
}

std::vector<std::size_t> nearest_neighbors(const Eigen::MatrixXd& points, std::size_t row,
                                           std::span<const std::size_t> candidates,
                                           std::size_t k) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(candidates.size());
  const auto origin = points.row(static_cast<Eigen::Index>(row));
  for (auto c : candidates) {
    if (c == row) continue;
    dist.emplace_back((points.row(static_cast<Eigen::Index>(c)) - origin).squaredNorm(), c);
  }
  const auto take = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < take; ++i) out.push_back(dist[i].second);
  return out;
}

SmoteResult smote(const FeatureMatrix& features, std::span<const std::size_t> labels,
                  std::size_t k_neighbors, std::span<const std::size_t> target_counts,
                  std::uint64_t seed) {
  if (labels.size() != features.size()) {
    throw PreconditionError("feature rows and labels differ in length");
  }
  if (k_neighbors == 0) throw PreconditionError("SMOTE needs k_neighbors >= 1");
  const auto num_classes = target_counts.size();
  std::vector<std::vector<std::size_t>> members(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw PreconditionError("label outside target count list");
    members[labels[i]].push_back(i);
  }

  const auto& points = features.rows();
  std::size_t total_new = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (target_counts[c] < members[c].size()) {
      throw PreconditionError("SMOTE target for class " + std::to_string(c) +
                              " is below its current count");
    }
    const auto deficit = target_counts[c] - members[c].size();
    if (deficit > 0 && members[c].size() < k_neighbors + 1) {
      throw PreconditionError("class " + std::to_string(c) + " has " +
                              std::to_string(members[c].size()) + " members, too few for k=" +
                              std::to_string(k_neighbors) + "; use k <= " +
                              std::to_string(members[c].empty() ? 0 : members[c].size() - 1));
    }
    total_new += deficit;
  }

  SmoteResult result;
  result.features.resize(static_cast<Eigen::Index>(total_new), points.cols());
  Rng rng(seed);
  Eigen::Index out_row = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const auto deficit = target_counts[c] - members[c].size();
    if (deficit == 0) continue;
    std::vector<std::vector<std::size_t>> neighbors(members[c].size());
    for (std::size_t m = 0; m < members[c].size(); ++m) {
      neighbors[m] = nearest_neighbors(points, members[c][m], members[c], k_neighbors);
    }
    for (std::size_t n = 0; n < deficit; ++n) {
      const auto m = static_cast<std::size_t>(rng.bounded(members[c].size()));
      const auto& nn = neighbors[m];
      const auto neighbor = nn[static_cast<std::size_t>(rng.bounded(nn.size()))];
      const double lambda = rng.uniform();
      const auto base = members[c][m];
      result.features.row(out_row++) =
          points.row(static_cast<Eigen::Index>(base)) +
          lambda * (points.row(static_cast<Eigen::Index>(neighbor)) -
                    points.row(static_cast<Eigen::Index>(base)));
      result.labels.push_back(c);
      result.origins.push_back(SmoteOrigin{base, neighbor, lambda});
    }
  }
  return result;
}

Corpus random_upsample(const Corpus& corpus, std::uint64_t seed) {
  if (corpus.empty()) throw PreconditionError("cannot upsample an empty corpus");
  const auto counts = corpus.class_counts();
  const auto majority = *std::max_element(counts.begin(), counts.end());
  std::vector<std::vector<std::size_t>> members(counts.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) members[corpus[i].label].push_back(i);

  Rng rng(seed);
  std::vector<CitationInstance> out(corpus.begin(), corpus.end());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (members[c].empty()) continue;
    for (std::size_t n = counts[c]; n < majority; ++n) {
      const auto& source = corpus[members[c][rng.bounded(members[c].size())]];
      CitationInstance copy = source;
      copy.id = source.id + "#up" + std::to_string(out.size());
      copy.meta["upsampled_from"] = source.id;
      out.push_back(std::move(copy));
    }
  }
  return Corpus(corpus.name() + "-upsampled", corpus.scheme(), std::move(out));
}

void write_feature_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& features,
                          std::span<const std::size_t> labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    out << labels[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < features.cols(); ++c) out << '\t' << features(r, c);
    out << '\n';
  }
}

}  // namespace citeimpact

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "citeimpact/corpus/corpus.hpp"

namespace citeimpact {

enum class SplitKind { provided, fixed_ratio, kfold };

std::string_view to_string(SplitKind kind);
SplitKind split_kind_from_string(std::string_view name);

/// How a corpus is partitioned. `provided` means the dataset ships its own
/// splits (SciCite); the other kinds are computed from `seed`.
struct SplitPlan {
  SplitKind kind = SplitKind::fixed_ratio;
  double ratio = 0.7;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  bool stratified = true;

  void validate() const;
};

enum class SplitTag { train, test };

struct FixedSplit {
  Corpus train;
  Corpus test;
  /// Tag of every input instance, aligned with input order.
  std::vector<SplitTag> tags;
};

/// Train/test split with |train| = round(ratio * N). When stratified, per-class
/// train sizes come from largest-remainder rounding of ratio * count_c, so
/// they sum to the same total. Both halves keep input order.
FixedSplit fixed_split(const Corpus& corpus, double ratio, std::uint64_t seed,
                       bool stratified = true);

/// Largest-remainder apportionment of round(ratio * sum(counts)) over classes.
/// Ties on the remainder go to the lower class index.
std::vector<std::size_t> stratified_quota(const std::vector<std::size_t>& counts, double ratio);

struct FoldAssignment {
  std::size_t fold = 0;
  /// Indices into the input corpus, ascending.
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified k-fold partition. Within every class the fold sizes differ by at
/// most one. Throws PreconditionError naming the class when a class has fewer
/// than k members.
std::vector<FoldAssignment> kfold(const Corpus& corpus, std::size_t k, std::uint64_t seed);

/// Per-instance fold index derived from a kfold result.
std::vector<std::size_t> fold_index_of(const std::vector<FoldAssignment>& folds,
                                       std::size_t corpus_size);

/// Randomly drops instances of every class down to the smallest class count.
/// Survivors keep input order. Already balanced input is returned unchanged.
Corpus balance_downsample(const Corpus& train, std::uint64_t seed);

/// id,tag
std::string fixed_split_csv(const Corpus& corpus, const FixedSplit& split);
/// id,fold
std::string kfold_csv(const Corpus& corpus, const std::vector<FoldAssignment>& folds);

}  // namespace citeimpact

#include "citeimpact/splits/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "citeimpact/common/error.hpp"
#include "citeimpact/common/random.hpp"

namespace citeimpact {
namespace {

std::vector<std::vector<std::size_t>> members_by_class(const Corpus& corpus) {
  std::vector<std::vector<std::size_t>> members(corpus.scheme().size());
  for (std::size_t i = 0; i < corpus.size(); ++i) members[corpus[i].label].push_back(i);
  return members;
}

}  // namespace

std::string_view to_string(SplitKind kind) {
  switch (kind) {
    case SplitKind::provided: return "provided";
    case SplitKind::fixed_ratio: return "fixed_ratio";
    case SplitKind::kfold: return "kfold";
  }
  return "?";
}

SplitKind split_kind_from_string(std::string_view name) {
  if (name == "provided") return SplitKind::provided;
  if (name == "fixed_ratio" || name == "fixed") return SplitKind::fixed_ratio;
  if (name == "kfold") return SplitKind::kfold;
  throw FormatError("unknown split kind '" + std::string(name) + "'");
}

void SplitPlan::validate() const {
  if (kind == SplitKind::fixed_ratio && !(ratio > 0.0 && ratio < 1.0)) {
    throw PreconditionError("split ratio must lie in (0, 1)");
  }
  if (kind == SplitKind::kfold && k < 2) throw PreconditionError("k-fold needs k >= 2");
}

std::vector<std::size_t> stratified_quota(const std::vector<std::size_t>& counts, double ratio) {
  const auto total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  const auto target = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(total)));

  std::vector<std::size_t> quota(counts.size());
  std::vector<double> remainder(counts.size());
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const double exact = ratio * static_cast<double>(counts[c]);
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < target && i < order.size(); ++i) {
    const auto c = order[i];
    if (quota[c] < counts[c]) {
      ++quota[c];
      ++assigned;
    }
  }
  return quota;
}

FixedSplit fixed_split(const Corpus& corpus, double ratio, std::uint64_t seed, bool stratified) {
  SplitPlan{SplitKind::fixed_ratio, ratio, 2, seed, stratified}.validate();
  Rng rng(seed);
  std::vector<SplitTag> tags(corpus.size(), SplitTag::test);

  if (stratified) {
    auto members = members_by_class(corpus);
    for (std::size_t c = 0; c < members.size(); ++c) {
      if (members[c].empty()) {
        throw PreconditionError("stratified split impossible: class '" +
                                corpus.scheme().name(c) + "' has no instances");
      }
    }
    const auto quota = stratified_quota(corpus.class_counts(), ratio);
    for (std::size_t c = 0; c < members.size(); ++c) {
      rng.shuffle(std::span(members[c]));
      for (std::size_t j = 0; j < quota[c]; ++j) tags[members[c][j]] = SplitTag::train;
    }
  } else {
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span(order));
    const auto n_train =
        static_cast<std::size_t>(std::llround(ratio * static_cast<double>(corpus.size())));
    for (std::size_t j = 0; j < n_train; ++j) tags[order[j]] = SplitTag::train;
  }

  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (tags[i] == SplitTag::train ? train : test).push_back(i);
  }
  return FixedSplit{corpus.subset(train, corpus.name() + "-train"),
                    corpus.subset(test, corpus.name() + "-test"), std::move(tags)};
}

std::vector<FoldAssignment> kfold(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw PreconditionError("k-fold needs k >= 2");
  auto members = members_by_class(corpus);
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].size() < k) {
      throw PreconditionError("stratified " + std::to_string(k) + "-fold split infeasible: class '" +
                              corpus.scheme().name(c) + "' has only " +
                              std::to_string(members[c].size()) + " instances");
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> fold_of(corpus.size(), 0);
  // Each class is dealt round-robin starting where the previous class stopped,
  // so fold totals stay within one of each other as well.
  std::size_t offset = 0;
  for (auto& cls : members) {
    rng.shuffle(std::span(cls));
    for (std::size_t j = 0; j < cls.size(); ++j) fold_of[cls[j]] = (offset + j) % k;
    offset = (offset + cls.size()) % k;
  }

  std::vector<FoldAssignment> folds(k);
  for (std::size_t f = 0; f < k; ++f) folds[f].fold = f;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      (fold_of[i] == f ? folds[f].test : folds[f].train).push_back(i);
    }
  }
  return folds;
}

std::vector<std::size_t> fold_index_of(const std::vector<FoldAssignment>& folds,
                                       std::size_t corpus_size) {
  std::vector<std::size_t> out(corpus_size, folds.size());
  for (const auto& fold : folds) {
    for (auto i : fold.test) {
      if (i >= corpus_size) throw PreconditionError("fold index outside corpus");
      out[i] = fold.fold;
    }
  }
  return out;
}

Corpus balance_downsample(const Corpus& train, std::uint64_t seed) {
  if (train.empty()) throw PreconditionError("cannot balance an empty training corpus");
  auto members = members_by_class(train);
  const auto counts = train.class_counts();
  const auto minority = *std::min_element(counts.begin(), counts.end());
  if (std::all_of(counts.begin(), counts.end(), [&](auto c) { return c == minority; })) {
    return train;
  }
  Rng rng(seed);
  std::vector<std::size_t> keep;
  for (auto& cls : members) {
    rng.shuffle(std::span(cls));
    keep.insert(keep.end(), cls.begin(), cls.begin() + static_cast<std::ptrdiff_t>(minority));
  }
  std::sort(keep.begin(), keep.end());
  return train.subset(keep, train.name() + "-balanced");
}

std::string fixed_split_csv(const Corpus& corpus, const FixedSplit& split) {
  std::ostringstream out;
  out << "id,tag\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out << corpus[i].id << ',' << (split.tags[i] == SplitTag::train ? "train" : "test") << '\n';
  }
  return out.str();
}

std::string kfold_csv(const Corpus& corpus, const std::vector<FoldAssignment>& folds) {
  const auto fold_of = fold_index_of(folds, corpus.size());
  std::ostringstream out;
  out << "id,fold\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) out << corpus[i].id << ',' << fold_of[i] << '\n';
  return out.str();
}

}  // namespace citeimpact

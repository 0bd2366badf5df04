#include <doctest.h>

#include <algorithm>
#include <set>

#include "citeimpact/common/error.hpp"
#include "citeimpact/splits/splits.hpp"
#include "support/synthetic.hpp"

using namespace citeimpact;

TEST_CASE("stratified quota uses largest remainders") {
  // 0.7 * (829, 280, 7627) = (580.3, 196.0, 5338.9); target round(6115.2) = 6115.
  CHECK(stratified_quota({829, 280, 7627}, 0.7) == std::vector<std::size_t>{580, 196, 5339});
  CHECK(stratified_quota({5, 5}, 0.5) == std::vector<std::size_t>{3, 2});
  CHECK(stratified_quota({10, 0, 10}, 0.7) == std::vector<std::size_t>{7, 0, 7});
}

TEST_CASE("fixed split partitions and keeps class proportions") {
  const auto c = testing::counts_corpus({83, 28, 763}, Task::sentiment, 3);
  for (bool stratified : {true, false}) {
    const auto s = fixed_split(c, 0.7, 42, stratified);
    CHECK(s.train.size() + s.test.size() == c.size());
    CHECK(s.train.size() == 612);
    std::set<std::string> ids;
    for (const auto& i : s.train) ids.insert(i.id);
    for (const auto& i : s.test) CHECK(ids.insert(i.id).second);
    CHECK(ids.size() == c.size());
    if (stratified) CHECK(s.train.class_counts() == stratified_quota(c.class_counts(), 0.7));
    CHECK(std::count(s.tags.begin(), s.tags.end(), SplitTag::train) == 612);
  }
  const auto a = fixed_split(c, 0.7, 42);
  const auto b = fixed_split(c, 0.7, 42);
  CHECK(a.train == b.train);
  CHECK_FALSE(fixed_split(c, 0.7, 43).train == a.train);
  CHECK_THROWS_AS(fixed_split(c, 1.5, 1), PreconditionError);
}

TEST_CASE("kfold: partition, per-class balance, complement training sets") {
  const std::vector<std::size_t> counts = {73, 25, 700};
  const auto c = testing::counts_corpus(counts, Task::sentiment, 5);
  const auto folds = kfold(c, 10, 9);
  REQUIRE(folds.size() == 10);
  std::vector<std::size_t> seen(c.size(), 0);
  for (const auto& f : folds) {
    std::vector<std::size_t> per_class(3, 0);
    for (auto i : f.test) {
      ++seen[i];
      ++per_class[c[i].label];
    }
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(per_class[k] >= counts[k] / 10);
      CHECK(per_class[k] <= (counts[k] + 9) / 10);
    }
    CHECK(std::is_sorted(f.train.begin(), f.train.end()));
    std::vector<std::size_t> all;
    std::set_union(f.train.begin(), f.train.end(), f.test.begin(), f.test.end(), std::back_inserter(all));
    CHECK(all.size() == c.size());
    CHECK(f.train.size() + f.test.size() == c.size());
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](auto n) { return n == 1; }));
  const auto idx = fold_index_of(folds, c.size());
  CHECK(idx.size() == c.size());
}

TEST_CASE("kfold rejects a class smaller than k and names it") {
  const auto c = testing::counts_corpus({30, 5, 30});
  try {
    kfold(c, 10, 1);
    FAIL("expected an error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("negative") != std::string::npos);
  }
}

TEST_CASE("balance_downsample") {
  const auto c = testing::counts_corpus({10, 4, 30});
  const auto d = balance_downsample(c, 3);
  CHECK(d.class_counts() == std::vector<std::size_t>{4, 4, 4});
  // Survivors keep input order.
  std::size_t pos = 0;
  for (const auto& i : d) {
    while (pos < c.size() && c[pos].id != i.id) ++pos;
    CHECK(pos < c.size());
  }
  const auto balanced = testing::counts_corpus({5, 5, 5});
  CHECK(balance_downsample(balanced, 1).instances() == balanced.instances());
}

TEST_CASE("split csv exports") {
  const auto c = testing::counts_corpus({10, 10, 10});
  const auto csv = kfold_csv(c, kfold(c, 5, 1));
  CHECK(csv.rfind("id,fold\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 31);
  const auto fixed = fixed_split_csv(c, fixed_split(c, 0.5, 1));
  CHECK(fixed.rfind("id,tag\n", 0) == 0);
}

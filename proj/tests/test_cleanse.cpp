#include <doctest.h>

#include <set>

#include "citeimpact/cleanse/cleanse.hpp"
#include "citeimpact/common/error.hpp"
#include "support/synthetic.hpp"

using namespace citeimpact;

TEST_CASE("normalize_text") {
  CHECK(normalize_text("  a \t b\n\nc  ") == "a b c");
  CHECK(normalize_text("cafe\xCC\x81") == "caf\xC3\xA9");
  CHECK(normalize_text("a\xC2\xA0 b") == "a b");
  CHECK(normalize_text("Case, Kept.") == "Case, Kept.");
}

TEST_CASE("conflict removal drops whole groups, dedupe keeps the first") {
  const auto s = LabelScheme::sentiment();
  const Corpus c("c", s,
                 {{"1", "same text", 0, {}},
                  {"2", "same  text", 2, {}},
                  {"3", "dup", 1, {}},
                  {"4", "other", 2, {}},
                  {"5", " dup ", 1, {}},
                  {"6", "same text", 0, {}}});
  const auto groups = find_duplicate_groups(c);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].members == std::vector<std::size_t>{0, 1, 5});
  CHECK(groups[1].members == std::vector<std::size_t>{2, 4});
  CHECK_THROWS_AS(dedupe_consistent(c), PreconditionError);

  const auto r = cleanse(c);
  CHECK(r.removed_conflicting.size() == 3);
  CHECK(r.removed_duplicate.size() == 1);
  CHECK(r.removed_duplicate[0].id == "5");
  REQUIRE(r.retained.size() == 2);
  CHECK(r.retained[0].id == "3");
  CHECK(r.retained[1].id == "4");
  CHECK(r.ledger[0].removed_conflicting == 2);
  CHECK(r.ledger[2].removed_conflicting == 1);
  CHECK(r.ledger[1].removed_duplicate == 1);
  CHECK(ledger_csv(r).rfind("class,input,removed_conflicting,removed_duplicate,removed_total,retained\n", 0) == 0);
}

TEST_CASE("planted corpora: ledger equals the plant, idempotence, conservation") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    CAPTURE(seed);
    const auto plant = testing::planted_cleanse_corpus(seed);
    const auto r = cleanse(plant.corpus);
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(r.ledger[c].input == plant.input[c]);
      CHECK(r.ledger[c].removed_conflicting == plant.removed_conflicting[c]);
      CHECK(r.ledger[c].removed_duplicate == plant.removed_duplicate[c]);
      CHECK(r.ledger[c].retained == plant.retained[c]);
      CHECK(r.ledger[c].input == r.ledger[c].retained + r.ledger[c].removed());
    }
    const auto again = cleanse(r.retained);
    CHECK(again.removed_conflicting.empty());
    CHECK(again.removed_duplicate.empty());
    CHECK(again.retained.instances() == r.retained.instances());

    std::set<std::string> ids;
    for (const auto& i : r.retained) ids.insert(i.id);
    for (const auto& i : r.removed_conflicting) CHECK(ids.insert(i.id).second);
    for (const auto& i : r.removed_duplicate) CHECK(ids.insert(i.id).second);
    CHECK(ids.size() == plant.corpus.size());
    CHECK(find_duplicate_groups(r.retained).empty());
  }
}

#include <doctest.h>

#include <fstream>
#include <nlohmann/json.hpp>

#include "citeimpact/common/error.hpp"
#include "citeimpact/corpus/loaders.hpp"
#include "citeimpact/corpus/stats.hpp"
#include "citeimpact/corpus/tokenizer.hpp"
#include "support/synthetic.hpp"

using namespace citeimpact;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("label schemes") {
  CHECK(LabelScheme::intent().labels() == std::vector<std::string>{"result", "method", "background"});
  CHECK(LabelScheme::sentiment().labels() == std::vector<std::string>{"positive", "negative", "neutral"});
  CHECK(LabelScheme::intent().index_of("method") == 1u);
  CHECK_FALSE(LabelScheme::intent().index_of("neutral"));
  CHECK_THROWS_AS(LabelScheme(Task::intent, {"a"}), PreconditionError);
  CHECK_THROWS_AS(LabelScheme(Task::intent, {"a", "a"}), PreconditionError);
  CHECK(task_from_string("sentiment") == Task::sentiment);
}

TEST_CASE("corpus construction validates ids, labels and text") {
  const auto s = LabelScheme::sentiment();
  CHECK_THROWS_AS(Corpus("c", s, {{"a", "x", 0, {}}, {"a", "y", 1, {}}}), PreconditionError);
  CHECK_THROWS_AS(Corpus("c", s, {{"a", "x", 3, {}}}), PreconditionError);
  CHECK_THROWS_AS(Corpus("c", s, {{"a", " \t ", 0, {}}}), PreconditionError);
  const Corpus c("c", s, {{"a", "x", 0, {}}, {"b", "y", 2, {}}, {"c", "z", 2, {}}});
  CHECK(c.class_counts() == std::vector<std::size_t>{1, 0, 2});
  const std::vector<std::size_t> pick = {2, 0};
  const auto sub = c.subset(pick, "sub");
  CHECK(sub.size() == 2);
  CHECK(sub[0].id == "c");
  CHECK(sub[1].id == "a");
}

TEST_CASE("tokenizer lowercases and splits punctuation") {
  Tokenizer t;
  CHECK(t.tokenize("Hello, World!") == std::vector<std::string>{"hello", ",", "world", "!"});
  CHECK(t.tokenize("  a\tb\nc ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(t.tokenize("(Smith et al., 2010)").size() == 8);
  CHECK(t.count("ÉCOLE normale") == 2);
  CHECK(t.tokenize("ÉCOLE")[0] == "école");
  CHECK(code_point_count("café") == 4);
  std::string bad = "ok\xFF";
  CHECK_FALSE(sanitize_utf8(bad));
  CHECK(bad == "ok\xEF\xBF\xBD");
}

TEST_CASE("csc loader parses codes, skips headers and reports bad lines") {
  const auto dir = testing::scratch_dir("csc-loader");
  write(dir / "csc.txt",
        "# comment\n"
        "Source_Paper\tTarget_Paper\tSentiment\tCitation_Text\n"
        "A01\tB02\to\tNeutral citation text .\n"
        "A01\tB03\tp\tGood\twork with a tab\r\n"
        "A02\tB04\tn\tThis fails .\n"
        "A02\tB04\tx\tunknown code\n"
        "broken line without tabs\n"
        "A03\tB05\to\t   \n");
  LoadDiagnostics diag;
  const auto c = load_csc(dir / "csc.txt", &diag);
  REQUIRE(c.size() == 3);
  CHECK(c.class_counts() == std::vector<std::size_t>{1, 1, 1});
  CHECK(c[1].text == "Good\twork with a tab");
  CHECK(c[0].meta.at("citing_paper") == "A01");
  CHECK(diag.skipped.size() == 3);
  CHECK_THROWS_AS(load_csc(dir / "missing.txt"), IoError);
}

TEST_CASE("scicite loader") {
  const auto dir = testing::scratch_dir("scicite-loader");
  write(dir / "train.jsonl",
        R"({"string": "We use their method .", "label": "method", "unique_id": "x1", "sectionName": "Methods"})"
        "\n"
        R"({"string": "Results agree .", "label": "result", "unique_id": "x2"})"
        "\n"
        "{not json\n"
        R"({"string": "Background .", "label": "background", "unique_id": "x1"})"
        "\n");
  LoadDiagnostics diag;
  const auto c = load_scicite_split(dir / "train.jsonl", "train", {}, &diag);
  REQUIRE(c.size() == 3);
  CHECK(c[0].label == 1);
  CHECK(c[0].meta.at("section") == "Methods");
  CHECK(c[2].id == "x1#L4");
  CHECK(diag.skipped.size() == 1);
  CHECK(diag.warnings.size() == 1);

  write(dir / "bad.jsonl", R"({"string": "x", "label": "praise"})" "\n");
  CHECK_THROWS_AS(load_scicite_split(dir / "bad.jsonl", "bad"), FormatError);
  write(dir / "empty.jsonl", "{oops\n");
  CHECK_THROWS_AS(load_scicite_split(dir / "empty.jsonl", "e"), FormatError);
}

TEST_CASE("corpus export round trip and version checks") {
  const auto dir = testing::scratch_dir("export");
  auto c = testing::counts_corpus({3, 4, 5});
  export_corpus(c, dir / "c.jsonl");
  const auto back = import_corpus(dir / "c.jsonl");
  CHECK(back == c);

  std::ifstream in(dir / "c.jsonl");
  std::string header, rest, line;
  std::getline(in, header);
  while (std::getline(in, line)) rest += line + "\n";
  auto j = nlohmann::json::parse(header);
  j["version"] = 99;
  write(dir / "v.jsonl", j.dump() + "\n" + rest);
  CHECK_THROWS_AS(import_corpus(dir / "v.jsonl"), VersionError);
  j["version"] = 1;
  j["count"] = 1000;
  write(dir / "n.jsonl", j.dump() + "\n" + rest);
  CHECK_THROWS_AS(import_corpus(dir / "n.jsonl"), IntegrityError);
  write(dir / "h.jsonl", "{\"format\":\"other\"}\n");
  CHECK_THROWS_AS(import_corpus(dir / "h.jsonl"), FormatError);
}

TEST_CASE("class distribution pooled over three intent splits") {
  // Per-split counts of the three intent classes; the overall row is their sum.
  const auto train = testing::counts_corpus({1109, 2294, 4840}, Task::intent, 1);
  const auto val = testing::counts_corpus({123, 255, 538}, Task::intent, 2);
  const auto test = testing::counts_corpus({259, 605, 997}, Task::intent, 3);
  const std::vector<Corpus> parts = {train, val, test};
  // counts_corpus ids collide across calls; give each part distinct ids first.
  std::vector<Corpus> distinct;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    std::vector<CitationInstance> items(parts[p].begin(), parts[p].end());
    for (auto& i : items) i.id = std::to_string(p) + "-" + i.id;
    distinct.emplace_back("part", parts[p].scheme(), std::move(items));
  }
  const auto all = concatenate(distinct, "overall");
  const auto d = class_distribution(all);
  CHECK(d.counts == std::vector<std::size_t>{1491, 3154, 6375});
  CHECK(format_percent(d.fractions[0]) == "13.53");
  CHECK(format_percent(d.fractions[1]) == "28.62");
  CHECK(format_percent(d.fractions[2]) == "57.85");
  CHECK(distribution_csv(class_distribution(train)).find("result,1109,") != std::string::npos);
  CHECK_THROWS_AS(class_distribution(Corpus::empty("e", LabelScheme::intent())), PreconditionError);
}

TEST_CASE("length statistics against a direct recount") {
  const auto c = testing::counts_corpus({20, 15, 30}, Task::sentiment, 11);
  Tokenizer tok;
  const auto s = length_stats(c, tok, 3);
  for (std::size_t label = 0; label < 3; ++label) {
    double tokens = 0, chars = 0;
    std::size_t n = 0, hist_total = 0;
    for (const auto& i : c) {
      if (i.label != label) continue;
      ++n;
      tokens += static_cast<double>(tok.count(i.text));
      chars += static_cast<double>(code_point_count(i.text));
    }
    const auto& pc = s.per_class[label];
    CHECK(pc.count == n);
    CHECK(*pc.mean_tokens == doctest::Approx(tokens / static_cast<double>(n)).epsilon(1e-12));
    CHECK(*pc.mean_chars == doctest::Approx(chars / static_cast<double>(n)).epsilon(1e-12));
    for (auto h : pc.token_histogram) hist_total += h;
    CHECK(hist_total == n);
  }
  const auto j = nlohmann::json::parse(length_histogram_json(s));
  CHECK(j.at("bucket_width") == 3);
  CHECK(j.at("classes").contains("neutral"));
}

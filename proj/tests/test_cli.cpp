#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "citeimpact/common/hash.hpp"
#include "citeimpact/corpus/loaders.hpp"
#include "support/synthetic.hpp"

using namespace citeimpact;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome run(const std::string& args, const fs::path& scratch) {
  const auto err_file = scratch / "stderr.txt";
  const std::string cmd = std::string(CITEIMPACT_CLI_PATH) + " " + args + " 2>" + err_file.string();
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) o.out.append(buf, n);
  const int raw = pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  o.err = slurp(err_file);
  return o;
}

}  // namespace

TEST_CASE("evaluate on identical gold and predictions scores 1") {
  const auto dir = testing::scratch_dir("cli-eval");
  {
    std::ofstream out(dir / "gold.csv");
    out << "id,label\na,positive\nb,neutral\nc,negative\nd,neutral\n";
  }
  const auto r = run("evaluate --gold " + (dir / "gold.csv").string() + " --pred " +
                         (dir / "gold.csv").string() + " --task sentiment",
                     dir);
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("micro_f1").get<double>() == 1.0);
  CHECK(j.at("macro_f1").get<double>() == 1.0);
  CHECK(j.at("instances") == 4);
}

TEST_CASE("usage errors exit nonzero with a structured message") {
  const auto dir = testing::scratch_dir("cli-usage");
  const auto r = run("stats --input x --no-such-flag", dir);
  CHECK(r.status == 2);
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j.at("error").at("kind") == "usage");
  const auto missing = run("clean --input " + (dir / "absent.txt").string() + " --out " +
                               (dir / "o").string(),
                           dir);
  CHECK(missing.status == 1);
  CHECK(nlohmann::json::parse(missing.err).at("error").at("kind") == "io");
}

TEST_CASE("clean writes a ledger and leaves its input untouched") {
  const auto dir = testing::scratch_dir("cli-clean");
  const auto plant = testing::planted_cleanse_corpus(12);
  export_corpus(plant.corpus, dir / "in.jsonl");
  const auto before = sha256_file(dir / "in.jsonl");
  const auto r = run("clean --input " + (dir / "in.jsonl").string() + " --out " + (dir / "out").string(), dir);
  REQUIRE(r.status == 0);
  CHECK(sha256_file(dir / "in.jsonl") == before);
  for (const char* f : {"corpus.jsonl", "ledger.csv", "removed.jsonl", "report.txt"}) {
    CHECK(fs::exists(dir / "out" / f));
  }
  const auto cleaned = import_corpus(dir / "out" / "corpus.jsonl");
  CHECK(cleaned.class_counts() == plant.retained);
  CHECK(r.out == slurp(dir / "out" / "ledger.csv"));
}

TEST_CASE("stats reports counts and percentages") {
  const auto dir = testing::scratch_dir("cli-stats");
  export_corpus(testing::counts_corpus({1, 2, 7}), dir / "c.jsonl");
  const auto r = run("stats --input " + (dir / "c.jsonl").string() + " --format csv --out " +
                         (dir / "out").string(),
                     dir);
  REQUIRE(r.status == 0);
  CHECK(r.out.find("positive,1,10.00") != std::string::npos);
  CHECK(r.out.find("neutral,7,70.00") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "length_histogram.json"));
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "amrsbmt/pipeline.hpp"
#include "amrsbmt/text.hpp"
#include "support/generators.hpp"

using namespace amrsbmt;
namespace fs = std::filesystem;

namespace {

fs::path toy_dir()
{
  return fs::path(AMRSBMT_DATA_DIR) / "toy";
}

fs::path scratch(const std::string& name)
{
  auto p = fs::temp_directory_path() / ("amrsbmt_test_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

PipelineConfig toy_config()
{
  auto c = PipelineConfig::load(toy_dir() / "toy.cfg");
  c.set("beam", "20");
  c.set("max_combinations", "100");
  return c;
}

std::vector<std::vector<std::string>> manifest_rows(const fs::path& run)
{
  std::vector<std::vector<std::string>> rows;
  for (const auto& line : split(slurp(run / "manifest.tsv"), '\n'))
    if (!line.empty())
      rows.push_back(split(line, '\t'));
  return rows;
}

}  // namespace

TEST_CASE("tokenizer splits punctuation but keeps numbers and inner hyphens")
{
  CHECK(tokenize("The soldier wasn't afraid, of dying.") ==
        std::vector<std::string>{"the", "soldier", "wasn't", "afraid", ",", "of", "dying", "."});
  CHECK(tokenize("It cost 3,000.50 dollars (roughly)!") ==
        std::vector<std::string>{"it", "cost", "3,000.50", "dollars", "(", "roughly", ")", "!"});
  CHECK(tokenize("state-of-the-art -x- 'quoted'", false) ==
        std::vector<std::string>{"state-of-the-art", "-", "x", "-", "'", "quoted", "'"});
  CHECK(tokenize("Keep CASE", false) == std::vector<std::string>{"Keep", "CASE"});
  CHECK(tokenize("   ").empty());
}

TEST_CASE("property: tokenizing twice changes nothing")
{
  testgen::Rng rng(71);
  const std::string alphabet = "ab1 .,-'!?()\"9:";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (std::size_t k = testgen::pick(rng, 25); k > 0; --k)
      s += alphabet[testgen::pick(rng, alphabet.size())];
    auto once = tokenize(s);
    CHECK_MESSAGE(tokenize(join(once, " ")) == once, s);
  }
}

TEST_CASE("config parses, writes and round-trips byte for byte")
{
  std::istringstream in("amrsbmt-config\t1\n# a comment\n\nbeam = 7\nrestructure = flat\ntrain_source = x.txt\n");
  auto c = PipelineConfig::parse(in, "/base");
  CHECK(c.integer("beam") == 7);
  CHECK(c.get("restructure") == "flat");
  CHECK(c.get("kbest") == "10");
  CHECK(c.path("train_source") == "/base/x.txt");
  CHECK(c.flag("lowercase"));

  auto text = c.to_string();
  CHECK(starts_with(text, "amrsbmt-config\t1\n"));
  std::istringstream again(text);
  CHECK(PipelineConfig::parse(again, "/base").to_string() == text);

  std::istringstream no_header("beam = 7\n");
  CHECK_THROWS(PipelineConfig::parse(no_header));
  std::istringstream unknown("amrsbmt-config\t1\nbeem = 7\n");
  CHECK_THROWS(PipelineConfig::parse(unknown));
  std::istringstream no_equals("amrsbmt-config\t1\nbeam 7\n");
  CHECK_THROWS(PipelineConfig::parse(no_equals));
}

TEST_CASE("config validation catches bad values and missing files")
{
  auto good = toy_config();
  CHECK_NOTHROW(good.validate());

  auto bad = [&](const char* key, const char* value) {
    auto c = good;
    c.set(key, value);
    return c;
  };
  CHECK_THROWS_AS(bad("beam", "-1").validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad("beam", "many").validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad("ngram_order", "0").validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad("restructure", "binary").validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad("tune", "ter").validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad("amr_lm", "maybe").validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad("train_amr", "missing.amr").validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad("train_source", "").validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad("semcat", "true").validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad("test_amr", "").validate(), std::invalid_argument);
  CHECK_THROWS(good.set("nonsense", "1"));
}

TEST_CASE("read_corpus checks that files agree")
{
  auto c = read_corpus((toy_dir() / "train.txt").string(), (toy_dir() / "train.amr").string(),
                       (toy_dir() / "train.align").string(), true);
  CHECK(c.size() == 50);
  CHECK(c.sources.size() == 50);
  CHECK(c.alignments.size() == 50);
  CHECK(join(c.sources[0], " ") == "the soldier was not afraid of dying .");
  CHECK_THROWS(read_corpus((toy_dir() / "dev.txt").string(), (toy_dir() / "train.amr").string(), "", true));
  CHECK_THROWS(read_corpus((toy_dir() / "train.txt").string(), (toy_dir() / "train.amr").string(),
                           (toy_dir() / "dev.align").string(), true));
}

TEST_CASE("full run writes every output and is deterministic")
{
  auto a = scratch("det_a"), b = scratch("det_b");
  auto c = toy_config();
  auto ra = run_pipeline(c, a, 1);
  auto rb = run_pipeline(c, b, 2);
  CHECK(ra.ok);
  CHECK(rb.ok);
  REQUIRE(ra.tune.has_value());
  REQUIRE(ra.test.has_value());
  CHECK(ra.test->f > 0.5);
  for (const char* f : {"config.txt", "manifest.tsv", "train.trees", "grammar.tsv", "ngram.lm", "amr.lm",
                        "weights.tsv", "tune.decoded.amr", "test.decoded.amr", "test.kbest", "scores.tsv"}) {
    CHECK_MESSAGE(fs::exists(a / f), f);
  }
  CHECK(slurp(a / "scores.tsv") == slurp(b / "scores.tsv"));
  CHECK(slurp(a / "test.decoded.amr") == slurp(b / "test.decoded.amr"));
  CHECK(slurp(a / "grammar.tsv") == slurp(b / "grammar.tsv"));

  auto rows = manifest_rows(a);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == std::vector<std::string>{"stage", "status", "outputs", "detail"});
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i][1] == "ok");

  // The written config reloads to the same settings.
  auto reloaded = PipelineConfig::load(a / "config.txt");
  CHECK(reloaded.get("beam") == "20");
}

TEST_CASE("a run without a test set reports n/a")
{
  auto dir = scratch("no_test");
  auto c = toy_config();
  c.set("test_source", "");
  c.set("test_amr", "");
  c.set("dev_source", "");
  c.set("dev_amr", "");
  c.set("dev_alignment", "");
  c.set("amr_lm", "false");
  auto r = run_pipeline(c, dir, 1);
  CHECK(r.ok);
  CHECK_FALSE(r.test.has_value());
  CHECK(slurp(dir / "scores.tsv") == "set\tprecision\trecall\tf\ntune\tn/a\tn/a\tn/a\ntest\tn/a\tn/a\tn/a\n");
  CHECK_FALSE(fs::exists(dir / "amr.lm"));
}

TEST_CASE("a failing stage is recorded and later stages are skipped")
{
  auto dir = scratch("failure");
  auto c = toy_config();
  c.set("train_alignment", "dev.align");  // 20 lines for 50 AMRs
  auto r = run_pipeline(c, dir, 1);
  CHECK_FALSE(r.ok);
  CHECK(r.failed_stage == "prepare");
  auto rows = manifest_rows(dir);
  REQUIRE(rows.size() == 7);
  CHECK(rows[1][1] == "ok");
  CHECK(rows[2][0] == "prepare");
  CHECK(rows[2][1] == "failed");
  CHECK_FALSE(rows[2].back().empty());
  for (std::size_t i = 3; i < rows.size(); ++i)
    CHECK(rows[i][1] == "skipped");

  auto invalid = scratch("invalid");
  auto bad = toy_config();
  bad.set("beam", "-3");
  auto r2 = run_pipeline(bad, invalid, 1);
  CHECK(r2.failed_stage == "validate");
}

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "amrsbmt/decoder.hpp"
#include "amrsbmt/pipeline.hpp"
#include "amrsbmt/text.hpp"
#include "support/generators.hpp"

using namespace amrsbmt;

namespace {

std::string toy(const char* name)
{
  return std::string(AMRSBMT_DATA_DIR) + "/toy/" + name;
}

struct Toy {
  ParallelCorpus corpus;
  TrainedSystem system;

  Toy()
  {
    corpus = read_corpus(toy("train.txt"), toy("train.amr"), toy("train.align"), true);
    system = train_system(corpus, {corpus.alignments}, {});
  }

  LanguageModels models(bool amr) const
  {
    LanguageModels m;
    for (const auto& [name, lm] : system.ngrams)
      m.ngrams.emplace_back(name, &lm);
    if (amr)
      m.amr = &*system.amr;
    return m;
  }
};

const Toy& shared_toy()
{
  static const Toy t;
  return t;
}

DecoderConfig exhaustive()
{
  DecoderConfig c;
  c.beam = 0;
  c.max_combinations = 0;
  c.rescore_k = 0;
  return c;
}

}  // namespace

TEST_CASE("weights read, write and dot")
{
  std::istringstream in("# comment\np_root 0.5\n\nglue -2\n");
  auto w = read_weights(in);
  CHECK(w.size() == 2);
  CHECK(w.at("glue") == -2.0);
  std::ostringstream out;
  write_weights(out, w);
  std::istringstream back(out.str());
  CHECK(read_weights(back) == w);
  std::istringstream bad("p_root\n");
  CHECK_THROWS(read_weights(bad));
  std::istringstream inf("p_root inf\n");
  CHECK_THROWS(read_weights(inf));
  CHECK(dot(w, {{"p_root", 2.0}, {"glue", 1.0}, {"unknown", 100.0}}) == doctest::Approx(-1.0));
  CHECK(default_weights().count("amr"));
}

TEST_CASE("rule features take logs of probabilities")
{
  TranslationRule r;
  r.target = parse_fragment("(aP a)");
  r.source = {{"a", -1}};
  r.features = {{"count", 4.0}, {"p_root", 0.5}, {"source_terminals", 1.0}};
  auto f = Decoder::rule_features(r);
  CHECK(f.at("count") == doctest::Approx(std::log(4.0)));
  CHECK(f.at("p_root") == doctest::Approx(std::log(0.5)));
  CHECK(f.at("source_terminals") == 1.0);
  CHECK(f.at("rules") == 1.0);
}

TEST_CASE("training trees can be force-decoded and never outscore the search")
{
  const auto& t = shared_toy();
  Decoder d(t.system.grammar, t.models(false), default_weights(), exhaustive());
  for (std::size_t i = 0; i < 15; ++i) {
    auto forced = d.force_decode(t.corpus.sources[i], t.system.trees[i]);
    REQUIRE(forced.kbest.size() == 1);
    CHECK(forced.kbest[0].tree == t.system.trees[i]);
    auto best = d.decode(t.corpus.sources[i]);
    REQUIRE_FALSE(best.kbest.empty());
    CHECK(best.kbest[0].score >= forced.kbest[0].score - 1e-9);
  }
}

TEST_CASE("the soldier sentence decodes to its own graph")
{
  const auto& t = shared_toy();
  Decoder d(t.system.grammar, t.models(true), default_weights(), exhaustive());
  auto r = d.decode(t.corpus.sources[0]);
  REQUIRE_FALSE(r.kbest.empty());
  CHECK_FALSE(r.glue);
  CHECK(canonical_form(to_amr(r.kbest[0].tree)) == canonical_form(to_amr(t.system.trees[0])));
}

TEST_CASE("k-best lists are sorted, unique and scored by the weights")
{
  const auto& t = shared_toy();
  DecoderConfig c;
  c.kbest = 20;
  Decoder d(t.system.grammar, t.models(true), default_weights(), c);
  for (std::size_t i = 0; i < 10; ++i) {
    auto r = d.decode(t.corpus.sources[i]);
    std::set<std::string> trees;
    for (std::size_t k = 0; k < r.kbest.size(); ++k) {
      const auto& h = r.kbest[k];
      CHECK(trees.insert(to_string(h.tree)).second);
      CHECK(h.score == doctest::Approx(dot(default_weights(), h.features)).epsilon(1e-12));
      if (k > 0)
        CHECK(h.score <= r.kbest[k - 1].score);
    }
    CHECK(r.kbest.size() <= 20);
  }
}

TEST_CASE("exhaustive search is never beaten by a beam")
{
  const auto& t = shared_toy();
  Decoder full(t.system.grammar, t.models(false), default_weights(), exhaustive());
  for (std::size_t beam : {1u, 3u, 10u}) {
    DecoderConfig c = exhaustive();
    c.beam = beam;
    Decoder narrow(t.system.grammar, t.models(false), default_weights(), c);
    for (std::size_t i = 0; i < 10; ++i) {
      auto a = full.decode(t.corpus.sources[i]);
      auto b = narrow.decode(t.corpus.sources[i]);
      if (!a.glue && !b.glue)
        CHECK(a.kbest[0].score >= b.kbest[0].score - 1e-9);
      CHECK(a.chart_items >= b.chart_items);
    }
  }
}

TEST_CASE("unknown words and unparseable input")
{
  const auto& t = shared_toy();
  Decoder d(t.system.grammar, t.models(true), default_weights(), {});
  auto one = d.decode({"zebra"});
  REQUIRE(one.kbest.size() == 1);
  CHECK_FALSE(one.glue);
  CHECK(to_string(one.kbest[0].tree) == "(X (zebraP zebra))");
  CHECK(one.kbest[0].features.at("oov") == 1.0);

  auto glued = d.decode(split_whitespace("the the of ."));
  CHECK(glued.glue);
  REQUIRE(glued.kbest.size() == 1);
  CHECK(glued.kbest[0].features.at("glue") == 1.0);
  CHECK_NOTHROW(derivation_to_amr(glued.kbest[0].tree).validate());

  auto empty = d.decode({});
  CHECK(empty.glue);
  CHECK(derivation_to_amr(empty.kbest[0].tree).concept_of(derivation_to_amr(empty.kbest[0].tree).root) ==
        "amr-empty");

  auto two = d.decode(split_whitespace("zebra . giraffe"));
  REQUIRE_FALSE(two.kbest.empty());
  CHECK_NOTHROW(derivation_to_amr(two.kbest[0].tree).validate());
}

TEST_CASE("derivation_to_amr splits glued fragments")
{
  auto multi = derivation_to_amr(parse_tree("(X (multi-sentenceP multi-sentence) (snt1P snt1) (X (boyP boy)) "
                                            "(snt2P snt2) (X (girlP girl)))"));
  CHECK(multi.concept_of(multi.root) == "multi-sentence");
  CHECK(multi.instance_count() == 3);
  auto broken = derivation_to_amr(parse_tree("(X (ARG0P ARG0) (X (boyP boy)))"));
  CHECK_NOTHROW(broken.validate());
  CHECK(derivation_to_amr(parse_tree("(Y (ARG0P ARG0))")).concept_of(
            derivation_to_amr(parse_tree("(Y (ARG0P ARG0))")).root) == "amr-empty");
}

TEST_CASE("property: random word strings always decode to a valid AMR")
{
  const auto& t = shared_toy();
  DecoderConfig c;
  c.beam = 20;
  c.max_combinations = 50;
  Decoder d(t.system.grammar, t.models(true), default_weights(), c);
  std::vector<std::string> vocab;
  for (const auto& s : t.corpus.sources)
    for (const auto& w : s)
      vocab.push_back(w);
  vocab.push_back("unseen");
  testgen::Rng rng(51);
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> words;
    for (std::size_t k = 1 + testgen::pick(rng, 7); k > 0; --k)
      words.push_back(testgen::choose(rng, vocab));
    auto r = d.decode(words);
    REQUIRE_FALSE(r.kbest.empty());
    for (const auto& h : r.kbest) {
      CHECK_NOTHROW(derivation_to_amr(h.tree).validate());
      CHECK(std::isfinite(h.score));
    }
  }
}

TEST_CASE("parallel decoding matches serial decoding")
{
  const auto& t = shared_toy();
  Decoder d(t.system.grammar, t.models(true), default_weights(), {});
  auto serial = d.decode_corpus(t.corpus.sources, 1);
  auto parallel = d.decode_corpus(t.corpus.sources, 3);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    REQUIRE(serial[i].kbest.size() == parallel[i].kbest.size());
    for (std::size_t k = 0; k < serial[i].kbest.size(); ++k) {
      CHECK(serial[i].kbest[k].tree == parallel[i].kbest[k].tree);
      CHECK(serial[i].kbest[k].score == parallel[i].kbest[k].score);
    }
  }
}

TEST_CASE("k-best line format")
{
  Hypothesis h;
  h.tree = parse_tree("(X (boyP boy))");
  h.score = -1.5;
  auto line = format_kbest_line(3, h);
  CHECK(starts_with(line, "3 ||| -1.5 ||| boy ||| (v0 / boy)"));
}

#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "amrsbmt/grammar.hpp"
#include "amrsbmt/pipeline.hpp"
#include "amrsbmt/text.hpp"
#include "support/generators.hpp"

using namespace amrsbmt;

namespace {

const char* kSoldier = "(f / fear-01 :ARG0 (s / soldier) :ARG1 (d / die-01 :ARG1 s) :polarity -)";
const char* kSoldierAlign = "1-s 3-f.polarity.1 4-f 6-d";

TreeifyResult soldier()
{
  return treeify(parse_penman(kSoldier), parse_alignment(kSoldierAlign), {});
}

std::vector<std::string> soldier_source()
{
  return split_whitespace("the soldier was not afraid of dying .");
}

// Frontier by definition: span = aligned positions below the node; the node is
// on the frontier when no position inside [min, max] is aligned elsewhere.
// Terminals stay literal inside their preterminal's rule.
std::vector<bool> frontier_oracle(const SbmtTree& tree, const LeafAlignment& links)
{
  std::vector<std::pair<int, int>> leaf_range;  // per preorder node
  std::vector<bool> terminal;
  int next_leaf = 0;
  std::function<void(const SbmtTree&)> walk = [&](const SbmtTree& n) {
    const std::size_t me = leaf_range.size();
    leaf_range.emplace_back(next_leaf, next_leaf);
    terminal.push_back(n.is_terminal());
    if (n.is_terminal())
      ++next_leaf;
    for (const auto& c : n.children)
      walk(c);
    leaf_range[me].second = next_leaf;
  };
  walk(tree);
  std::vector<bool> out;
  for (std::size_t i = 0; i < leaf_range.size(); ++i) {
    auto [lo, hi] = leaf_range[i];
    std::set<int> inside, outside;
    for (const auto& l : links)
      (l.leaf >= lo && l.leaf < hi ? inside : outside).insert(l.source);
    bool ok = !inside.empty() && !terminal[i];
    if (ok)
      for (int s : outside)
        if (s >= *inside.begin() && s <= *inside.rbegin())
          ok = false;
    out.push_back(i == 0 || ok);
  }
  return out;
}

std::size_t fragment_nodes(const RuleNode& n)
{
  if (n.is_variable())
    return 0;
  std::size_t k = 1;
  for (const auto& c : n.children)
    k += fragment_nodes(c);
  return k;
}

}  // namespace

TEST_CASE("minimal rules for the soldier sentence")
{
  auto t = soldier();
  auto rules = extract_minimal_rules(soldier_source(), t.tree, t.alignment);
  std::vector<std::string> got;
  for (const auto& r : rules)
    got.push_back(r.root() + " | " + r.source_string() + " | " + r.target_string());
  const std::vector<std::string> want = {
      "X | the x0 was x1 . | (X (ARG0P ARG0) x0:X x1:ROOT)",
      "X | x0 | (X x0:soldierP)",
      "soldierP | soldier | (soldierP soldier)",
      "ROOT | x0 of x1 | (ROOT x0:ROOT (ARG1P ARG1) x1:X)",
      "ROOT | x0 x1 | (ROOT x0:polarityP (Spolarity -) x1:fear-01P)",
      "polarityP | not | (polarityP polarity)",
      "fear-01P | afraid | (fear-01P fear-01)",
      "X | x0 | (X x0:die-01P (ARG1P ARG1) (X (*P *)))",
      "die-01P | dying | (die-01P die-01)",
  };
  CHECK(got == want);
  for (const auto& r : rules)
    CHECK(r.features.at("count") == 1.0);
}

TEST_CASE("frontier set of the soldier tree")
{
  auto t = soldier();
  auto f = frontier_set(t.tree, t.alignment);
  auto nodes = preorder(t.tree);
  REQUIRE(f.size() == nodes.size());
  CHECK(f == frontier_oracle(t.tree, t.alignment));
  // The unaligned role label and the placeholder are never on the frontier.
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i]->label == "ARG0P" || nodes[i]->label == "*P" || nodes[i]->label == "Spolarity")
      CHECK_FALSE(f[i]);
}

TEST_CASE("fragments and rules print and parse")
{
  for (const char* text : {"(X (ARG0P ARG0) x0:X x1:ROOT)", "(X x0:die-01P (ARG1P ARG1) (X (*P *)))",
                           "(polarityP polarity)", "(X (nameP name) (X \"New York\"))", "(X (aP \\x0))"}) {
    auto frag = parse_fragment(text);
    CHECK(to_string(frag) == text);
  }
  auto frag = parse_fragment("(X (aP \\x0))");
  CHECK(frag.children[0].children[0].is_terminal());
  CHECK(frag.children[0].children[0].label == "x0");
  CHECK_THROWS(parse_fragment("(X x0:Y"));
}

TEST_CASE("grammar merges duplicates and scores relative frequencies")
{
  auto t = soldier();
  RuleGrammar g;
  for (int k = 0; k < 2; ++k)
    for (auto& r : extract_minimal_rules(soldier_source(), t.tree, t.alignment))
      g.add(r);
  CHECK(g.size() == 9);
  for (const auto& r : g.rules())
    CHECK(r.features.at("count") == 2.0);
  g.score();
  for (const auto& r : g.rules()) {
    if (r.root() == "X")
      CHECK(r.features.at("p_root") == doctest::Approx(1.0 / 3).epsilon(1e-12));
    if (r.root() == "ROOT")
      CHECK(r.features.at("p_root") == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.features.at("variables") == static_cast<double>(r.variable_count()));
  }
  // Two rules share source side x0.
  int shared = 0;
  for (const auto& r : g.rules())
    shared += r.features.at("unique_source") == 0.0;
  CHECK(shared == 2);
  CHECK(g.by_root("ROOT").size() == 2);
  CHECK(g.by_first_terminal("the").size() == 1);
  CHECK(g.has_terminal("of"));
  CHECK_FALSE(g.has_terminal("zebra"));
}

TEST_CASE("grammar save and load round trip")
{
  auto t = soldier();
  RuleGrammar g;
  for (auto& r : extract_minimal_rules(soldier_source(), t.tree, t.alignment))
    g.add(r);
  g.score();
  std::stringstream buf;
  g.save(buf);
  auto back = RuleGrammar::load(buf);
  REQUIRE(back.size() == g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(back[i].target == g[i].target);
    CHECK(back[i].source == g[i].source);
    CHECK(back[i].features == g[i].features);
  }
  std::stringstream again;
  back.save(again);
  CHECK(again.str() == buf.str());
}

TEST_CASE("property: frontier and rule coverage on random pairs")
{
  testgen::Rng rng(41);
  RuleGrammar grammar;
  for (int i = 0; i < 300; ++i) {
    auto g = testgen::random_amr(rng);
    auto p = testgen::random_aligned_pair(rng, g);
    TreeifyOptions o;
    o.mode = i % 3 == 0 ? RestructureMode::flat : RestructureMode::role_label;
    auto t = treeify(g, p.alignment, o);
    CHECK(frontier_set(t.tree, t.alignment) == frontier_oracle(t.tree, t.alignment));

    auto rules = extract_minimal_rules(p.source, t.tree, t.alignment);
    REQUIRE_FALSE(rules.empty());
    CHECK(rules.front().root() == t.tree.label);
    // Every source position and every tree node belongs to exactly one rule.
    std::size_t terminals = 0, nodes = 0;
    for (const auto& r : rules) {
      for (const auto& s : r.source)
        terminals += !s.is_variable();
      nodes += fragment_nodes(r.target);
      std::size_t vars = 0;
      for (const auto& s : r.source)
        vars += s.is_variable();
      CHECK(vars == r.variable_count());
    }
    CHECK(terminals == p.source.size());
    CHECK(nodes == node_count(t.tree));
    for (auto& r : rules)
      grammar.add(r);
  }
  grammar.score();
  std::map<std::string, double> root_mass, src_mass;
  for (const auto& r : grammar.rules()) {
    root_mass[r.root()] += r.features.at("p_root");
    src_mass[r.target_string()] += r.features.at("p_src");
  }
  for (const auto& [root, m] : root_mass)
    CHECK(m == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& [target, m] : src_mass)
    CHECK(m == doctest::Approx(1.0).epsilon(1e-9));
}

#pragma once

// String-to-tree rules extracted with minimal GHKM.
//
// A node is on the frontier when its aligned source positions are non-empty
// and the interval they span contains no position aligned outside the node.
// The root is always on the frontier and covers the whole sentence. Each
// frontier node yields one minimal rule whose target fragment stops at the
// nearest frontier descendants (variables) and whose source side is the
// node's interval with the descendants' intervals replaced by variables.
// Unaligned source positions therefore belong to the lowest rule whose
// interval contains them.
//
// Grammar file, one rule per line:
//   root<TAB>source side<TAB>target fragment<TAB>name=value,...
// Variables are written x0, x1, ... numbered in target order; in the fragment
// a variable site is xK:LABEL. Literal tokens that look like variables or
// start with a backslash are prefixed with a backslash.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "amrsbmt/alignment.hpp"
#include "amrsbmt/tree.hpp"

namespace amrsbmt {

using FeatureVector = std::map<std::string, double>;

struct RuleNode {
  std::string label;
  std::vector<RuleNode> children;
  int variable = -1;  // >= 0 for a variable site labeled `label`

  bool is_variable() const { return variable >= 0; }
  bool is_terminal() const { return variable < 0 && children.empty(); }

  friend bool operator==(const RuleNode&, const RuleNode&) = default;
};

// A source-side item: a terminal token or a variable index.
struct SourceItem {
  std::string token;
  int variable = -1;

  bool is_variable() const { return variable >= 0; }
  friend bool operator==(const SourceItem&, const SourceItem&) = default;
};

struct TranslationRule {
  RuleNode target;
  std::vector<SourceItem> source;
  FeatureVector features;

  const std::string& root() const { return target.label; }
  std::size_t variable_count() const;
  // Label of each variable site, indexed by variable number.
  std::vector<std::string> variable_labels() const;
  std::string source_string() const;
  std::string target_string() const;
};

std::string to_string(const RuleNode& fragment);
RuleNode parse_fragment(std::string_view text);

// Frontier flags for the nodes of `tree` in preorder (terminals included).
std::vector<bool> frontier_set(const SbmtTree& tree, const LeafAlignment& alignment);

// Nodes of `tree` in preorder, the indexing used by frontier_set.
std::vector<const SbmtTree*> preorder(const SbmtTree& tree);

// Minimal rules in preorder of their frontier nodes. Each rule carries
// `count` = 1.
std::vector<TranslationRule> extract_minimal_rules(const std::vector<std::string>& source, const SbmtTree& tree,
                                                   const LeafAlignment& alignment);

class RuleGrammar {
 public:
  // Adds a rule, merging with an existing (source, target) pair by summing
  // the `count` feature.
  void add(TranslationRule rule);

  // Recomputes the statistical features from counts:
  //   p_root          count / total count of rules with the same root
  //   p_src           count / total count of rules with the same target fragment
  //   unique_source   1 when no other rule has the same source side
  //   source_terminals, variables
  void score();

  const std::vector<TranslationRule>& rules() const { return rules_; }
  std::size_t size() const { return rules_.size(); }
  const TranslationRule& operator[](std::size_t i) const { return rules_[i]; }

  const std::vector<std::size_t>& by_root(const std::string& label) const;
  const std::vector<std::size_t>& by_first_terminal(const std::string& token) const;
  // Rules whose source side starts with a variable.
  const std::vector<std::size_t>& variable_initial() const { return variable_initial_; }
  bool has_terminal(const std::string& token) const { return by_first_terminal_.count(token) || terminals_.count(token); }

  void save(std::ostream& out) const;
  static RuleGrammar load(std::istream& in);

 private:
  void index(std::size_t i);

  std::vector<TranslationRule> rules_;
  std::unordered_map<std::string, std::size_t> key_index_;
  std::map<std::string, std::vector<std::size_t>> by_root_;
  std::map<std::string, std::vector<std::size_t>> by_first_terminal_;
  std::map<std::string, std::size_t> terminals_;
  std::vector<std::size_t> variable_initial_;
};

}  // namespace amrsbmt

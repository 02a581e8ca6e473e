#pragma once

// Ordered trees in the form consumed by string-to-tree rule extraction.
//
// Bracketed form: (LABEL child ...), preterminals as (labelP token). Tokens
// that begin with a double quote run to the closing quote and may contain
// spaces or parentheses.

#include <string>
#include <string_view>
#include <vector>

namespace amrsbmt {

struct SbmtTree {
  std::string label;
  std::vector<SbmtTree> children;

  bool is_terminal() const { return children.empty(); }
  bool is_preterminal() const { return children.size() == 1 && children.front().is_terminal(); }

  friend bool operator==(const SbmtTree&, const SbmtTree&) = default;
};

inline SbmtTree terminal(std::string token) { return SbmtTree{std::move(token), {}}; }
inline SbmtTree preterminal(std::string label, std::string token)
{
  return SbmtTree{std::move(label), {terminal(std::move(token))}};
}

std::string to_string(const SbmtTree& tree);
SbmtTree parse_tree(std::string_view text);

// Terminal tokens left to right.
std::vector<std::string> leaves(const SbmtTree& tree);
std::size_t leaf_count(const SbmtTree& tree);
std::size_t node_count(const SbmtTree& tree);
std::size_t max_arity(const SbmtTree& tree);

// Bracket-token scanner shared with the grammar reader.
std::vector<std::string> tokenize_brackets(std::string_view text);

}  // namespace amrsbmt

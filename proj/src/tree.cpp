#include "amrsbmt/tree.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace amrsbmt {

namespace {

void render(const SbmtTree& t, std::string& out)
{
  if (t.is_terminal()) {
    out += t.label;
    return;
  }
  out += '(';
  out += t.label;
  for (const auto& c : t.children) {
    out += ' ';
    render(c, out);
  }
  out += ')';
}

SbmtTree parse_node(const std::vector<std::string>& toks, std::size_t& pos)
{
  if (pos >= toks.size())
    throw std::invalid_argument("tree: unexpected end of input");
  if (toks[pos] != "(") {
    if (toks[pos] == ")")
      throw std::invalid_argument("tree: unexpected ')'");
    return terminal(toks[pos++]);
  }
  ++pos;
  if (pos >= toks.size() || toks[pos] == "(" || toks[pos] == ")")
    throw std::invalid_argument("tree: node without a label");
  SbmtTree node{toks[pos++], {}};
  while (pos < toks.size() && toks[pos] != ")")
    node.children.push_back(parse_node(toks, pos));
  if (pos >= toks.size())
    throw std::invalid_argument("tree: unbalanced parentheses");
  ++pos;
  if (node.children.empty())
    throw std::invalid_argument("tree: node '" + node.label + "' has no children");
  return node;
}

void collect_leaves(const SbmtTree& t, std::vector<std::string>& out)
{
  if (t.is_terminal()) {
    out.push_back(t.label);
    return;
  }
  for (const auto& c : t.children)
    collect_leaves(c, out);
}

}  // namespace

std::vector<std::string> tokenize_brackets(std::string_view text)
{
  std::vector<std::string> toks;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(' || c == ')') {
      toks.emplace_back(1, c);
      ++i;
    } else {
      std::size_t j = i;
      if (c == '"') {
        ++j;
        while (j < text.size() && text[j] != '"') {
          if (text[j] == '\\')
            ++j;
          ++j;
        }
        if (j >= text.size())
          throw std::invalid_argument("tree: unterminated quoted token");
        ++j;
      }
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '(' &&
             text[j] != ')')
        ++j;
      toks.emplace_back(text.substr(i, j - i));
      i = j;
    }
  }
  return toks;
}

std::string to_string(const SbmtTree& tree)
{
  std::string out;
  render(tree, out);
  return out;
}

SbmtTree parse_tree(std::string_view text)
{
  auto toks = tokenize_brackets(text);
  std::size_t pos = 0;
  SbmtTree t = parse_node(toks, pos);
  if (pos != toks.size())
    throw std::invalid_argument("tree: trailing tokens");
  return t;
}

std::vector<std::string> leaves(const SbmtTree& tree)
{
  std::vector<std::string> out;
  collect_leaves(tree, out);
  return out;
}

std::size_t leaf_count(const SbmtTree& tree)
{
  if (tree.is_terminal())
    return 1;
  std::size_t n = 0;
  for (const auto& c : tree.children)
    n += leaf_count(c);
  return n;
}

std::size_t node_count(const SbmtTree& tree)
{
  std::size_t n = 1;
  for (const auto& c : tree.children)
    n += node_count(c);
  return n;
}

std::size_t max_arity(const SbmtTree& tree)
{
  std::size_t m = tree.children.size();
  for (const auto& c : tree.children)
    m = std::max(m, max_arity(c));
  return m;
}

}  // namespace amrsbmt

#include "amrsbmt/alignment.hpp"

#include <algorithm>
#include <map>

#include "amrsbmt/text.hpp"

namespace amrsbmt {

std::string AmrElement::path() const
{
  if (is_instance())
    return var;
  return var + "." + role + "." + std::to_string(occurrence);
}

AlignmentSet parse_alignment(std::string_view line)
{
  AlignmentSet out;
  for (const auto& item : split_whitespace(line)) {
    auto dash = item.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == item.size())
      throw AmrError("malformed alignment link '" + item + "'");
    ElementLink link;
    try {
      link.token = std::stoi(item.substr(0, dash));
    } catch (const std::exception&) {
      throw AmrError("malformed alignment link '" + item + "'");
    }
    auto parts = split(item.substr(dash + 1), '.');
    link.element.var = parts[0];
    if (parts.size() == 2 || (parts.size() > 1 && parts[0].empty()))
      throw AmrError("malformed alignment path in '" + item + "'");
    if (parts.size() >= 3) {
      std::vector<std::string> mid(parts.begin() + 1, parts.end() - 1);
      link.element.role = join(mid, ".");
      try {
        link.element.occurrence = std::stoi(parts.back());
      } catch (const std::exception&) {
        throw AmrError("malformed occurrence in '" + item + "'");
      }
      if (link.element.occurrence < 1 || link.element.role.empty())
        throw AmrError("malformed alignment path in '" + item + "'");
    }
    out.links.push_back(std::move(link));
  }
  return out;
}

std::string format_alignment(const AlignmentSet& alignment)
{
  std::vector<std::string> items;
  for (const auto& l : alignment.links)
    items.push_back(std::to_string(l.token) + "-" + l.element.path());
  return join(items, " ");
}

void check_alignment(const AlignmentSet& alignment, const AmrGraph& graph, std::size_t source_length)
{
  for (const auto& l : alignment.links) {
    if (l.token < 0 || static_cast<std::size_t>(l.token) >= source_length)
      throw AmrError("alignment token index " + std::to_string(l.token) + " out of range");
    if (!graph.has_instance(l.element.var))
      throw AmrError("alignment refers to unknown variable '" + l.element.var + "'");
    if (l.element.is_instance())
      continue;
    int seen = 0;
    for (auto idx : graph.roles_of(l.element.var))
      if (graph.roles[idx].label == l.element.role)
        ++seen;
    if (seen < l.element.occurrence)
      throw AmrError("alignment refers to missing role '" + l.element.path() + "'");
  }
}

std::size_t count_crossings(const LeafAlignment& links)
{
  std::size_t n = 0;
  for (std::size_t a = 0; a < links.size(); ++a)
    for (std::size_t b = 0; b < links.size(); ++b)
      if (links[a].source < links[b].source && links[a].leaf > links[b].leaf)
        ++n;
  return n;
}

}  // namespace amrsbmt

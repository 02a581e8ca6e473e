#pragma once

// Word alignments between source tokens and AMR elements, and their
// projection onto tree leaves.
//
// Alignment lines hold space-separated `tok-path` links. A path is `var` for
// an instance (projects to its concept leaf) or `var.role.k` for the k-th
// (1-based) occurrence of `:role` under `var` (projects to the role-label
// leaf).

#include <string>
#include <string_view>
#include <vector>

#include "amrsbmt/amr.hpp"

namespace amrsbmt {

struct AmrElement {
  std::string var;
  std::string role;  // empty for instances
  int occurrence = 0;

  bool is_instance() const { return role.empty(); }
  std::string path() const;

  friend bool operator==(const AmrElement&, const AmrElement&) = default;
  friend auto operator<=>(const AmrElement&, const AmrElement&) = default;
};

struct ElementLink {
  int token = 0;
  AmrElement element;

  friend bool operator==(const ElementLink&, const ElementLink&) = default;
  friend auto operator<=>(const ElementLink&, const ElementLink&) = default;
};

struct AlignmentSet {
  std::vector<ElementLink> links;
};

AlignmentSet parse_alignment(std::string_view line);
std::string format_alignment(const AlignmentSet& alignment);

// Throws AmrError when an element is missing from `graph` or a token index is
// outside [0, source_length).
void check_alignment(const AlignmentSet& alignment, const AmrGraph& graph, std::size_t source_length);

// A link between a source position and a tree leaf position.
struct LeafLink {
  int source = 0;
  int leaf = 0;

  friend bool operator==(const LeafLink&, const LeafLink&) = default;
  friend auto operator<=>(const LeafLink&, const LeafLink&) = default;
};

using LeafAlignment = std::vector<LeafLink>;

// Pairs (i,j),(i',j') with i < i' and j > j'. Every link counts on its own.
std::size_t count_crossings(const LeafAlignment& links);

}  // namespace amrsbmt

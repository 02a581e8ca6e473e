#pragma once

// AMR <-> SBMT tree transformations.
//
// An instance becomes an `X` node whose children are the concept preterminal
// and, per role, a role-label preterminal immediately followed by the filler
// (an instance node, or a string preterminal labeled `X` / `S<role>`).
// Restructuring inserts intermediate nodes whose label is never `X`, so the
// instance structure of a tree can always be recovered from labels and
// adjacency alone.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amrsbmt/alignment.hpp"
#include "amrsbmt/amr.hpp"
#include "amrsbmt/tree.hpp"

namespace amrsbmt {

inline constexpr std::string_view kInstanceLabel = "X";
inline constexpr std::string_view kRootRole = "ROOT";

class TransformError : public AmrError {
 public:
  using AmrError::AmrError;
};

enum class RestructureMode { flat, concept_label, role_label };

RestructureMode parse_restructure_mode(std::string_view name);
std::string_view to_string(RestructureMode mode);

// Keeps the first parent of every instance in DFS role order from the root;
// every other incoming link is retargeted to a fresh `*` instance.
AmrGraph disconnect(const AmrGraph& graph);

// Requires a tree-shaped graph. Child order: concept, then role pairs in AMR
// role order.
SbmtTree push_labels(const AmrGraph& tree);

// The AMR element behind each leaf of push_labels(tree); string constants
// have none.
std::vector<std::optional<AmrElement>> leaf_elements(const AmrGraph& tree);

LeafAlignment project_alignment(const AmrGraph& tree, const AlignmentSet& alignment);

// One unit of an instance node: the concept (label == nullptr) or a role
// label followed by its filler.
template <class Node>
struct InstanceUnit {
  Node* label = nullptr;
  Node* filler = nullptr;

  bool is_concept() const { return label == nullptr; }
};

bool is_instance_node(const SbmtTree& node);
bool is_intermediate_node(const SbmtTree& node);

// Units of an instance node in yield order, looking through intermediates.
// Throws TransformError when no concept / pairing is consistent.
std::vector<InstanceUnit<const SbmtTree>> instance_units(const SbmtTree& instance);
std::vector<InstanceUnit<SbmtTree>> instance_units(SbmtTree& instance);

// Instance-outward binarization: the concept is innermost and role units are
// attached one per level, nearest first (left wins ties). `flat` undoes it.
SbmtTree restructure(const SbmtTree& tree, RestructureMode mode);

// String filler preterminals `X` become `S<role>`.
SbmtTree relabel_strings(const SbmtTree& tree);

struct ReorderedNode {
  std::vector<std::vector<int>> unit_sources;  // aligned source positions per unit, original order
  std::vector<std::size_t> order;              // chosen permutation of units
  std::size_t crossings_before = 0;
  std::size_t crossings_after = 0;
  bool accepted = true;
};

struct ReorderResult {
  SbmtTree tree;
  LeafAlignment alignment;
  std::vector<ReorderedNode> nodes;
};

// Greedy bottom-up reordering of the units of every instance node of an
// unrestructured tree by mean aligned source position. A node keeps its order
// when the sorted one has more node-local crossings.
ReorderResult reorder(const SbmtTree& tree, const LeafAlignment& alignment);

// Crossings between links in different units for the given unit order.
std::size_t unit_crossings(const std::vector<std::vector<int>>& unit_sources,
                           const std::vector<std::size_t>& order);

// Inverse of the pipeline; variables are named v0, v1, ... in DFS order.
AmrGraph to_amr(const SbmtTree& tree);

std::vector<std::string> yield_amrese(const SbmtTree& tree);

}  // namespace amrsbmt

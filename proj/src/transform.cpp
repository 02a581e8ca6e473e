#include "amrsbmt/transform.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace amrsbmt {

RestructureMode parse_restructure_mode(std::string_view name)
{
  if (name == "flat" || name == "none")
    return RestructureMode::flat;
  if (name == "concept")
    return RestructureMode::concept_label;
  if (name == "role")
    return RestructureMode::role_label;
  throw std::invalid_argument("unknown restructure mode '" + std::string(name) + "'");
}

std::string_view to_string(RestructureMode mode)
{
  switch (mode) {
    case RestructureMode::flat: return "flat";
    case RestructureMode::concept_label: return "concept";
    case RestructureMode::role_label: return "role";
  }
  return "flat";
}

AmrGraph disconnect(const AmrGraph& graph)
{
  AmrGraph out = graph;
  auto adjacency = graph.outgoing();
  std::set<std::string> visited;
  std::size_t fresh = 0;
  auto fresh_var = [&]() {
    std::string v;
    do {
      v = "_p" + std::to_string(fresh++);
    } while (out.has_instance(v));
    return v;
  };
  std::function<void(const std::string&)> visit = [&](const std::string& var) {
    visited.insert(var);
    for (auto idx : adjacency[var]) {
      auto& role = out.roles[idx];
      if (role.constant)
        continue;
      if (visited.count(role.target)) {
        std::string v = fresh_var();
        out.concepts[v] = std::string(kPlaceholderConcept);
        role.target = v;
      } else {
        visit(role.target);
      }
    }
  };
  visit(graph.root);
  return out;
}

SbmtTree push_labels(const AmrGraph& tree)
{
  if (!tree.is_tree())
    throw TransformError("push_labels needs a tree-shaped graph; disconnect re-entrancies first");
  auto adjacency = tree.outgoing();
  std::function<SbmtTree(const std::string&)> build = [&](const std::string& var) {
    SbmtTree node{std::string(kInstanceLabel), {}};
    const auto& concept_name = tree.concept_of(var);
    node.children.push_back(preterminal(concept_name + "P", concept_name));
    for (auto idx : adjacency[var]) {
      const auto& r = tree.roles[idx];
      node.children.push_back(preterminal(r.label + "P", r.label));
      if (r.constant)
        node.children.push_back(preterminal(std::string(kInstanceLabel), r.target));
      else
        node.children.push_back(build(r.target));
    }
    return node;
  };
  return build(tree.root);
}

std::vector<std::optional<AmrElement>> leaf_elements(const AmrGraph& tree)
{
  if (!tree.is_tree())
    throw TransformError("leaf_elements needs a tree-shaped graph");
  auto adjacency = tree.outgoing();
  std::vector<std::optional<AmrElement>> out;
  std::function<void(const std::string&)> walk = [&](const std::string& var) {
    out.push_back(AmrElement{var, "", 0});
    std::map<std::string, int> seen;
    for (auto idx : adjacency[var]) {
      const auto& r = tree.roles[idx];
      out.push_back(AmrElement{var, r.label, ++seen[r.label]});
      if (r.constant)
        out.push_back(std::nullopt);
      else
        walk(r.target);
    }
  };
  walk(tree.root);
  return out;
}

LeafAlignment project_alignment(const AmrGraph& tree, const AlignmentSet& alignment)
{
  auto elements = leaf_elements(tree);
  std::map<AmrElement, int> position;
  for (std::size_t i = 0; i < elements.size(); ++i)
    if (elements[i])
      position[*elements[i]] = static_cast<int>(i);
  LeafAlignment out;
  for (const auto& l : alignment.links) {
    auto it = position.find(l.element);
    if (it == position.end())
      throw AmrError("alignment refers to unknown element '" + l.element.path() + "'");
    out.push_back({l.token, it->second});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool is_instance_node(const SbmtTree& node)
{
  return node.label == kInstanceLabel && !node.is_terminal() && !node.is_preterminal();
}

bool is_intermediate_node(const SbmtTree& node)
{
  return node.label != kInstanceLabel && !node.is_terminal() && !node.is_preterminal();
}

namespace {

bool is_role_label(const SbmtTree& n)
{
  return n.is_preterminal() && n.label == n.children.front().label + "P";
}

bool is_filler(const SbmtTree& filler, const SbmtTree& label)
{
  if (is_instance_node(filler))
    return true;
  return filler.is_preterminal() &&
         (filler.label == kInstanceLabel || filler.label == "S" + label.children.front().label);
}

bool is_concept(const SbmtTree& n)
{
  return n.is_preterminal() && n.label != kInstanceLabel;
}

template <class Node>
void flatten(Node& node, std::vector<Node*>& items)
{
  for (auto& c : node.children) {
    if (is_intermediate_node(c))
      flatten(c, items);
    else
      items.push_back(&c);
  }
}

template <class Node>
std::vector<InstanceUnit<Node>> units_of(Node& instance)
{
  if (!is_instance_node(instance))
    throw TransformError("'" + instance.label + "' is not an instance node");
  std::vector<Node*> items;
  flatten(instance, items);
  for (auto* item : items)
    if (item->is_terminal())
      throw TransformError("bare terminal '" + item->label + "' under an instance node");
  if (items.size() % 2 == 0)
    throw TransformError("instance node has an unpaired role label or no concept");

  auto pair_ok = [&](std::size_t q) { return is_role_label(*items[q]) && is_filler(*items[q + 1], *items[q]); };
  for (std::size_t p = 0; p < items.size(); p += 2) {
    if (!is_concept(*items[p]))
      continue;
    bool ok = true;
    for (std::size_t q = 0; ok && q < p; q += 2)
      ok = pair_ok(q);
    for (std::size_t q = p + 1; ok && q < items.size(); q += 2)
      ok = pair_ok(q);
    if (!ok)
      continue;
    std::vector<InstanceUnit<Node>> units;
    for (std::size_t q = 0; q < items.size();) {
      if (q == p) {
        units.push_back({nullptr, items[q]});
        ++q;
      } else {
        units.push_back({items[q], items[q + 1]});
        q += 2;
      }
    }
    return units;
  }
  throw TransformError("instance node has no concept, or a role label without an adjacent filler");
}

}  // namespace

std::vector<InstanceUnit<const SbmtTree>> instance_units(const SbmtTree& instance)
{
  return units_of<const SbmtTree>(instance);
}

std::vector<InstanceUnit<SbmtTree>> instance_units(SbmtTree& instance)
{
  return units_of<SbmtTree>(instance);
}

namespace {

SbmtTree restructure_instance(const SbmtTree& node, RestructureMode mode, const std::string& incoming)
{
  auto units = instance_units(node);
  std::vector<std::vector<SbmtTree>> parts;
  std::size_t cpos = 0;
  std::size_t role_units = 0;
  std::string concept_name;
  for (std::size_t u = 0; u < units.size(); ++u) {
    if (units[u].is_concept()) {
      cpos = u;
      concept_name = units[u].filler->children.front().label;
      parts.push_back({*units[u].filler});
      continue;
    }
    ++role_units;
    const auto& role = units[u].label->children.front().label;
    SbmtTree filler = is_instance_node(*units[u].filler) ? restructure_instance(*units[u].filler, mode, role)
                                                         : *units[u].filler;
    parts.push_back({*units[u].label, std::move(filler)});
  }

  if (mode == RestructureMode::flat || role_units <= 1) {
    SbmtTree out{std::string(kInstanceLabel), {}};
    for (auto& p : parts)
      for (auto& n : p)
        out.children.push_back(std::move(n));
    return out;
  }

  const std::string intermediate = mode == RestructureMode::concept_label ? concept_name : incoming;
  std::vector<SbmtTree> inner = std::move(parts[cpos]);
  std::ptrdiff_t left = static_cast<std::ptrdiff_t>(cpos) - 1;
  std::size_t right = cpos + 1;
  for (std::size_t attached = 0; attached < role_units; ++attached) {
    bool take_left = left >= 0 && (right >= parts.size() ||
                                   static_cast<std::ptrdiff_t>(cpos) - left <=
                                       static_cast<std::ptrdiff_t>(right - cpos));
    std::vector<SbmtTree> children;
    if (take_left) {
      children = std::move(parts[left--]);
      for (auto& n : inner)
        children.push_back(std::move(n));
    } else {
      children = std::move(inner);
      for (auto& n : parts[right++])
        children.push_back(std::move(n));
    }
    bool outermost = attached + 1 == role_units;
    inner.clear();
    inner.push_back(SbmtTree{outermost ? std::string(kInstanceLabel) : intermediate, std::move(children)});
  }
  return std::move(inner.front());
}

void relabel_instance(SbmtTree& node)
{
  for (auto& unit : instance_units(node)) {
    if (unit.is_concept())
      continue;
    if (is_instance_node(*unit.filler))
      relabel_instance(*unit.filler);
    else if (unit.filler->label == kInstanceLabel)
      unit.filler->label = "S" + unit.label->children.front().label;
  }
}

}  // namespace

SbmtTree restructure(const SbmtTree& tree, RestructureMode mode)
{
  return restructure_instance(tree, mode, std::string(kRootRole));
}

SbmtTree relabel_strings(const SbmtTree& tree)
{
  SbmtTree out = tree;
  relabel_instance(out);
  return out;
}

std::size_t unit_crossings(const std::vector<std::vector<int>>& unit_sources, const std::vector<std::size_t>& order)
{
  std::size_t n = 0;
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size(); ++b)
      for (int x : unit_sources[order[a]])
        for (int y : unit_sources[order[b]])
          if (x > y)
            ++n;
  return n;
}

namespace {

class Reorderer {
 public:
  Reorderer(std::vector<std::vector<int>> leaf_sources) : leaf_sources_(std::move(leaf_sources)) {}

  // Returns the original leaf ids of `node` in their new order.
  std::vector<int> visit(SbmtTree& node)
  {
    if (node.is_terminal())
      return {next_leaf_++};
    std::vector<std::vector<int>> child_leaves;
    for (auto& c : node.children) {
      if (is_instance_node(node) && is_intermediate_node(c))
        throw std::invalid_argument("reorder expects an unrestructured tree");
      child_leaves.push_back(visit(c));
    }
    if (!is_instance_node(node)) {
      std::vector<int> all;
      for (auto& l : child_leaves)
        all.insert(all.end(), l.begin(), l.end());
      return all;
    }

    auto units = instance_units(node);
    auto index_of = [&](const SbmtTree* n) { return static_cast<std::size_t>(n - node.children.data()); };
    std::vector<std::vector<std::size_t>> unit_children;
    std::vector<std::vector<int>> unit_leaves, unit_sources;
    for (const auto& u : units) {
      std::vector<std::size_t> kids;
      if (!u.is_concept())
        kids.push_back(index_of(u.label));
      kids.push_back(index_of(u.filler));
      std::vector<int> lv, src;
      for (auto k : kids)
        lv.insert(lv.end(), child_leaves[k].begin(), child_leaves[k].end());
      for (int leaf : lv)
        src.insert(src.end(), leaf_sources_[leaf].begin(), leaf_sources_[leaf].end());
      std::sort(src.begin(), src.end());
      unit_children.push_back(std::move(kids));
      unit_leaves.push_back(std::move(lv));
      unit_sources.push_back(std::move(src));
    }

    std::vector<double> key(units.size());
    double previous = -std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < units.size(); ++u) {
      if (unit_sources[u].empty()) {
        key[u] = previous;
      } else {
        double sum = std::accumulate(unit_sources[u].begin(), unit_sources[u].end(), 0.0);
        key[u] = sum / static_cast<double>(unit_sources[u].size());
        previous = key[u];
      }
    }
    std::vector<std::size_t> identity(units.size());
    std::iota(identity.begin(), identity.end(), 0);
    std::vector<std::size_t> order = identity;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

    ReorderedNode record;
    record.unit_sources = unit_sources;
    record.crossings_before = unit_crossings(unit_sources, identity);
    record.crossings_after = unit_crossings(unit_sources, order);
    if (record.crossings_after > record.crossings_before) {
      order = identity;
      record.accepted = false;
      record.crossings_after = record.crossings_before;
    }
    record.order = order;
    nodes_.push_back(std::move(record));

    std::vector<SbmtTree> rebuilt;
    std::vector<int> result;
    for (auto u : order) {
      for (auto k : unit_children[u])
        rebuilt.push_back(std::move(node.children[k]));
      result.insert(result.end(), unit_leaves[u].begin(), unit_leaves[u].end());
    }
    node.children = std::move(rebuilt);
    return result;
  }

  std::vector<ReorderedNode> take_nodes() { return std::move(nodes_); }

 private:
  std::vector<std::vector<int>> leaf_sources_;
  int next_leaf_ = 0;
  std::vector<ReorderedNode> nodes_;
};

}  // namespace

ReorderResult reorder(const SbmtTree& tree, const LeafAlignment& alignment)
{
  const auto n_leaves = leaf_count(tree);
  std::vector<std::vector<int>> leaf_sources(n_leaves);
  for (const auto& l : alignment) {
    if (l.leaf < 0 || static_cast<std::size_t>(l.leaf) >= n_leaves)
      throw AmrError("alignment refers to leaf " + std::to_string(l.leaf) + " outside the tree");
    leaf_sources[l.leaf].push_back(l.source);
  }
  ReorderResult result;
  result.tree = tree;
  Reorderer reorderer(std::move(leaf_sources));
  auto order = reorderer.visit(result.tree);
  std::vector<int> new_position(n_leaves);
  for (std::size_t i = 0; i < order.size(); ++i)
    new_position[order[i]] = static_cast<int>(i);
  for (const auto& l : alignment)
    result.alignment.push_back({l.source, new_position[l.leaf]});
  std::sort(result.alignment.begin(), result.alignment.end());
  result.nodes = reorderer.take_nodes();
  return result;
}

AmrGraph to_amr(const SbmtTree& tree)
{
  if (!is_instance_node(tree))
    throw TransformError("tree root '" + tree.label + "' is not an instance node");
  AmrGraph g;
  std::size_t counter = 0;
  std::function<std::string(const SbmtTree&)> build = [&](const SbmtTree& node) {
    std::string var = "v" + std::to_string(counter++);
    auto units = instance_units(node);
    for (const auto& u : units)
      if (u.is_concept())
        g.concepts[var] = u.filler->children.front().label;
    for (const auto& u : units) {
      if (u.is_concept())
        continue;
      Role r{var, u.label->children.front().label, "", false};
      if (is_instance_node(*u.filler)) {
        std::size_t idx = g.roles.size();
        g.roles.push_back(r);
        g.roles[idx].target = build(*u.filler);
      } else {
        r.target = u.filler->children.front().label;
        r.constant = true;
        g.roles.push_back(std::move(r));
      }
    }
    return var;
  };
  g.root = build(tree);
  return g;
}

std::vector<std::string> yield_amrese(const SbmtTree& tree)
{
  return leaves(tree);
}

}  // namespace amrsbmt

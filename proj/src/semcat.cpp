#include "amrsbmt/semcat.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>

#include "amrsbmt/text.hpp"
#include "amrsbmt/transform.hpp"

namespace amrsbmt {

SemanticTaxonomy::SemanticTaxonomy(std::vector<std::pair<std::string, std::string>> is_a,
                                   std::map<std::string, std::vector<Sense>> senses,
                                   std::set<std::string> salient)
    : senses_(std::move(senses)), salient_(std::move(salient))
{
  for (auto& [child, parent] : is_a) {
    nodes_.insert(child);
    nodes_.insert(parent);
    auto& ps = parents_[child];
    if (std::find(ps.begin(), ps.end(), parent) == ps.end())
      ps.push_back(parent);
  }
  build();
}

SemanticTaxonomy::SemanticTaxonomy(const SemanticTaxonomy& other)
    : parents_(other.parents_),
      nodes_(other.nodes_),
      senses_(other.senses_),
      salient_(other.salient_),
      prevalence_(other.prevalence_),
      depth_(other.depth_)
{
}

SemanticTaxonomy& SemanticTaxonomy::operator=(const SemanticTaxonomy& other)
{
  if (this != &other) {
    parents_ = other.parents_;
    nodes_ = other.nodes_;
    senses_ = other.senses_;
    salient_ = other.salient_;
    prevalence_ = other.prevalence_;
    depth_ = other.depth_;
    std::lock_guard lock(memo_mutex_);
    memo_.clear();
  }
  return *this;
}

void SemanticTaxonomy::build()
{
  for (const auto& s : salient_) {
    if (!nodes_.count(s))
      throw TaxonomyError("salient category '" + s + "' is not in the hierarchy");
    if (s == "X")
      throw TaxonomyError("'X' is reserved and cannot be a category");
  }
  for (const auto& [lemma, list] : senses_)
    for (const auto& s : list)
      nodes_.insert(s.category);

  // Cycle check and depth (longest distance from a parentless node).
  std::map<std::string, int> state;
  std::function<int(const std::string&)> visit = [&](const std::string& n) -> int {
    auto& st = state[n];
    if (st == 1)
      throw TaxonomyError("cycle in hierarchy through '" + n + "'");
    if (st == 2)
      return depth_[n];
    st = 1;
    int d = 0;
    if (auto it = parents_.find(n); it != parents_.end())
      for (const auto& p : it->second)
        d = std::max(d, visit(p) + 1);
    state[n] = 2;
    depth_[n] = d;
    return d;
  };
  for (const auto& n : nodes_)
    visit(n);

  for (const auto& [lemma, list] : senses_)
    for (const auto& [node, count] : propagate(lemma))
      if (salient_.count(node) && count > 0)
        prevalence_[node] += 1.0;
}

SemanticTaxonomy SemanticTaxonomy::read(std::istream& hierarchy, std::istream& senses, std::istream& salient)
{
  std::vector<std::pair<std::string, std::string>> is_a;
  std::map<std::string, std::vector<Sense>> sense_map;
  std::set<std::string> salient_set;
  std::string line;
  std::size_t n = 0;
  while (std::getline(hierarchy, line)) {
    ++n;
    if (trim(line).empty() || line[0] == '#')
      continue;
    auto f = split(line, '\t');
    if (f.size() != 2 || trim(f[0]).empty() || trim(f[1]).empty())
      throw TaxonomyError("hierarchy line " + std::to_string(n) + ": expected child<TAB>parent");
    is_a.emplace_back(trim(f[0]), trim(f[1]));
  }
  n = 0;
  while (std::getline(senses, line)) {
    ++n;
    if (trim(line).empty() || line[0] == '#')
      continue;
    auto f = split(line, '\t');
    if (f.size() != 3)
      throw TaxonomyError("senses line " + std::to_string(n) + ": expected lemma<TAB>category<TAB>count");
    double count = 0;
    try {
      count = parse_number(f[2]);
    } catch (const std::exception&) {
      throw TaxonomyError("senses line " + std::to_string(n) + ": bad count '" + f[2] + "'");
    }
    if (count < 0)
      throw TaxonomyError("senses line " + std::to_string(n) + ": negative count");
    auto& list = sense_map[trim(f[0])];
    std::string cat = trim(f[1]);
    auto it = std::find_if(list.begin(), list.end(), [&](const Sense& s) { return s.category == cat; });
    if (it == list.end())
      list.push_back({cat, count});
    else
      it->count += count;
  }
  while (std::getline(salient, line)) {
    auto t = trim(line);
    if (!t.empty() && t[0] != '#')
      salient_set.insert(t);
  }
  return SemanticTaxonomy(std::move(is_a), std::move(sense_map), std::move(salient_set));
}

SemanticTaxonomy SemanticTaxonomy::load(const std::string& hierarchy_path, const std::string& senses_path,
                                        const std::string& salient_path)
{
  std::ifstream h(hierarchy_path), s(senses_path), l(salient_path);
  if (!h)
    throw TaxonomyError("cannot open " + hierarchy_path);
  if (!s)
    throw TaxonomyError("cannot open " + senses_path);
  if (!l)
    throw TaxonomyError("cannot open " + salient_path);
  return read(h, s, l);
}

std::string SemanticTaxonomy::lemma_of(std::string_view concept_name)
{
  auto dash = concept_name.rfind('-');
  if (dash == std::string_view::npos || dash == 0 || dash + 1 == concept_name.size())
    return std::string(concept_name);
  for (std::size_t i = dash + 1; i < concept_name.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(concept_name[i])))
      return std::string(concept_name);
  return std::string(concept_name.substr(0, dash));
}

std::map<std::string, double> SemanticTaxonomy::propagate(std::string_view lemma) const
{
  std::map<std::string, double> count;
  auto it = senses_.find(std::string(lemma));
  if (it == senses_.end())
    return count;

  // Ancestors of the attachment points in an order where children precede parents.
  std::vector<std::string> order;
  std::set<std::string> seen;
  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    if (!seen.insert(n).second)
      return;
    if (auto p = parents_.find(n); p != parents_.end())
      for (const auto& parent : p->second)
        visit(parent);
    order.push_back(n);
  };
  for (const auto& s : it->second) {
    visit(s.category);
    count[s.category] += s.count + kSenseSmoothing;
  }
  std::reverse(order.begin(), order.end());
  for (const auto& n : order) {
    double c = count[n];
    if (auto p = parents_.find(n); p != parents_.end())
      for (const auto& parent : p->second)
        count[parent] += c;
  }
  return count;
}

std::vector<CategoryWeight> SemanticTaxonomy::weights(std::string_view concept_name) const
{
  std::vector<CategoryWeight> out;
  for (const auto& [node, c] : propagate(lemma_of(concept_name))) {
    if (!salient_.count(node) || c <= 0)
      continue;
    double prev = prevalence(node);
    out.push_back({node, c, prev, prev > 0 ? c / prev : 0.0, depth(node)});
  }
  return out;
}

std::string SemanticTaxonomy::assign(std::string_view concept_name) const
{
  std::string key(concept_name);
  {
    std::lock_guard lock(memo_mutex_);
    if (auto it = memo_.find(key); it != memo_.end())
      return it->second;
  }
  std::string best(kFallbackCategory);
  const CategoryWeight* top = nullptr;
  auto candidates = weights(concept_name);
  // Path sums are order dependent in the last bits, so near-equal weights tie.
  auto same = [](double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(std::fabs(a), std::fabs(b)); };
  for (const auto& w : candidates) {
    if (!top) {
      top = &w;
      continue;
    }
    if (same(w.weight, top->weight)) {
      if (w.depth > top->depth || (w.depth == top->depth && w.category < top->category))
        top = &w;
    } else if (w.weight > top->weight) {
      top = &w;
    }
  }
  if (top)
    best = top->category;
  std::lock_guard lock(memo_mutex_);
  memo_.emplace(key, best);
  return best;
}

double SemanticTaxonomy::prevalence(const std::string& category) const
{
  auto it = prevalence_.find(category);
  return it == prevalence_.end() ? 0.0 : it->second;
}

int SemanticTaxonomy::depth(const std::string& category) const
{
  auto it = depth_.find(category);
  return it == depth_.end() ? 0 : it->second;
}

namespace {

void categorize(SbmtTree& node, const SemanticTaxonomy& taxonomy)
{
  for (auto& unit : instance_units(node)) {
    if (unit.is_concept())
      unit.filler->label = taxonomy.assign(unit.filler->children.front().label);
    else if (is_instance_node(*unit.filler))
      categorize(*unit.filler, taxonomy);
  }
}

}  // namespace

SbmtTree apply_categories(const SbmtTree& tree, const SemanticTaxonomy& taxonomy)
{
  SbmtTree out = tree;
  categorize(out, taxonomy);
  return out;
}

}  // namespace amrsbmt

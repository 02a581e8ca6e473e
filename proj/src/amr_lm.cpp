#include "amrsbmt/amr_lm.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "amrsbmt/text.hpp"

namespace amrsbmt {

namespace {

const std::string kRoot(kRootSymbol);
const std::string kStop(kStopSymbol);

bool is_leaf_concept(const std::string& concept_name)
{
  return concept_name == kPlaceholderConcept;
}

void require_tree(const AmrGraph& g)
{
  g.validate();
  if (!g.is_tree())
    throw AmrError("the AMR language model is only defined over tree-shaped graphs");
}

struct Visitor {
  // Called per filler (instance or constant). Returns false for leaves.
  template <class F>
  static void walk(const AmrGraph& g, const std::string& var, const std::string& role, const std::string& parent,
                   F&& f)
  {
    const std::string& concept_name = g.concept_of(var);
    const bool leaf = is_leaf_concept(concept_name);
    f.instance(concept_name, role, parent, leaf);
    if (leaf)
      return;
    for (std::size_t idx : g.roles_of(var)) {
      const Role& r = g.roles[idx];
      f.role(concept_name, r.label);
      if (r.constant)
        f.instance(r.target, r.label, concept_name, true);
      else
        walk(g, r.target, r.label, concept_name, f);
    }
    f.stop(concept_name);
  }
};

}  // namespace

std::string AmrTreeModel::category_of(const std::string& concept_name) const
{
  if (concept_name == kRoot)
    return kRoot;
  if (auto it = categories_.find(concept_name); it != categories_.end())
    return it->second;
  if (taxonomy_)
    return taxonomy_->assign(concept_name);
  return std::string(kFallbackCategory);
}

AmrTreeModel AmrTreeModel::train(const std::vector<AmrGraph>& corpus, const SemanticTaxonomy* taxonomy)
{
  AmrTreeModel m;
  m.semcat_ = taxonomy != nullptr;
  if (taxonomy)
    m.taxonomy_ = *taxonomy;

  for (const auto& g : corpus)
    require_tree(g);

  if (taxonomy) {
    for (const auto& g : corpus) {
      for (const auto& [v, c] : g.concepts)
        m.categories_.emplace(c, taxonomy->assign(c));
      for (const auto& r : g.roles)
        if (r.constant)
          m.categories_.emplace(r.target, taxonomy->assign(r.target));
    }
  }

  struct Collector {
    AmrTreeModel& m;
    void instance(const std::string& c, const std::string& l, const std::string& parent, bool)
    {
      m.concept_.add(std::vector<std::string>{l, parent}, c);
      if (m.semcat_) {
        const std::string sc = m.category_of(c);
        const std::string sp = m.category_of(parent);
        m.category_.add(std::vector<std::string>{l, sp, parent}, sc);
        m.concept_sc_.add(std::vector<std::string>{sc, l, sp, parent}, c);
      }
    }
    void role(const std::string& c, const std::string& l)
    {
      m.role_.add(std::vector<std::string>{c}, l);
      if (m.semcat_)
        m.role_sc_.add(std::vector<std::string>{m.category_of(c), c}, l);
    }
    void stop(const std::string& c) { role(c, kStop); }
  };

  Collector collector{m};
  for (const auto& g : corpus)
    Visitor::walk(g, g.root, kRoot, kRoot, collector);
  return m;
}

AmrScore AmrTreeModel::score(const AmrGraph& tree, bool use_semcat) const
{
  require_tree(tree);
  if (use_semcat && !semcat_)
    throw AmrError("model was trained without semantic categories");

  struct Scorer {
    const AmrTreeModel& m;
    bool semcat;
    AmrScore out;

    void factor(const char* table, const WittenBellTable& t, std::vector<std::string> ctx, const std::string& e)
    {
      double p = t.probability(ctx, e);
      out.log_probability += std::log(p);
      out.factors.push_back({table, std::move(ctx), e, p});
    }
    void instance(const std::string& c, const std::string& l, const std::string& parent, bool)
    {
      if (!semcat) {
        factor("concept", m.concept_, {l, parent}, c);
        return;
      }
      const std::string sc = m.category_of(c);
      const std::string sp = m.category_of(parent);
      factor("category", m.category_, {l, sp, parent}, sc);
      factor("concept_sc", m.concept_sc_, {sc, l, sp, parent}, c);
    }
    void role(const std::string& c, const std::string& l)
    {
      if (semcat)
        factor("role_sc", m.role_sc_, {m.category_of(c), c}, l);
      else
        factor("role", m.role_, {c}, l);
    }
    void stop(const std::string& c) { role(c, kStop); }
  };

  Scorer scorer{*this, use_semcat, {}};
  Visitor::walk(tree, tree.root, kRoot, kRoot, scorer);
  return std::move(scorer.out);
}

void AmrTreeModel::save(std::ostream& out) const
{
  out << "amrsbmt-amrlm\t1\n";
  out << "semcat\t" << (semcat_ ? 1 : 0) << '\n';
  out << "\\categories\n";
  for (const auto& [c, s] : categories_)
    out << escape_token(c) << '\t' << escape_token(s) << '\n';
  const std::pair<const char*, const WittenBellTable*> tables[] = {
      {"concept", &concept_},       {"role", &role_},       {"category", &category_},
      {"concept_sc", &concept_sc_}, {"role_sc", &role_sc_},
  };
  for (const auto& [name, t] : tables) {
    out << "\\table " << name << '\n';
    t->write(out);
  }
  out << "\\end\n";
}

AmrTreeModel AmrTreeModel::load(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line) || line != "amrsbmt-amrlm\t1")
    throw std::runtime_error("not an amrsbmt AMR language model (version 1)");
  AmrTreeModel m;
  if (!std::getline(in, line) || !starts_with(line, "semcat\t"))
    throw std::runtime_error("AMR language model: missing semcat flag");
  m.semcat_ = line.substr(7) == "1";
  if (!std::getline(in, line) || line != "\\categories")
    throw std::runtime_error("AMR language model: missing categories");
  std::string stop;
  while (std::getline(in, line)) {
    if (starts_with(line, "\\")) {
      stop = line;
      break;
    }
    auto f = split(line, '\t');
    if (f.size() != 2)
      throw std::runtime_error("AMR language model: malformed category line: " + line);
    m.categories_[unescape_token(f[0])] = unescape_token(f[1]);
  }
  while (starts_with(stop, "\\table ")) {
    const std::string name = stop.substr(7);
    WittenBellTable* t = name == "concept"      ? &m.concept_
                         : name == "role"       ? &m.role_
                         : name == "category"   ? &m.category_
                         : name == "concept_sc" ? &m.concept_sc_
                         : name == "role_sc"    ? &m.role_sc_
                                                : nullptr;
    if (!t)
      throw std::runtime_error("AMR language model: unknown table " + name);
    t->read(in, &stop);
  }
  if (stop != "\\end")
    throw std::runtime_error("AMR language model: truncated");
  return m;
}

}  // namespace amrsbmt

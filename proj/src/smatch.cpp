#include "amrsbmt/smatch.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <tuple>

namespace amrsbmt {

TripleSet to_triples(const AmrGraph& g, bool include_top)
{
  TripleSet t;
  std::map<std::string, int> index;
  for (const auto& [var, c] : g.concepts) {
    index[var] = static_cast<int>(t.variables.size());
    t.variables.push_back(var);
    t.instances.push_back({index[var], c});
  }
  for (const auto& r : g.roles) {
    if (r.constant)
      t.attributes.push_back({r.label, index.at(r.source), r.target});
    else
      t.relations.push_back({r.label, index.at(r.source), index.at(r.target)});
  }
  if (include_top && !g.root.empty())
    t.attributes.push_back({"TOP", index.at(g.root), g.concept_of(g.root)});
  return t;
}

SmatchResult make_result(std::size_t matched, std::size_t test_triples, std::size_t gold_triples)
{
  SmatchResult r;
  r.matched = matched;
  r.test_triples = test_triples;
  r.gold_triples = gold_triples;
  r.precision = test_triples ? static_cast<double>(matched) / static_cast<double>(test_triples) : 0.0;
  r.recall = gold_triples ? static_cast<double>(matched) / static_cast<double>(gold_triples) : 0.0;
  r.f = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

namespace {

// Precomputed matching structure. Every triple of `a` involves one or two
// variables; its match status depends only on their images.
class Matcher {
 public:
  Matcher(const TripleSet& a, const TripleSet& b) : na_(a.variables.size()), nb_(b.variables.size())
  {
    unary_.assign(na_, std::vector<int>(nb_, 0));
    for (const auto& ia : a.instances)
      for (const auto& ib : b.instances)
        if (ia.concept_name == ib.concept_name)
          ++unary_[static_cast<std::size_t>(ia.var)][static_cast<std::size_t>(ib.var)];
    // Attributes with multiplicity: count per (var, label, value).
    std::map<std::tuple<int, std::string, std::string>, int> attr_a, attr_b;
    for (const auto& x : a.attributes)
      ++attr_a[{x.source, x.label, x.value}];
    for (const auto& x : b.attributes)
      ++attr_b[{x.source, x.label, x.value}];
    for (const auto& [ka, ca] : attr_a)
      for (const auto& [kb, cb] : attr_b)
        if (std::get<1>(ka) == std::get<1>(kb) && std::get<2>(ka) == std::get<2>(kb))
          unary_[static_cast<std::size_t>(std::get<0>(ka))][static_cast<std::size_t>(std::get<0>(kb))] +=
              std::min(ca, cb);
    for (const auto& r : a.relations)
      ++rel_a_[{r.source, r.target, r.label}];
    for (const auto& r : b.relations)
      ++rel_b_[{r.source, r.target, r.label}];
  }

  std::size_t score(const std::vector<int>& m) const
  {
    std::size_t s = 0;
    for (std::size_t i = 0; i < na_; ++i)
      if (m[i] >= 0)
        s += static_cast<std::size_t>(unary_[i][static_cast<std::size_t>(m[i])]);
    for (const auto& [k, ca] : rel_a_) {
      const auto& [src, tgt, label] = k;
      const int ms = m[static_cast<std::size_t>(src)], mt = m[static_cast<std::size_t>(tgt)];
      if (ms < 0 || mt < 0)
        continue;
      auto it = rel_b_.find({ms, mt, label});
      if (it != rel_b_.end())
        s += static_cast<std::size_t>(std::min(ca, it->second));
    }
    return s;
  }

  // Mapping a to b var j could match anything at all.
  bool compatible(std::size_t i, std::size_t j) const
  {
    if (unary_[i][j] > 0)
      return true;
    for (const auto& [ka, ca] : rel_a_)
      for (const auto& [kb, cb] : rel_b_)
        if (std::get<2>(ka) == std::get<2>(kb) &&
            ((std::get<0>(ka) == static_cast<int>(i) && std::get<0>(kb) == static_cast<int>(j)) ||
             (std::get<1>(ka) == static_cast<int>(i) && std::get<1>(kb) == static_cast<int>(j))))
          return true;
    return false;
  }

  // Triples of a that involve variable i (upper bound on what i can add).
  std::vector<int> triples_per_var(const TripleSet& a) const
  {
    std::vector<int> out(na_, 0);
    for (const auto& x : a.instances)
      ++out[static_cast<std::size_t>(x.var)];
    for (const auto& x : a.attributes)
      ++out[static_cast<std::size_t>(x.source)];
    for (const auto& x : a.relations) {
      ++out[static_cast<std::size_t>(x.source)];
      if (x.target != x.source)
        ++out[static_cast<std::size_t>(x.target)];
    }
    return out;
  }

  std::size_t na() const { return na_; }
  std::size_t nb() const { return nb_; }

 private:
  std::size_t na_, nb_;
  std::vector<std::vector<int>> unary_;
  std::map<std::tuple<int, int, std::string>, int> rel_a_, rel_b_;
};

std::vector<int> greedy_start(const TripleSet& a, const TripleSet& b)
{
  std::vector<int> m(a.variables.size(), -1);
  std::vector<bool> used(b.variables.size(), false);
  for (const auto& ia : a.instances)
    for (const auto& ib : b.instances)
      if (!used[static_cast<std::size_t>(ib.var)] && ia.concept_name == ib.concept_name) {
        m[static_cast<std::size_t>(ia.var)] = ib.var;
        used[static_cast<std::size_t>(ib.var)] = true;
        break;
      }
  return m;
}

std::vector<int> random_start(std::size_t na, std::size_t nb, std::mt19937_64& rng)
{
  std::vector<int> pool(std::max(na, nb));
  std::iota(pool.begin(), pool.end(), 0);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<int> m(na, -1);
  for (std::size_t i = 0; i < na; ++i)
    m[i] = pool[i] < static_cast<int>(nb) ? pool[i] : -1;
  return m;
}

std::size_t climb(const Matcher& matcher, std::vector<int>& m)
{
  std::size_t current = matcher.score(m);
  const std::size_t na = matcher.na(), nb = matcher.nb();
  while (true) {
    std::size_t best = current;
    std::vector<int> best_map;
    std::vector<int> owner(nb, -1);
    for (std::size_t i = 0; i < na; ++i)
      if (m[i] >= 0)
        owner[static_cast<std::size_t>(m[i])] = static_cast<int>(i);
    // Moves to an unused target (or to unmapped).
    for (std::size_t i = 0; i < na; ++i) {
      for (int j = -1; j < static_cast<int>(nb); ++j) {
        if (j == m[i] || (j >= 0 && owner[static_cast<std::size_t>(j)] >= 0))
          continue;
        auto cand = m;
        cand[i] = j;
        std::size_t s = matcher.score(cand);
        if (s > best) {
          best = s;
          best_map = std::move(cand);
        }
      }
    }
    // Swaps between two mapped-or-unmapped variables.
    for (std::size_t i = 0; i < na; ++i)
      for (std::size_t k = i + 1; k < na; ++k) {
        if (m[i] == m[k])
          continue;
        auto cand = m;
        std::swap(cand[i], cand[k]);
        std::size_t s = matcher.score(cand);
        if (s > best) {
          best = s;
          best_map = std::move(cand);
        }
      }
    if (best_map.empty())
      return current;
    m = std::move(best_map);
    current = best;
  }
}

class Exact {
 public:
  Exact(const Matcher& matcher, const TripleSet& a) : matcher_(matcher), per_var_(matcher.triples_per_var(a))
  {
    candidates_.resize(matcher.na());
    for (std::size_t i = 0; i < matcher.na(); ++i) {
      for (std::size_t j = 0; j < matcher.nb(); ++j)
        if (matcher.compatible(i, j))
          candidates_[i].push_back(static_cast<int>(j));
      candidates_[i].push_back(-1);
    }
    // Upper bound on what the undecided suffix can add.
    suffix_.assign(matcher.na() + 1, 0);
    for (std::size_t i = matcher.na(); i-- > 0;)
      suffix_[i] = suffix_[i + 1] + static_cast<std::size_t>(per_var_[i]);
  }

  std::pair<std::size_t, std::vector<int>> solve()
  {
    std::vector<int> m(matcher_.na(), -1);
    used_.assign(matcher_.nb(), false);
    best_map_ = m;
    best_ = matcher_.score(m);
    search(0, m);
    return {best_, best_map_};
  }

 private:
  void search(std::size_t i, std::vector<int>& m)
  {
    if (i == matcher_.na()) {
      std::size_t s = matcher_.score(m);
      if (s > best_) {
        best_ = s;
        best_map_ = m;
      }
      return;
    }
    // Bound: triples fully inside the decided prefix are already scored with
    // undecided variables treated as unmapped.
    if (matcher_.score(m) + suffix_[i] <= best_)
      return;
    for (int j : candidates_[i]) {
      if (j >= 0 && used_[static_cast<std::size_t>(j)])
        continue;
      m[i] = j;
      if (j >= 0)
        used_[static_cast<std::size_t>(j)] = true;
      search(i + 1, m);
      if (j >= 0)
        used_[static_cast<std::size_t>(j)] = false;
      m[i] = -1;
    }
  }

  const Matcher& matcher_;
  std::vector<int> per_var_;
  std::vector<std::vector<int>> candidates_;
  std::vector<std::size_t> suffix_;
  std::vector<bool> used_;
  std::vector<int> best_map_;
  std::size_t best_ = 0;
};

std::vector<int> invert(const std::vector<int>& m, std::size_t n)
{
  std::vector<int> out(n, -1);
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] >= 0)
      out[static_cast<std::size_t>(m[i])] = static_cast<int>(i);
  return out;
}

}  // namespace

std::size_t matched_triples(const TripleSet& test, const TripleSet& gold, const std::vector<int>& mapping)
{
  return Matcher(test, gold).score(mapping);
}

SmatchResult smatch(const AmrGraph& test, const AmrGraph& gold, const SmatchOptions& options)
{
  const TripleSet a = to_triples(test, options.include_top);
  const TripleSet b = to_triples(gold, options.include_top);
  std::size_t best = 0;
  std::vector<int> best_map(a.variables.size(), -1);

  if (options.mode == SmatchMode::exact) {
    if (std::min(a.variables.size(), b.variables.size()) > kExactLimit)
      throw std::invalid_argument("exact Smatch supports at most " + std::to_string(kExactLimit) + " variables");
    // Enumerate from the smaller side; matched counts are symmetric.
    if (a.variables.size() <= b.variables.size()) {
      Matcher matcher(a, b);
      std::tie(best, best_map) = Exact(matcher, a).solve();
    } else {
      Matcher matcher(b, a);
      std::vector<int> m;
      std::tie(best, m) = Exact(matcher, b).solve();
      best_map = invert(m, a.variables.size());
    }
  } else {
    Matcher matcher(a, b);
    std::mt19937_64 rng(options.seed);
    const int restarts = std::max(1, options.restarts);
    for (int r = 0; r < restarts; ++r) {
      auto m = r == 0 ? greedy_start(a, b) : random_start(a.variables.size(), b.variables.size(), rng);
      std::size_t s = climb(matcher, m);
      if (s > best || r == 0) {
        best = s;
        best_map = m;
      }
    }
  }
  SmatchResult out = make_result(best, a.size(), b.size());
  out.mapping = std::move(best_map);
  return out;
}

SmatchResult corpus_smatch(const std::vector<SmatchResult>& per_sentence)
{
  std::size_t matched = 0, t = 0, g = 0;
  for (const auto& r : per_sentence) {
    matched += r.matched;
    t += r.test_triples;
    g += r.gold_triples;
  }
  return make_result(matched, t, g);
}

}  // namespace amrsbmt

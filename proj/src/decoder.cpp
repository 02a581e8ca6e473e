#include "amrsbmt/decoder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "amrsbmt/text.hpp"
#include "amrsbmt/transform.hpp"

namespace amrsbmt {

WeightVector default_weights()
{
  return {
      {"p_root", 0.3},  {"p_src", 1.0},   {"count", 0.2},  {"unique_source", 0.0},
      {"source_terminals", 0.1}, {"variables", 0.0}, {"rules", -0.1},
      {"oov", -3.0},    {"glue", -10.0},  {"ngram", 0.5},  {"ngram2", 0.5},
      {"amr", 0.3},
  };
}

WeightVector read_weights(std::istream& in)
{
  WeightVector w;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto t = trim(line);
    if (t.empty() || t[0] == '#')
      continue;
    auto f = split_whitespace(t);
    if (f.size() != 2)
      throw std::runtime_error("weights line " + std::to_string(n) + ": expected name and value");
    double v = parse_number(f[1]);
    if (!std::isfinite(v))
      throw std::runtime_error("weights line " + std::to_string(n) + ": weight is not finite");
    w[f[0]] = v;
  }
  return w;
}

void write_weights(std::ostream& out, const WeightVector& weights)
{
  for (const auto& [name, v] : weights)
    out << name << '\t' << format_number(v) << '\n';
}

double dot(const WeightVector& weights, const FeatureVector& features)
{
  double s = 0.0;
  for (const auto& [name, v] : features)
    if (auto it = weights.find(name); it != weights.end())
      s += it->second * v;
  return s;
}

FeatureVector Decoder::rule_features(const TranslationRule& rule)
{
  FeatureVector f;
  for (const auto& [name, v] : rule.features) {
    if (name == "p_root" || name == "p_src" || name == "count")
      f[name] = std::log(std::max(v, 1e-300));
    else
      f[name] = v;
  }
  f["rules"] = 1.0;
  return f;
}

namespace {

void add_into(FeatureVector& into, const FeatureVector& from)
{
  for (const auto& [k, v] : from)
    into[k] += v;
}

struct LmState {
  std::vector<std::string> prefix;  // leading words whose history is incomplete
  std::vector<std::string> suffix;  // trailing order-1 words
  double inside = 0.0;
  std::size_t length = 0;
};

struct Item {
  std::string label;
  std::shared_ptr<const SbmtTree> tree;
  std::string key;
  FeatureVector features;
  std::vector<LmState> lm;
  double heuristic = 0.0;
  std::shared_ptr<const DerivationNode> derivation;
};

using ItemPtr = std::shared_ptr<const Item>;

// Folds words and child states left to right into a new state.
class LmBuilder {
 public:
  LmBuilder(const NgramModel& model) : model_(model), window_size_(static_cast<std::size_t>(model.order() - 1)) {}

  void word(const std::string& w)
  {
    if (state_.length < window_size_)
      state_.prefix.push_back(w);
    else
      state_.inside += model_.log_prob(window_, w);
    push(w);
    ++state_.length;
  }

  void child(const LmState& c)
  {
    for (const auto& w : c.prefix)
      word(w);
    state_.inside += c.inside;
    if (c.length > c.prefix.size()) {
      state_.length += c.length - c.prefix.size();
      window_ = c.suffix;
    }
  }

  LmState finish()
  {
    state_.suffix = window_;
    return std::move(state_);
  }

 private:
  void push(const std::string& w)
  {
    if (window_size_ == 0)
      return;
    window_.push_back(w);
    if (window_.size() > window_size_)
      window_.erase(window_.begin());
  }

  const NgramModel& model_;
  std::size_t window_size_;
  std::vector<std::string> window_;
  LmState state_;
};

double prefix_estimate(const NgramModel& m, const LmState& s)
{
  double e = 0.0;
  for (std::size_t p = 0; p < s.prefix.size(); ++p)
    e += m.log_prob_partial(std::span<const std::string>(s.prefix.data(), p), s.prefix[p]);
  return e;
}

double sentence_score(const NgramModel& m, const LmState& s)
{
  double total = s.inside;
  for (std::size_t p = 0; p < s.prefix.size(); ++p)
    total += m.log_prob(std::span<const std::string>(s.prefix.data(), p), s.prefix[p]);
  total += m.log_prob(s.suffix, std::string(NgramModel::kEos));
  return total;
}

SbmtTree instantiate(const RuleNode& n, const std::vector<ItemPtr>& children)
{
  if (n.is_variable())
    return *children[static_cast<std::size_t>(n.variable)]->tree;
  SbmtTree out{n.label, {}};
  for (const auto& c : n.children)
    out.children.push_back(instantiate(c, children));
  return out;
}

void collect_subtrees(const SbmtTree& t, std::unordered_set<std::string>& out)
{
  out.insert(to_string(t));
  for (const auto& c : t.children)
    collect_subtrees(c, out);
}

class Search {
 public:
  Search(const RuleGrammar& grammar, const LanguageModels& models, const WeightVector& weights,
         const DecoderConfig& config, const std::vector<FeatureVector>& rule_features,
         const std::map<std::string, std::vector<std::size_t>>& unary, const std::vector<std::string>& source,
         const SbmtTree* reference)
      : grammar_(grammar),
        models_(models),
        weights_(weights),
        config_(config),
        rule_features_(rule_features),
        unary_(unary),
        source_(source),
        n_(source.size())
  {
    if (reference) {
      collect_subtrees(*reference, allowed_);
      goal_key_ = to_string(*reference);
    }
    chart_.assign(n_ * (n_ + 1), {});
  }

  DecodeResult run()
  {
    DecodeResult result;
    for (std::size_t len = 1; len <= n_; ++len)
      for (std::size_t i = 0; i + len <= n_; ++i)
        fill(i, i + len);
    for (const auto& cell : chart_)
      result.chart_items += cell.size();

    std::vector<ItemPtr> goals;
    if (n_ > 0)
      for (const auto& it : cell(0, n_))
        if (it->label == kInstanceLabel && (goal_key_.empty() || it->key == goal_key_))
          goals.push_back(it);

    if (goals.empty()) {
      if (!goal_key_.empty())
        return result;
      result.glue = true;
      result.kbest.push_back(glue());
      return result;
    }

    std::vector<Hypothesis> complete;
    for (const auto& g : goals)
      complete.push_back(finish(*g));
    auto by_score = [](const Hypothesis& a, const Hypothesis& b) { return a.score > b.score; };
    std::stable_sort(complete.begin(), complete.end(), by_score);
    if (models_.amr) {
      if (config_.rescore_k > 0 && complete.size() > config_.rescore_k)
        complete.resize(config_.rescore_k);
      for (auto& h : complete) {
        double lp;
        try {
          lp = models_.amr->log_probability(to_amr(h.tree), config_.use_semcat);
        } catch (const std::exception&) {
          lp = -1e4;
        }
        h.features["amr"] = lp;
        h.score = dot(weights_, h.features);
      }
      std::stable_sort(complete.begin(), complete.end(), by_score);
    }
    std::set<std::string> seen;
    for (auto& h : complete) {
      if (result.kbest.size() >= std::max<std::size_t>(config_.kbest, 1))
        break;
      if (seen.insert(to_string(h.tree)).second)
        result.kbest.push_back(std::move(h));
    }
    return result;
  }

 private:
  std::vector<ItemPtr>& cell(std::size_t i, std::size_t j) { return chart_[i * (n_ + 1) + j]; }

  double heuristic(const Item& it) const
  {
    double h = dot(weights_, it.features);
    for (std::size_t k = 0; k < models_.ngrams.size(); ++k) {
      const auto& [name, m] = models_.ngrams[k];
      h += weight(name) * (it.lm[k].inside + prefix_estimate(*m, it.lm[k]));
    }
    return h;
  }

  double weight(const std::string& name) const
  {
    auto it = weights_.find(name);
    return it == weights_.end() ? 0.0 : it->second;
  }

  std::optional<Item> build(std::size_t rule, const std::vector<ItemPtr>& children)
  {
    const auto& r = grammar_[rule];
    Item it;
    it.label = r.root();
    auto tree = std::make_shared<SbmtTree>(instantiate(r.target, children));
    it.key = to_string(*tree);
    if (!allowed_.empty() && !allowed_.count(it.key))
      return std::nullopt;
    it.tree = std::move(tree);
    it.features = rule_features_[rule];
    auto d = std::make_shared<DerivationNode>();
    d->kind = StepKind::rule;
    d->rule = rule;
    for (const auto& c : children) {
      add_into(it.features, c->features);
      d->children.push_back(c->derivation);
    }
    it.derivation = std::move(d);
    for (const auto& [name, m] : models_.ngrams) {
      const std::size_t k = it.lm.size();
      LmBuilder b(*m);
      std::function<void(const RuleNode&)> walk = [&](const RuleNode& n) {
        if (n.is_variable())
          b.child(children[static_cast<std::size_t>(n.variable)]->lm[k]);
        else if (n.is_terminal())
          b.word(n.label);
        else
          for (const auto& c : n.children)
            walk(c);
      };
      walk(r.target);
      it.lm.push_back(b.finish());
    }
    it.heuristic = heuristic(it);
    return it;
  }

  Item oov_item(const std::string& word)
  {
    Item it;
    it.label = std::string(kInstanceLabel);
    it.tree = std::make_shared<SbmtTree>(SbmtTree{std::string(kInstanceLabel), {preterminal(word + "P", word)}});
    it.key = to_string(*it.tree);
    it.features["oov"] = 1.0;
    auto d = std::make_shared<DerivationNode>();
    d->kind = StepKind::oov;
    it.derivation = std::move(d);
    for (const auto& [name, m] : models_.ngrams) {
      LmBuilder b(*m);
      b.word(word);
      it.lm.push_back(b.finish());
    }
    it.heuristic = heuristic(it);
    return it;
  }

  // Variable spans for matching rule `r` against [i, j).
  void match(const TranslationRule& r, const std::vector<std::string>& labels, std::size_t item, std::size_t pos,
             std::size_t j, std::vector<std::pair<std::size_t, std::size_t>>& spans,
             std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& out)
  {
    if (item == r.source.size()) {
      if (pos == j)
        out.push_back(spans);
      return;
    }
    if (pos >= j)
      return;
    const auto& s = r.source[item];
    if (!s.is_variable()) {
      if (source_[pos] == s.token)
        match(r, labels, item + 1, pos + 1, j, spans, out);
      return;
    }
    const std::size_t remaining = r.source.size() - item - 1;
    const auto& want = labels[static_cast<std::size_t>(s.variable)];
    for (std::size_t end = pos + 1; end + remaining <= j; ++end) {
      bool present = false;
      for (const auto& it : cell(pos, end))
        if (it->label == want) {
          present = true;
          break;
        }
      if (!present)
        continue;
      spans[static_cast<std::size_t>(s.variable)] = {pos, end};
      match(r, labels, item + 1, end, j, spans, out);
    }
  }

  std::vector<ItemPtr> items_with(std::size_t i, std::size_t j, const std::string& label)
  {
    std::vector<ItemPtr> out;
    for (const auto& it : cell(i, j))
      if (it->label == label)
        out.push_back(it);
    return out;
  }

  // Best-first enumeration over the product of candidate lists (sorted best first).
  std::vector<std::vector<ItemPtr>> combinations(const std::vector<std::vector<ItemPtr>>& lists)
  {
    std::vector<std::vector<ItemPtr>> out;
    std::size_t total = 1;
    for (const auto& l : lists) {
      if (l.empty())
        return out;
      total = total > std::numeric_limits<std::size_t>::max() / l.size() ? std::numeric_limits<std::size_t>::max()
                                                                          : total * l.size();
    }
    const std::size_t cap = config_.max_combinations == 0 ? total : std::min(total, config_.max_combinations);
    if (cap == total) {
      std::vector<std::size_t> idx(lists.size(), 0);
      while (true) {
        std::vector<ItemPtr> combo;
        for (std::size_t k = 0; k < lists.size(); ++k)
          combo.push_back(lists[k][idx[k]]);
        out.push_back(std::move(combo));
        std::size_t k = 0;
        while (k < lists.size() && ++idx[k] == lists[k].size())
          idx[k++] = 0;
        if (k == lists.size())
          break;
      }
      return out;
    }
    using Entry = std::pair<double, std::vector<std::size_t>>;
    auto cmp = [](const Entry& a, const Entry& b) { return a.first < b.first || (a.first == b.first && a.second > b.second); };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
    std::set<std::vector<std::size_t>> seen;
    auto value = [&](const std::vector<std::size_t>& idx) {
      double v = 0.0;
      for (std::size_t k = 0; k < lists.size(); ++k)
        v += lists[k][idx[k]]->heuristic;
      return v;
    };
    std::vector<std::size_t> start(lists.size(), 0);
    heap.push({value(start), start});
    seen.insert(start);
    while (!heap.empty() && out.size() < cap) {
      auto [v, idx] = heap.top();
      heap.pop();
      std::vector<ItemPtr> combo;
      for (std::size_t k = 0; k < lists.size(); ++k)
        combo.push_back(lists[k][idx[k]]);
      out.push_back(std::move(combo));
      for (std::size_t k = 0; k < lists.size(); ++k) {
        if (idx[k] + 1 >= lists[k].size())
          continue;
        auto next = idx;
        ++next[k];
        if (seen.insert(next).second)
          heap.push({value(next), next});
      }
    }
    return out;
  }

  void offer(std::unordered_map<std::string, ItemPtr>& best, Item&& it, std::vector<ItemPtr>* fresh)
  {
    const std::string key = it.label + '\t' + it.key;
    auto found = best.find(key);
    if (found != best.end() && found->second->heuristic >= it.heuristic)
      return;
    auto ptr = std::make_shared<const Item>(std::move(it));
    best[key] = ptr;
    if (fresh)
      fresh->push_back(ptr);
  }

  void fill(std::size_t i, std::size_t j)
  {
    std::unordered_map<std::string, ItemPtr> best;

    if (j == i + 1 && !grammar_.has_terminal(source_[i])) {
      Item it = oov_item(source_[i]);
      if (allowed_.empty() || allowed_.count(it.key))
        offer(best, std::move(it), nullptr);
    }

    std::vector<std::size_t> candidates = grammar_.by_first_terminal(source_[i]);
    for (auto r : grammar_.variable_initial())
      if (grammar_[r].source.size() > 1)
        candidates.push_back(r);
    for (auto r : candidates) {
      const auto& rule = grammar_[r];
      if (rule.source.empty() || rule.source.size() > j - i)
        continue;
      auto labels = rule.variable_labels();
      std::vector<std::pair<std::size_t, std::size_t>> spans(labels.size());
      std::vector<std::vector<std::pair<std::size_t, std::size_t>>> matches;
      match(rule, labels, 0, i, j, spans, matches);
      for (const auto& m : matches) {
        std::vector<std::vector<ItemPtr>> lists;
        for (std::size_t v = 0; v < labels.size(); ++v)
          lists.push_back(items_with(m[v].first, m[v].second, labels[v]));
        for (const auto& combo : combinations(lists))
          if (auto it = build(r, combo))
            offer(best, std::move(*it), nullptr);
      }
    }

    // Unary closure over items of this span.
    std::vector<ItemPtr> frontier;
    for (const auto& [k, v] : best)
      frontier.push_back(v);
    for (int round = 0; round < config_.max_unary_rounds && !frontier.empty(); ++round) {
      std::vector<ItemPtr> fresh;
      std::sort(frontier.begin(), frontier.end(), [](const ItemPtr& a, const ItemPtr& b) { return a->key < b->key; });
      for (const auto& child : frontier) {
        auto u = unary_.find(child->label);
        if (u == unary_.end())
          continue;
        for (auto r : u->second)
          if (auto it = build(r, {child}))
            offer(best, std::move(*it), &fresh);
      }
      frontier = std::move(fresh);
    }

    auto& out = cell(i, j);
    for (auto& [k, v] : best)
      out.push_back(v);
    std::sort(out.begin(), out.end(), [](const ItemPtr& a, const ItemPtr& b) {
      if (a->heuristic != b->heuristic)
        return a->heuristic > b->heuristic;
      if (a->label != b->label)
        return a->label < b->label;
      return a->key < b->key;
    });
    if (config_.beam > 0 && out.size() > config_.beam)
      out.resize(config_.beam);
  }

  Hypothesis finish(const Item& it) const
  {
    Hypothesis h;
    h.tree = *it.tree;
    h.features = it.features;
    for (std::size_t k = 0; k < models_.ngrams.size(); ++k)
      h.features[models_.ngrams[k].first] = sentence_score(*models_.ngrams[k].second, it.lm[k]);
    h.score = dot(weights_, h.features);
    h.derivation = it.derivation;
    return h;
  }

  Hypothesis glue()
  {
    std::vector<ItemPtr> pieces;
    for (std::size_t i = 0; i < n_;) {
      ItemPtr chosen;
      std::size_t end = i + 1;
      for (std::size_t j = n_; j > i && !chosen; --j) {
        for (const auto& it : cell(i, j))
          if (it->label == kInstanceLabel && is_instance_node(*it->tree)) {
            chosen = it;
            end = j;
            break;
          }
      }
      if (chosen)
        pieces.push_back(chosen);
      i = end;
    }
    Hypothesis h;
    h.glue = true;
    auto d = std::make_shared<DerivationNode>();
    d->kind = StepKind::glue;
    if (pieces.size() == 1) {
      h.tree = *pieces.front()->tree;
    } else if (pieces.empty()) {
      h.tree = SbmtTree{std::string(kInstanceLabel), {preterminal("amr-emptyP", "amr-empty")}};
    } else {
      h.tree = SbmtTree{std::string(kInstanceLabel), {preterminal("multi-sentenceP", "multi-sentence")}};
      for (std::size_t k = 0; k < pieces.size(); ++k) {
        const std::string role = "snt" + std::to_string(k + 1);
        h.tree.children.push_back(preterminal(role + "P", role));
        h.tree.children.push_back(*pieces[k]->tree);
      }
    }
    for (const auto& p : pieces) {
      add_into(h.features, p->features);
      d->children.push_back(p->derivation);
    }
    h.features["glue"] = 1.0;
    const auto words = yield_amrese(h.tree);
    for (const auto& [name, m] : models_.ngrams)
      h.features[name] = m->score_sequence(words);
    if (models_.amr) {
      try {
        h.features["amr"] = models_.amr->log_probability(derivation_to_amr(h.tree), config_.use_semcat);
      } catch (const std::exception&) {
        h.features["amr"] = -1e4;
      }
    }
    h.score = dot(weights_, h.features);
    h.derivation = std::move(d);
    return h;
  }

  const RuleGrammar& grammar_;
  const LanguageModels& models_;
  const WeightVector& weights_;
  const DecoderConfig& config_;
  const std::vector<FeatureVector>& rule_features_;
  const std::map<std::string, std::vector<std::size_t>>& unary_;
  const std::vector<std::string>& source_;
  std::size_t n_;
  std::vector<std::vector<ItemPtr>> chart_;
  std::unordered_set<std::string> allowed_;
  std::string goal_key_;
};

}  // namespace

Decoder::Decoder(const RuleGrammar& grammar, LanguageModels models, WeightVector weights, DecoderConfig config)
    : grammar_(grammar), models_(std::move(models)), weights_(std::move(weights)), config_(config)
{
  for (const auto& [name, m] : models_.ngrams)
    if (!m || m->order() < 1)
      throw std::invalid_argument("n-gram model '" + name + "' is missing or untrained");
  for (const auto& [name, v] : weights_)
    if (!std::isfinite(v))
      throw std::invalid_argument("weight '" + name + "' is not finite");
  for (std::size_t i = 0; i < grammar.size(); ++i) {
    rule_features_.push_back(rule_features(grammar[i]));
    const auto& r = grammar[i];
    if (r.source.size() == 1 && r.source.front().is_variable())
      unary_by_label_[r.variable_labels().front()].push_back(i);
  }
}

DecodeResult Decoder::run(const std::vector<std::string>& source, const SbmtTree* reference) const
{
  Search search(grammar_, models_, weights_, config_, rule_features_, unary_by_label_, source, reference);
  return search.run();
}

DecodeResult Decoder::decode(const std::vector<std::string>& source) const
{
  return run(source, nullptr);
}

DecodeResult Decoder::force_decode(const std::vector<std::string>& source, const SbmtTree& reference) const
{
  return run(source, &reference);
}

std::vector<DecodeResult> Decoder::decode_corpus(const std::vector<std::vector<std::string>>& sentences,
                                                 unsigned jobs) const
{
  std::vector<DecodeResult> out(sentences.size());
  if (jobs <= 1 || sentences.size() <= 1) {
    for (std::size_t i = 0; i < sentences.size(); ++i)
      out[i] = decode(sentences[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < sentences.size(); i = next++)
          out[i] = decode(sentences[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers)
    t.join();
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
  return out;
}

namespace {

void collect_fragments(const SbmtTree& node, std::vector<AmrGraph>& out)
{
  if (node.is_terminal() || node.is_preterminal())
    return;
  if (is_instance_node(node)) {
    try {
      out.push_back(to_amr(node));
      return;
    } catch (const AmrError&) {
    }
  }
  for (const auto& c : node.children)
    collect_fragments(c, out);
}

}  // namespace

AmrGraph derivation_to_amr(const SbmtTree& tree)
{
  try {
    AmrGraph g = to_amr(tree);
    g.validate();
    return g;
  } catch (const AmrError&) {
  }
  std::vector<AmrGraph> fragments;
  collect_fragments(tree, fragments);
  if (fragments.size() == 1)
    return fragments.front();
  AmrGraph g;
  g.root = "v0";
  if (fragments.empty()) {
    g.concepts["v0"] = "amr-empty";
    return g;
  }
  g.concepts["v0"] = "multi-sentence";
  std::size_t counter = 1;
  for (std::size_t k = 0; k < fragments.size(); ++k) {
    const auto& f = fragments[k];
    std::map<std::string, std::string> rename;
    for (const auto& [v, c] : f.concepts) {
      rename[v] = "v" + std::to_string(counter++);
      g.concepts[rename[v]] = c;
    }
    g.roles.push_back({"v0", "snt" + std::to_string(k + 1), rename[f.root], false});
    for (const auto& r : f.roles)
      g.roles.push_back({rename[r.source], r.label, r.constant ? r.target : rename[r.target], r.constant});
  }
  return g;
}

std::string format_kbest_line(std::size_t sentence_id, const Hypothesis& h)
{
  return std::to_string(sentence_id) + " ||| " + format_number(h.score) + " ||| " + join(yield_amrese(h.tree), " ") +
         " ||| " + emit_penman(derivation_to_amr(h.tree), PenmanLayout::single_line);
}

}  // namespace amrsbmt

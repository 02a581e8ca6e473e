#include "amrsbmt/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "amrsbmt/text.hpp"

namespace amrsbmt {

namespace {

bool looks_like_variable_token(std::string_view t)
{
  if (t.size() < 2 || t[0] != 'x')
    return false;
  std::size_t i = 1;
  while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i])))
    ++i;
  return i > 1 && (i == t.size() || t[i] == ':');
}

std::string escape_literal(const std::string& token)
{
  if (looks_like_variable_token(token) || (!token.empty() && token[0] == '\\'))
    return "\\" + token;
  return token;
}

void render(const RuleNode& n, std::string& out)
{
  if (n.is_variable()) {
    out += 'x' + std::to_string(n.variable) + ':' + n.label;
    return;
  }
  if (n.is_terminal()) {
    out += escape_literal(n.label);
    return;
  }
  out += '(';
  out += n.label;
  for (const auto& c : n.children) {
    out += ' ';
    render(c, out);
  }
  out += ')';
}

RuleNode parse_fragment_node(const std::vector<std::string>& toks, std::size_t& pos)
{
  if (pos >= toks.size())
    throw std::invalid_argument("rule fragment: unexpected end of input");
  const std::string& t = toks[pos];
  if (t == ")")
    throw std::invalid_argument("rule fragment: unexpected ')'");
  if (t != "(") {
    ++pos;
    if (t[0] == '\\')
      return RuleNode{t.substr(1), {}, -1};
    if (looks_like_variable_token(t)) {
      auto colon = t.find(':');
      if (colon == std::string::npos || colon + 1 == t.size())
        throw std::invalid_argument("rule fragment: variable '" + t + "' has no label");
      return RuleNode{t.substr(colon + 1), {}, std::stoi(t.substr(1, colon - 1))};
    }
    return RuleNode{t, {}, -1};
  }
  ++pos;
  if (pos >= toks.size() || toks[pos] == "(" || toks[pos] == ")")
    throw std::invalid_argument("rule fragment: node without a label");
  RuleNode node{toks[pos++], {}, -1};
  while (pos < toks.size() && toks[pos] != ")")
    node.children.push_back(parse_fragment_node(toks, pos));
  if (pos >= toks.size())
    throw std::invalid_argument("rule fragment: unbalanced parentheses");
  ++pos;
  if (node.children.empty())
    throw std::invalid_argument("rule fragment: node '" + node.label + "' has no children");
  return node;
}

std::string source_side_string(const std::vector<SourceItem>& items)
{
  std::vector<std::string> parts;
  for (const auto& s : items) {
    if (s.is_variable()) {
      parts.push_back("x" + std::to_string(s.variable));
    } else {
      std::string encoded = escape_token(s.token);
      parts.push_back(looks_like_variable_token(encoded) ? "\\" + encoded : encoded);
    }
  }
  return join(parts, " ");
}

std::vector<SourceItem> parse_source_side(std::string_view text)
{
  std::vector<SourceItem> out;
  for (const auto& t : split_whitespace(text)) {
    if (looks_like_variable_token(t))
      out.push_back({"", std::stoi(t.substr(1))});
    else if (t.size() > 1 && t[0] == '\\' && looks_like_variable_token(std::string_view(t).substr(1)))
      out.push_back({t.substr(1), -1});
    else
      out.push_back({unescape_token(t), -1});
  }
  return out;
}

void collect_variables(const RuleNode& n, std::vector<std::string>& labels)
{
  if (n.is_variable()) {
    if (labels.size() <= static_cast<std::size_t>(n.variable))
      labels.resize(static_cast<std::size_t>(n.variable) + 1);
    labels[static_cast<std::size_t>(n.variable)] = n.label;
    return;
  }
  for (const auto& c : n.children)
    collect_variables(c, labels);
}

}  // namespace

std::size_t TranslationRule::variable_count() const
{
  return variable_labels().size();
}

std::vector<std::string> TranslationRule::variable_labels() const
{
  std::vector<std::string> labels;
  collect_variables(target, labels);
  return labels;
}

std::string TranslationRule::source_string() const
{
  return source_side_string(source);
}

std::string TranslationRule::target_string() const
{
  return to_string(target);
}

std::string to_string(const RuleNode& fragment)
{
  std::string out;
  render(fragment, out);
  return out;
}

RuleNode parse_fragment(std::string_view text)
{
  auto toks = tokenize_brackets(text);
  std::size_t pos = 0;
  RuleNode n = parse_fragment_node(toks, pos);
  if (pos != toks.size())
    throw std::invalid_argument("rule fragment: trailing tokens");
  return n;
}

std::vector<const SbmtTree*> preorder(const SbmtTree& tree)
{
  std::vector<const SbmtTree*> out;
  std::function<void(const SbmtTree&)> walk = [&](const SbmtTree& n) {
    out.push_back(&n);
    for (const auto& c : n.children)
      walk(c);
  };
  walk(tree);
  return out;
}

namespace {

struct NodeSpan {
  int lo = 0, hi = 0;  // leaf interval [lo, hi)
  int min_src = -1, max_src = -1;
  bool frontier = false;
};

class Extractor {
 public:
  Extractor(const SbmtTree& tree, const LeafAlignment& alignment)
  {
    nodes_ = preorder(tree);
    spans_.resize(nodes_.size());
    const auto n_leaves = leaf_count(tree);
    leaf_sources_.resize(n_leaves);
    for (const auto& l : alignment) {
      if (l.leaf < 0 || static_cast<std::size_t>(l.leaf) >= n_leaves)
        throw std::invalid_argument("alignment refers to leaf " + std::to_string(l.leaf) + " outside the tree");
      if (l.source < 0)
        throw std::invalid_argument("negative source index in alignment");
      leaf_sources_[l.leaf].push_back(l.source);
      max_source_ = std::max(max_source_, l.source);
    }
    total_.assign(static_cast<std::size_t>(max_source_ + 1), 0);
    for (const auto& l : alignment)
      ++total_[l.source];
    std::size_t index = 0;
    int leaf = 0;
    compute(tree, index, leaf);
    spans_[0].frontier = true;
  }

  std::vector<bool> frontier() const
  {
    std::vector<bool> out;
    for (const auto& s : spans_)
      out.push_back(s.frontier);
    return out;
  }

  std::vector<TranslationRule> rules(const std::vector<std::string>& source)
  {
    if (max_source_ >= static_cast<int>(source.size()))
      throw std::invalid_argument("alignment refers to source position " + std::to_string(max_source_) +
                                  " beyond the sentence");
    std::vector<TranslationRule> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (spans_[i].frontier)
        out.push_back(rule_at(i, source));
    return out;
  }

 private:
  // Returns the source positions aligned under `n`; fills spans_ in preorder.
  std::vector<int> compute(const SbmtTree& n, std::size_t& index, int& leaf)
  {
    const std::size_t me = index++;
    spans_[me].lo = leaf;
    std::vector<int> inside;
    if (n.is_terminal()) {
      inside = leaf_sources_[static_cast<std::size_t>(leaf)];
      ++leaf;
    } else {
      for (const auto& c : n.children) {
        auto sub = compute(c, index, leaf);
        inside.insert(inside.end(), sub.begin(), sub.end());
      }
    }
    NodeSpan& s = spans_[me];
    s.hi = leaf;
    if (!inside.empty() && !n.is_terminal()) {
      s.min_src = *std::min_element(inside.begin(), inside.end());
      s.max_src = *std::max_element(inside.begin(), inside.end());
      std::vector<int> count(total_.size(), 0);
      for (int x : inside)
        ++count[static_cast<std::size_t>(x)];
      bool ok = true;
      for (int p = s.min_src; ok && p <= s.max_src; ++p)
        ok = count[static_cast<std::size_t>(p)] == total_[static_cast<std::size_t>(p)];
      s.frontier = ok;
    }
    return inside;
  }

  TranslationRule rule_at(std::size_t root, const std::vector<std::string>& source)
  {
    struct Site {
      int min_src, max_src, variable;
    };
    std::vector<Site> sites;
    int next_var = 0;
    // Preorder indices are recovered by walking the subtree alongside the nodes_ vector.
    std::function<RuleNode(std::size_t&, bool)> build = [&](std::size_t& i, bool is_root) -> RuleNode {
      const std::size_t me = i++;
      const SbmtTree& n = *nodes_[me];
      const std::size_t subtree_end = me + node_count(n);
      if (!is_root && spans_[me].frontier) {
        sites.push_back({spans_[me].min_src, spans_[me].max_src, next_var});
        i = subtree_end;
        return RuleNode{n.label, {}, next_var++};
      }
      RuleNode out{n.label, {}, -1};
      while (i < subtree_end)
        out.children.push_back(build(i, false));
      return out;
    };
    std::size_t i = root;
    TranslationRule rule;
    rule.target = build(i, true);

    int lo = 0, hi = static_cast<int>(source.size()) - 1;
    if (root != 0) {
      lo = spans_[root].min_src;
      hi = spans_[root].max_src;
    }
    std::sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) { return a.min_src < b.min_src; });
    std::size_t next_site = 0;
    for (int p = lo; p <= hi;) {
      if (next_site < sites.size() && sites[next_site].min_src == p) {
        rule.source.push_back({"", sites[next_site].variable});
        p = sites[next_site].max_src + 1;
        ++next_site;
      } else {
        rule.source.push_back({source[static_cast<std::size_t>(p)], -1});
        ++p;
      }
    }
    if (next_site != sites.size())
      throw std::logic_error("frontier descendant outside its rule's source interval");
    rule.features["count"] = 1.0;
    return rule;
  }

  std::vector<const SbmtTree*> nodes_;
  std::vector<NodeSpan> spans_;
  std::vector<std::vector<int>> leaf_sources_;
  std::vector<int> total_;
  int max_source_ = -1;
};

}  // namespace

std::vector<bool> frontier_set(const SbmtTree& tree, const LeafAlignment& alignment)
{
  return Extractor(tree, alignment).frontier();
}

std::vector<TranslationRule> extract_minimal_rules(const std::vector<std::string>& source, const SbmtTree& tree,
                                                   const LeafAlignment& alignment)
{
  return Extractor(tree, alignment).rules(source);
}

void RuleGrammar::add(TranslationRule rule)
{
  if (!rule.features.count("count"))
    rule.features["count"] = 1.0;
  const std::string key = rule.root() + '\t' + rule.source_string() + '\t' + rule.target_string();
  if (auto it = key_index_.find(key); it != key_index_.end()) {
    rules_[it->second].features["count"] += rule.features["count"];
    return;
  }
  key_index_.emplace(key, rules_.size());
  rules_.push_back(std::move(rule));
  index(rules_.size() - 1);
}

void RuleGrammar::index(std::size_t i)
{
  const auto& r = rules_[i];
  by_root_[r.root()].push_back(i);
  if (r.source.empty() || r.source.front().is_variable())
    variable_initial_.push_back(i);
  else
    by_first_terminal_[r.source.front().token].push_back(i);
  for (const auto& s : r.source)
    if (!s.is_variable())
      ++terminals_[s.token];
}

void RuleGrammar::score()
{
  std::map<std::string, double> root_total, target_total;
  std::map<std::string, std::size_t> source_types;
  for (const auto& r : rules_) {
    const double c = r.features.at("count");
    root_total[r.root()] += c;
    target_total[r.target_string()] += c;
    ++source_types[r.source_string()];
  }
  for (auto& r : rules_) {
    const double c = r.features.at("count");
    std::size_t terminals = 0;
    for (const auto& s : r.source)
      terminals += s.is_variable() ? 0 : 1;
    r.features["p_root"] = c / root_total[r.root()];
    r.features["p_src"] = c / target_total[r.target_string()];
    r.features["unique_source"] = source_types[r.source_string()] == 1 ? 1.0 : 0.0;
    r.features["source_terminals"] = static_cast<double>(terminals);
    r.features["variables"] = static_cast<double>(r.variable_count());
  }
}

const std::vector<std::size_t>& RuleGrammar::by_root(const std::string& label) const
{
  static const std::vector<std::size_t> none;
  auto it = by_root_.find(label);
  return it == by_root_.end() ? none : it->second;
}

const std::vector<std::size_t>& RuleGrammar::by_first_terminal(const std::string& token) const
{
  static const std::vector<std::size_t> none;
  auto it = by_first_terminal_.find(token);
  return it == by_first_terminal_.end() ? none : it->second;
}

void RuleGrammar::save(std::ostream& out) const
{
  for (const auto& r : rules_) {
    std::vector<std::string> feats;
    for (const auto& [name, value] : r.features)
      feats.push_back(name + "=" + format_number(value));
    out << r.root() << '\t' << r.source_string() << '\t' << r.target_string() << '\t' << join(feats, ",") << '\n';
  }
}

RuleGrammar RuleGrammar::load(std::istream& in)
{
  RuleGrammar g;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty())
      continue;
    auto f = split(line, '\t');
    if (f.size() != 4)
      throw std::runtime_error("grammar line " + std::to_string(n) + ": expected 4 tab-separated fields");
    TranslationRule r;
    try {
      r.target = parse_fragment(f[2]);
      r.source = parse_source_side(f[1]);
      for (const auto& kv : split(f[3], ',')) {
        if (kv.empty())
          continue;
        auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw std::invalid_argument("feature without '='");
        r.features[kv.substr(0, eq)] = parse_number(kv.substr(eq + 1));
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("grammar line " + std::to_string(n) + ": " + e.what());
    }
    if (r.root() != f[0])
      throw std::runtime_error("grammar line " + std::to_string(n) + ": root label does not match fragment");
    g.add(std::move(r));
  }
  return g;
}

}  // namespace amrsbmt

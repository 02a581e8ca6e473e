#include "amrsbmt/amr.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <istream>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_map>

#include "amrsbmt/text.hpp"

namespace amrsbmt {

PenmanError::PenmanError(const std::string& message, std::size_t line, std::size_t column)
    : AmrError(message + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
      line_(line),
      column_(column)
{
}

const std::string& AmrGraph::concept_of(const std::string& var) const
{
  auto it = concepts.find(var);
  if (it == concepts.end())
    throw AmrError("unknown variable '" + var + "'");
  return it->second;
}

std::map<std::string, std::vector<std::size_t>> AmrGraph::outgoing() const
{
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < roles.size(); ++i)
    out[roles[i].source].push_back(i);
  return out;
}

std::vector<std::size_t> AmrGraph::roles_of(const std::string& var) const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < roles.size(); ++i)
    if (roles[i].source == var)
      out.push_back(i);
  return out;
}

void AmrGraph::validate() const
{
  if (!has_instance(root))
    throw AmrError("root '" + root + "' is not an instance");
  for (const auto& r : roles) {
    if (!has_instance(r.source))
      throw AmrError("role :" + r.label + " leaves undefined variable '" + r.source + "'");
    if (!r.constant && !has_instance(r.target))
      throw AmrError("role :" + r.label + " points to undefined variable '" + r.target + "'");
  }

  auto out = outgoing();
  // 0 = unvisited, 1 = on stack, 2 = done
  std::map<std::string, int> state;
  std::function<void(const std::string&)> visit = [&](const std::string& var) {
    state[var] = 1;
    for (auto idx : out[var]) {
      const auto& r = roles[idx];
      if (r.constant)
        continue;
      int s = state[r.target];
      if (s == 1)
        throw AmrError("cycle through :" + r.label + " from '" + r.source + "' to '" + r.target + "'");
      if (s == 0)
        visit(r.target);
    }
    state[var] = 2;
  };
  visit(root);
  for (const auto& [var, concept_name] : concepts)
    if (state[var] != 2)
      throw AmrError("instance '" + var + "' is not reachable from the root");
}

bool AmrGraph::is_tree() const
{
  std::map<std::string, int> incoming;
  for (const auto& r : roles)
    if (!r.constant && ++incoming[r.target] > 1)
      return false;
  return incoming[root] == 0;
}

bool identical(const AmrGraph& a, const AmrGraph& b)
{
  return a.root == b.root && a.concepts == b.concepts && a.roles == b.roles;
}

bool isomorphic(const AmrGraph& a, const AmrGraph& b)
{
  if (a.instance_count() != b.instance_count() || a.roles.size() != b.roles.size())
    return false;
  auto out_a = a.outgoing();
  auto out_b = b.outgoing();
  std::map<std::string, std::string> fwd, back;
  std::vector<std::pair<std::string, std::string>> stack{{a.root, b.root}};
  fwd[a.root] = b.root;
  back[b.root] = a.root;
  while (!stack.empty()) {
    auto [va, vb] = stack.back();
    stack.pop_back();
    if (a.concept_of(va) != b.concept_of(vb))
      return false;
    const auto& ra = out_a[va];
    const auto& rb = out_b[vb];
    if (ra.size() != rb.size())
      return false;
    for (std::size_t k = 0; k < ra.size(); ++k) {
      const auto& x = a.roles[ra[k]];
      const auto& y = b.roles[rb[k]];
      if (x.label != y.label || x.constant != y.constant)
        return false;
      if (x.constant) {
        if (x.target != y.target)
          return false;
        continue;
      }
      auto f = fwd.find(x.target);
      auto g = back.find(y.target);
      if (f != fwd.end() || g != back.end()) {
        if (f == fwd.end() || g == back.end() || f->second != y.target)
          return false;
        continue;
      }
      fwd[x.target] = y.target;
      back[y.target] = x.target;
      stack.emplace_back(x.target, y.target);
    }
  }
  return fwd.size() == a.instance_count();
}

std::string canonical_form(const AmrGraph& tree)
{
  auto out = tree.outgoing();
  std::function<std::string(const std::string&)> render = [&](const std::string& var) {
    std::vector<std::string> parts;
    for (auto idx : out[var]) {
      const auto& r = tree.roles[idx];
      parts.push_back(":" + r.label + " " + (r.constant ? "'" + r.target : render(r.target)));
    }
    std::sort(parts.begin(), parts.end());
    std::string s = "(" + tree.concept_of(var);
    for (const auto& p : parts)
      s += " " + p;
    return s + ")";
  };
  return render(tree.root);
}

bool looks_like_variable(std::string_view token)
{
  static const std::regex pattern("[a-z][0-9]*");
  return std::regex_match(token.begin(), token.end(), pattern);
}

namespace {

enum class Tok { lparen, rparen, slash, role, symbol, string, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

std::vector<Token> tokenize(std::string_view text)
{
  std::vector<Token> tokens;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto delimiter = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '/';
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    std::size_t l = line, cl = col;
    if (c == '(') {
      tokens.push_back({Tok::lparen, "(", l, cl});
      advance(1);
    } else if (c == ')') {
      tokens.push_back({Tok::rparen, ")", l, cl});
      advance(1);
    } else if (c == '/') {
      tokens.push_back({Tok::slash, "/", l, cl});
      advance(1);
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"') {
        if (text[j] == '\\')
          ++j;
        ++j;
      }
      if (j >= text.size())
        throw PenmanError("unterminated string", l, cl);
      tokens.push_back({Tok::string, std::string(text.substr(i, j + 1 - i)), l, cl});
      advance(j + 1 - i);
    } else {
      std::size_t j = i;
      while (j < text.size() && !delimiter(text[j]))
        ++j;
      std::string word(text.substr(i, j - i));
      if (c == ':') {
        if (word.size() == 1)
          throw PenmanError("empty role label", l, cl);
        tokens.push_back({Tok::role, word.substr(1), l, cl});
      } else {
        tokens.push_back({Tok::symbol, word, l, cl});
      }
      advance(j - i);
    }
  }
  tokens.push_back({Tok::end, "", line, col});
  return tokens;
}

class PenmanParser {
 public:
  explicit PenmanParser(std::string_view text) : tokens_(tokenize(text)) {}

  AmrGraph parse()
  {
    if (peek().kind != Tok::lparen)
      fail("expected '('", peek());
    graph_.root = parse_node();
    if (peek().kind == Tok::rparen)
      fail("unbalanced parentheses: unexpected ')'", peek());
    if (peek().kind != Tok::end)
      fail("unexpected content after the graph", peek());
    resolve();
    check_acyclic();
    return std::move(graph_);
  }

 private:
  struct Pending {
    std::size_t role;
    Token token;
  };

  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  [[noreturn]] static void fail(const std::string& msg, const Token& t)
  {
    throw PenmanError(msg, t.line, t.column);
  }

  std::string parse_node()
  {
    const Token open = next();
    const Token& var_tok = next();
    if (var_tok.kind != Tok::symbol)
      fail(var_tok.kind == Tok::end ? "unbalanced parentheses" : "expected a variable", var_tok);
    std::string var = var_tok.text;
    if (graph_.has_instance(var) || defined_.count(var))
      fail("duplicate variable definition '" + var + "'", var_tok);
    defined_.insert(var);

    if (peek().kind != Tok::slash)
      fail("instance '" + var + "' has no concept", peek());
    next();
    const Token& concept_tok = next();
    if (concept_tok.kind != Tok::symbol && concept_tok.kind != Tok::string)
      fail("expected a concept after '/'", concept_tok);
    if (peek().kind == Tok::slash)
      fail("instance '" + var + "' has more than one concept", peek());
    graph_.concepts[var] = concept_tok.text;

    while (peek().kind == Tok::role) {
      const Token role_tok = next();
      const Token& filler = peek();
      Role role{var, role_tok.text, "", false};
      if (filler.kind == Tok::lparen) {
        std::size_t idx = graph_.roles.size();
        graph_.roles.push_back(role);
        role_tokens_.push_back(role_tok);
        graph_.roles[idx].target = parse_node();
      } else if (filler.kind == Tok::symbol || filler.kind == Tok::string) {
        pending_.push_back({graph_.roles.size(), filler});
        graph_.roles.push_back(role);
        role_tokens_.push_back(role_tok);
        next();
      } else if (filler.kind == Tok::end) {
        fail("unbalanced parentheses", open);
      } else {
        fail("role :" + role_tok.text + " has no filler", filler);
      }
    }
    const Token& close = next();
    if (close.kind == Tok::end)
      fail("unbalanced parentheses", open);
    if (close.kind == Tok::slash)
      fail("instance '" + var + "' has more than one concept", close);
    if (close.kind != Tok::rparen)
      fail("unexpected token '" + close.text + "'", close);
    return var;
  }

  void resolve()
  {
    for (const auto& p : pending_) {
      auto& role = graph_.roles[p.role];
      if (p.token.kind == Tok::symbol && graph_.has_instance(p.token.text)) {
        role.target = p.token.text;
      } else if (p.token.kind == Tok::symbol && looks_like_variable(p.token.text)) {
        fail("undefined variable '" + p.token.text + "'", p.token);
      } else {
        role.target = p.token.text;
        role.constant = true;
      }
    }
  }

  void check_acyclic()
  {
    auto out = graph_.outgoing();
    std::map<std::string, int> state;
    std::function<void(const std::string&)> visit = [&](const std::string& var) {
      state[var] = 1;
      for (auto idx : out[var]) {
        const auto& r = graph_.roles[idx];
        if (r.constant)
          continue;
        int s = state[r.target];
        if (s == 1)
          fail("cycle through :" + r.label, role_tokens_[idx]);
        if (s == 0)
          visit(r.target);
      }
      state[var] = 2;
    };
    visit(graph_.root);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  AmrGraph graph_;
  std::set<std::string> defined_;
  std::vector<Token> role_tokens_;
  std::vector<Pending> pending_;
};

}  // namespace

AmrGraph parse_penman(std::string_view text)
{
  return PenmanParser(text).parse();
}

std::vector<AmrGraph> read_penman_corpus(std::istream& in)
{
  std::vector<AmrGraph> graphs;
  std::vector<std::string> metadata;
  std::string body;
  std::size_t body_start = 0, line_no = 0;

  auto flush = [&]() {
    if (trim(body).empty()) {
      body.clear();
      metadata.clear();
      return;
    }
    try {
      AmrGraph g = parse_penman(body);
      g.metadata = std::move(metadata);
      graphs.push_back(std::move(g));
    } catch (const PenmanError& e) {
      std::string msg = e.what();
      msg = msg.substr(0, msg.rfind(" at line "));
      throw PenmanError(msg, e.line() + body_start - 1, e.column());
    }
    body.clear();
    metadata.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty()) {
      flush();
      continue;
    }
    if (t[0] == '#') {
      if (!body.empty())
        flush();
      metadata.push_back(line);
      continue;
    }
    if (body.empty())
      body_start = line_no;
    body += line;
    body += '\n';
  }
  flush();
  return graphs;
}

std::string emit_penman(const AmrGraph& graph, PenmanLayout layout)
{
  auto out = graph.outgoing();
  std::map<std::string, std::string> names;
  std::ostringstream os;
  std::function<void(const std::string&, std::size_t)> emit = [&](const std::string& var,
                                                                  std::size_t depth) {
    std::string name = "v" + std::to_string(names.size());
    names[var] = name;
    os << '(' << name << " / " << graph.concept_of(var);
    for (auto idx : out[var]) {
      const auto& r = graph.roles[idx];
      if (layout == PenmanLayout::indented)
        os << '\n' << std::string(4 * (depth + 1), ' ');
      else
        os << ' ';
      os << ':' << r.label << ' ';
      if (r.constant) {
        os << r.target;
      } else if (auto it = names.find(r.target); it != names.end()) {
        os << it->second;
      } else {
        emit(r.target, depth + 1);
      }
    }
    os << ')';
  };
  emit(graph.root, 0);
  return os.str();
}

void write_penman_corpus(std::ostream& out, const std::vector<AmrGraph>& graphs)
{
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (i)
      out << '\n';
    for (const auto& m : graphs[i].metadata)
      out << m << '\n';
    out << emit_penman(graphs[i]) << '\n';
  }
}

AmrGraph lowercase(const AmrGraph& graph)
{
  AmrGraph g = graph;
  for (auto& [var, concept_name] : g.concepts)
    concept_name = to_lower(concept_name);
  for (auto& r : g.roles)
    if (r.constant)
      r.target = to_lower(r.target);
  return g;
}

}  // namespace amrsbmt

#include "amrsbmt/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "amrsbmt/text.hpp"

namespace amrsbmt {

NgramModel NgramModel::train(const std::vector<std::vector<std::string>>& corpus, int order)
{
  if (order < 1)
    throw std::invalid_argument("n-gram order must be at least 1");
  if (corpus.empty())
    throw std::invalid_argument("cannot train an n-gram model on an empty corpus");
  NgramModel m;
  m.order_ = order;
  const std::string eos(kEos);
  for (const auto& sentence : corpus) {
    std::vector<std::string> history;
    for (const auto& w : sentence) {
      m.table_.add(m.context_of(history), w);
      history.push_back(w);
    }
    m.table_.add(m.context_of(history), eos);
  }
  return m;
}

std::vector<std::string> NgramModel::context_of(std::span<const std::string> history) const
{
  std::vector<std::string> ctx;
  const std::size_t want = static_cast<std::size_t>(order_ - 1);
  ctx.reserve(want);
  for (std::size_t i = 0; i < want; ++i) {
    if (i < history.size())
      ctx.push_back(history[history.size() - 1 - i]);
    else
      ctx.emplace_back(kBos);
  }
  return ctx;
}

double NgramModel::prob(std::span<const std::string> history, const std::string& word) const
{
  return table_.probability(context_of(history), word);
}

double NgramModel::log_prob(std::span<const std::string> history, const std::string& word) const
{
  return std::log(prob(history, word));
}

double NgramModel::log_prob_partial(std::span<const std::string> history, const std::string& word) const
{
  std::vector<std::string> ctx;
  const std::size_t want = std::min(history.size(), static_cast<std::size_t>(order_ - 1));
  for (std::size_t i = 0; i < want; ++i)
    ctx.push_back(history[history.size() - 1 - i]);
  return std::log(table_.probability(ctx, word));
}

double NgramModel::score_sequence(std::span<const std::string> tokens) const
{
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    total += log_prob(tokens.subspan(0, i), tokens[i]);
  total += log_prob(tokens, std::string(kEos));
  return total;
}

double NgramModel::perplexity(const std::vector<std::vector<std::string>>& corpus) const
{
  double logp = 0.0;
  std::size_t n = 0;
  for (const auto& s : corpus) {
    logp += score_sequence(s);
    n += s.size() + 1;
  }
  if (n == 0)
    return 1.0;
  return std::exp(-logp / static_cast<double>(n));
}

void NgramModel::save(std::ostream& out) const
{
  out << "amrsbmt-ngram\t1\n";
  out << "order\t" << order_ << '\n';
  out << "\\table ngram\n";
  table_.write(out);
  out << "\\end\n";
}

NgramModel NgramModel::load(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line) || line != "amrsbmt-ngram\t1")
    throw std::runtime_error("not an amrsbmt n-gram model (version 1)");
  NgramModel m;
  if (!std::getline(in, line) || !starts_with(line, "order\t"))
    throw std::runtime_error("n-gram model: missing order");
  m.order_ = std::stoi(line.substr(6));
  if (!std::getline(in, line) || line != "\\table ngram")
    throw std::runtime_error("n-gram model: missing table");
  std::string stop;
  m.table_.read(in, &stop);
  if (stop != "\\end")
    throw std::runtime_error("n-gram model: truncated");
  return m;
}

namespace {

std::string log10_text(double p)
{
  char buf[40];
  if (p <= 0)
    return "-99";
  std::snprintf(buf, sizeof buf, "%.7f", std::log10(p));
  return buf;
}

}  // namespace

void NgramModel::write_arpa(std::ostream& out) const
{
  const std::string bos(kBos), unk(kUnk);
  // entries[m] : n-gram text -> (prob, backoff, has_backoff)
  struct Entry {
    double prob = 0.0;
    double backoff = 0.0;
    bool has_backoff = false;
    bool event = false;
  };
  std::vector<std::map<std::vector<std::string>, Entry>> entries(static_cast<std::size_t>(order_));

  auto arpa_key = [](const std::vector<std::string>& ctx) {
    std::vector<std::string> g(ctx.rbegin(), ctx.rend());
    return g;
  };

  for (const auto& ctx : table_.contexts()) {
    const auto words = arpa_key(ctx);
    const double total = table_.total(ctx);
    const double types = table_.types(ctx);
    for (const auto& e : table_.events()) {
      if (table_.count(ctx, e) <= 0)
        continue;
      auto g = words;
      g.push_back(e);
      auto& entry = entries[g.size() - 1][g];
      entry.prob = table_.probability(ctx, e);
      entry.event = true;
    }
    if (!ctx.empty() && ctx.size() < static_cast<std::size_t>(order_)) {
      auto& entry = entries[words.size() - 1][words];
      entry.backoff = types / (total + types);
      entry.has_backoff = true;
    }
  }
  entries[0][{unk}].prob = table_.probability({}, unk);
  entries[0][{unk}].event = true;
  entries[0][{bos}];

  out << "\\data\\\n";
  for (std::size_t m = 0; m < entries.size(); ++m)
    out << "ngram " << m + 1 << '=' << entries[m].size() << '\n';
  for (std::size_t m = 0; m < entries.size(); ++m) {
    out << "\n\\" << m + 1 << "-grams:\n";
    for (const auto& [g, entry] : entries[m]) {
      out << (entry.event ? log10_text(entry.prob) : std::string("-99")) << '\t' << join(g, " ");
      if (entry.has_backoff)
        out << '\t' << log10_text(entry.backoff);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

}  // namespace amrsbmt

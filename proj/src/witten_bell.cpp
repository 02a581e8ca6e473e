#include "amrsbmt/witten_bell.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "amrsbmt/text.hpp"

namespace amrsbmt {

std::size_t WittenBellTable::KeyHash::operator()(const std::vector<int>& key) const noexcept
{
  std::size_t h = 1469598103934665603ull;
  for (int v : key) {
    h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

int WittenBellTable::intern(const std::string& s)
{
  auto [it, inserted] = ids_.emplace(s, static_cast<int>(names_.size()));
  if (inserted)
    names_.push_back(s);
  return it->second;
}

int WittenBellTable::lookup(const std::string& s) const
{
  auto it = ids_.find(s);
  return it == ids_.end() ? -1 : it->second;
}

void WittenBellTable::add(std::span<const std::string> context, const std::string& event, double count)
{
  if (count <= 0)
    throw std::invalid_argument("event counts must be positive");
  std::vector<int> key;
  key.reserve(context.size());
  for (const auto& c : context)
    key.push_back(intern(c));
  int e = intern(event);
  if (!is_event_[e]) {
    is_event_[e] = true;
    ++event_types_;
  }
  observations_[key][e] += count;
  for (std::size_t len = 0; len <= key.size(); ++len) {
    std::vector<int> prefix(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(len));
    auto& st = stats_[prefix];
    st.counts[e] += count;
    st.total += count;
  }
}

const WittenBellTable::Stats* WittenBellTable::find(std::span<const std::string> context, std::size_t length) const
{
  std::vector<int> key;
  key.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    int id = lookup(context[i]);
    if (id < 0)
      return nullptr;
    key.push_back(id);
  }
  auto it = stats_.find(key);
  return it == stats_.end() ? nullptr : &it->second;
}

double WittenBellTable::probability(std::span<const std::string> context, const std::string& event) const
{
  const int e = lookup(event);
  double p = 1.0 / static_cast<double>(event_types_ + 1);
  for (std::size_t len = 0; len <= context.size(); ++len) {
    const Stats* st = find(context, len);
    if (!st)
      break;
    double c = 0.0;
    if (e >= 0)
      if (auto it = st->counts.find(e); it != st->counts.end())
        c = it->second;
    const double t = st->types();
    p = (c + t * p) / (st->total + t);
  }
  return p;
}

double WittenBellTable::ml_probability(std::span<const std::string> context, const std::string& event) const
{
  const Stats* st = find(context, context.size());
  if (!st)
    return 0.0;
  return count(context, event) / st->total;
}

double WittenBellTable::count(std::span<const std::string> context, const std::string& event) const
{
  const Stats* st = find(context, context.size());
  int e = lookup(event);
  if (!st || e < 0)
    return 0.0;
  auto it = st->counts.find(e);
  return it == st->counts.end() ? 0.0 : it->second;
}

double WittenBellTable::total(std::span<const std::string> context) const
{
  const Stats* st = find(context, context.size());
  return st ? st->total : 0.0;
}

double WittenBellTable::types(std::span<const std::string> context) const
{
  const Stats* st = find(context, context.size());
  return st ? st->types() : 0.0;
}

std::vector<std::string> WittenBellTable::events() const
{
  std::vector<std::string> out;
  for (const auto& [id, flag] : is_event_)
    if (flag)
      out.push_back(names_[id]);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t WittenBellTable::event_types() const
{
  return event_types_;
}

std::vector<WittenBellTable::Context> WittenBellTable::contexts() const
{
  std::vector<Context> out;
  for (const auto& [key, st] : stats_) {
    Context c;
    for (int id : key)
      c.push_back(names_[id]);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void WittenBellTable::write(std::ostream& out) const
{
  std::vector<std::string> lines;
  for (const auto& [key, events] : observations_) {
    std::vector<std::string> ctx;
    for (int id : key)
      ctx.push_back(escape_token(names_[id]));
    std::string prefix = join(ctx, " ");
    for (const auto& [e, c] : events)
      lines.push_back(prefix + "\t" + escape_token(names_[e]) + "\t" + format_number(c));
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& l : lines)
    out << l << '\n';
}

void WittenBellTable::read(std::istream& in, std::string* stop)
{
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '\\') {
      if (stop)
        *stop = line;
      return;
    }
    if (line.empty())
      continue;
    auto f = split(line, '\t');
    if (f.size() != 3)
      throw std::runtime_error("malformed table line: " + line);
    std::vector<std::string> ctx;
    for (const auto& t : split_whitespace(f[0]))
      ctx.push_back(unescape_token(t));
    add(ctx, unescape_token(f[1]), parse_number(f[2]));
  }
  if (stop)
    stop->clear();
}

}  // namespace amrsbmt

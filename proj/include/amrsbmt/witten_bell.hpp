#pragma once

// Conditional event table with Witten-Bell interpolation. Contexts back off by
// dropping their rightmost element; below the empty context sits a uniform
// distribution over the observed events plus one unknown event:
//
//   P(e | h) = (c(h, e) + T(h) P(e | h')) / (c(h) + T(h))
//
// where T(h) is the number of distinct events seen after h and h' is h
// without its last element. Contexts never observed defer to h' entirely.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace amrsbmt {

class WittenBellTable {
 public:
  using Context = std::vector<std::string>;

  struct Stats {
    std::unordered_map<int, double> counts;
    double total = 0.0;
    double types() const { return static_cast<double>(counts.size()); }
  };

  void add(std::span<const std::string> context, const std::string& event, double count = 1.0);

  double probability(std::span<const std::string> context, const std::string& event) const;

  // Unsmoothed relative frequency at exactly this context (0 if unseen).
  double ml_probability(std::span<const std::string> context, const std::string& event) const;

  double count(std::span<const std::string> context, const std::string& event) const;
  double total(std::span<const std::string> context) const;
  double types(std::span<const std::string> context) const;

  // Observed event types (the support of the uniform floor, minus unknown).
  std::vector<std::string> events() const;
  std::size_t event_types() const;

  // Every context with data, at every backoff level.
  std::vector<Context> contexts() const;

  bool empty() const { return observations_.empty(); }

  // One line per (full context, event): context<TAB>event<TAB>count, with
  // context tokens escaped and space-joined.
  void write(std::ostream& out) const;
  // Reads lines until a line that starts with '\' or EOF; the terminating
  // line (if any) is returned through `stop`.
  void read(std::istream& in, std::string* stop);

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<int>& key) const noexcept;
  };

  int intern(const std::string& s);
  int lookup(const std::string& s) const;
  const Stats* find(std::span<const std::string> context, std::size_t length) const;

  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> names_;
  std::unordered_map<std::vector<int>, Stats, KeyHash> stats_;
  std::unordered_map<int, bool> is_event_;
  std::size_t event_types_ = 0;
  // Raw additions keyed by full context then event, kept for serialization.
  std::unordered_map<std::vector<int>, std::unordered_map<int, double>, KeyHash> observations_;
};

}  // namespace amrsbmt

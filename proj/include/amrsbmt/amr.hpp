#pragma once

// AMR graphs and their PENMAN serialization.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace amrsbmt {

// Concept of the placeholder instance that replaces a dropped re-entrant link.
inline constexpr std::string_view kPlaceholderConcept = "*";

class AmrError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PenmanError : public AmrError {
 public:
  PenmanError(const std::string& message, std::size_t line, std::size_t column);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// A role edge. `target` is a variable unless `constant` is set, in which case it
// holds the constant text verbatim (quoted strings keep their quotes).
struct Role {
  std::string source;
  std::string label;
  std::string target;
  bool constant = false;

  friend bool operator==(const Role&, const Role&) = default;
};

struct AmrGraph {
  std::string root;
  std::map<std::string, std::string> concepts;  // variable -> concept
  std::vector<Role> roles;                      // written order
  std::vector<std::string> metadata;            // '#' comment lines, verbatim

  bool has_instance(const std::string& var) const { return concepts.count(var) != 0; }
  const std::string& concept_of(const std::string& var) const;
  std::size_t instance_count() const { return concepts.size(); }

  // Outgoing role indices per variable, preserving written order.
  std::map<std::string, std::vector<std::size_t>> outgoing() const;
  std::vector<std::size_t> roles_of(const std::string& var) const;

  // Throws AmrError on any broken invariant: dangling variables, unreachable
  // instances, cycles.
  void validate() const;

  // Every instance has at most one incoming role edge.
  bool is_tree() const;
};

// Structural equality with matching variable names and role order.
bool identical(const AmrGraph& a, const AmrGraph& b);

// Equal up to a bijective renaming of variables; role order per instance must
// match. Works for re-entrant graphs.
bool isomorphic(const AmrGraph& a, const AmrGraph& b);

// Order- and name-independent canonical string of a tree-shaped graph; two
// tree-shaped graphs are equal as AMRs iff their canonical forms match.
std::string canonical_form(const AmrGraph& tree);

bool looks_like_variable(std::string_view token);

AmrGraph parse_penman(std::string_view text);

// Reads blank-line-separated PENMAN blocks; '#' lines become metadata.
std::vector<AmrGraph> read_penman_corpus(std::istream& in);

enum class PenmanLayout { indented, single_line };

// Variables are renamed v0, v1, ... in first-visit DFS order.
std::string emit_penman(const AmrGraph& graph, PenmanLayout layout = PenmanLayout::indented);

void write_penman_corpus(std::ostream& out, const std::vector<AmrGraph>& graphs);

// Lowercases concepts and constants (variables are untouched).
AmrGraph lowercase(const AmrGraph& graph);

}  // namespace amrsbmt

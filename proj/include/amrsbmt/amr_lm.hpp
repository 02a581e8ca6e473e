#pragma once

// Generative language model over tree-shaped AMRs.
//
//   P(i = (c, R) | l^, c^) = P(c | l^, c^) * prod_r [P(l | c) * P(i_r | l, c)] * P(STOP | c)
//
// Role labels and STOP share one event space per concept. Fillers that are
// `*` placeholders or string constants have no roles of their own and
// contribute only their concept factor. With semantic categories the concept
// factor becomes P(s_c | l^, s_c^, c^) * P(c | s_c, l^, s_c^, c^) and the role
// and STOP events condition on (s_c, c).

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amrsbmt/amr.hpp"
#include "amrsbmt/semcat.hpp"
#include "amrsbmt/witten_bell.hpp"

namespace amrsbmt {

inline constexpr std::string_view kRootSymbol = "ROOT";
inline constexpr std::string_view kStopSymbol = "STOP";

struct AmrFactor {
  std::string table;
  std::vector<std::string> context;
  std::string event;
  double probability = 0.0;
};

struct AmrScore {
  double log_probability = 0.0;
  std::vector<AmrFactor> factors;
};

class AmrTreeModel {
 public:
  AmrTreeModel() = default;

  // Throws AmrError when a graph is not tree-shaped.
  static AmrTreeModel train(const std::vector<AmrGraph>& corpus, const SemanticTaxonomy* taxonomy = nullptr);

  AmrScore score(const AmrGraph& tree, bool use_semcat = false) const;
  double log_probability(const AmrGraph& tree, bool use_semcat = false) const
  {
    return score(tree, use_semcat).log_probability;
  }

  bool has_semcat() const { return semcat_; }
  std::string category_of(const std::string& concept_name) const;

  const WittenBellTable& concept_table() const { return concept_; }
  const WittenBellTable& role_table() const { return role_; }
  const WittenBellTable& category_table() const { return category_; }
  const WittenBellTable& concept_sc_table() const { return concept_sc_; }
  const WittenBellTable& role_sc_table() const { return role_sc_; }

  void save(std::ostream& out) const;
  static AmrTreeModel load(std::istream& in);

 private:
  void collect(const AmrGraph& g, const std::string& var, bool leaf, const std::string& role,
               const std::string& parent);

  WittenBellTable concept_;     // c | l^, c^
  WittenBellTable role_;        // l or STOP | c
  WittenBellTable category_;    // s_c | l^, s_c^, c^
  WittenBellTable concept_sc_;  // c | s_c, l^, s_c^, c^
  WittenBellTable role_sc_;     // l or STOP | s_c, c
  bool semcat_ = false;
  std::map<std::string, std::string> categories_;
  std::optional<SemanticTaxonomy> taxonomy_;
};

}  // namespace amrsbmt

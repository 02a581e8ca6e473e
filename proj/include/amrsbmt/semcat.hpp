#pragma once

// Semantic categories for AMR concepts.
//
// Sense counts of a lemma are smoothed (+0.1 per sense), propagated upward
// through an is-a DAG with counts summed where paths meet, and every salient
// category reached is scored by propagated count / prevalence, where
// prevalence is the number of lemma types whose propagation reached it.
//
// Input files:
//   hierarchy.tsv  child<TAB>parent
//   senses.tsv     lemma<TAB>category<TAB>count
//   salient.txt    one category per line

#include <iosfwd>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "amrsbmt/tree.hpp"

namespace amrsbmt {

inline constexpr std::string_view kFallbackCategory = "OTHER";
inline constexpr double kSenseSmoothing = 0.1;

class TaxonomyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CategoryWeight {
  std::string category;
  double propagated = 0.0;
  double prevalence = 0.0;
  double weight = 0.0;
  int depth = 0;
};

class SemanticTaxonomy {
 public:
  struct Sense {
    std::string category;
    double count = 0.0;
  };

  SemanticTaxonomy() = default;
  SemanticTaxonomy(std::vector<std::pair<std::string, std::string>> is_a,
                   std::map<std::string, std::vector<Sense>> senses, std::set<std::string> salient);
  SemanticTaxonomy(const SemanticTaxonomy& other);
  SemanticTaxonomy& operator=(const SemanticTaxonomy& other);

  static SemanticTaxonomy read(std::istream& hierarchy, std::istream& senses, std::istream& salient);
  static SemanticTaxonomy load(const std::string& hierarchy_path, const std::string& senses_path,
                               const std::string& salient_path);

  // `fear-01` -> `fear`.
  static std::string lemma_of(std::string_view concept_name);

  // Propagated smoothed count of the lemma at every node reached.
  std::map<std::string, double> propagate(std::string_view lemma) const;

  // Salient categories reached by the concept's lemma, with their weights.
  std::vector<CategoryWeight> weights(std::string_view concept_name) const;

  // Highest weight; ties go to the deeper category, then the smaller name.
  std::string assign(std::string_view concept_name) const;

  double prevalence(const std::string& category) const;
  int depth(const std::string& category) const;
  bool is_salient(const std::string& category) const { return salient_.count(category) != 0; }
  const std::set<std::string>& salient() const { return salient_; }
  const std::map<std::string, std::vector<Sense>>& senses() const { return senses_; }
  const std::map<std::string, std::vector<std::string>>& parents() const { return parents_; }

 private:
  void build();

  std::map<std::string, std::vector<std::string>> parents_;
  std::set<std::string> nodes_;
  std::map<std::string, std::vector<Sense>> senses_;
  std::set<std::string> salient_;
  std::map<std::string, double> prevalence_;
  std::map<std::string, int> depth_;

  mutable std::mutex memo_mutex_;
  mutable std::unordered_map<std::string, std::string> memo_;
};

// Replaces every concept preterminal label with the concept's category.
SbmtTree apply_categories(const SbmtTree& tree, const SemanticTaxonomy& taxonomy);

}  // namespace amrsbmt

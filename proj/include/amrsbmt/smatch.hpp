#pragma once

// Smatch: F-score over AMR triples under the best variable mapping.

#include <cstdint>
#include <string>
#include <vector>

#include "amrsbmt/amr.hpp"

namespace amrsbmt {

struct TripleSet {
  std::vector<std::string> variables;
  struct Instance {
    int var;
    std::string concept_name;
  };
  struct Relation {
    std::string label;
    int source;
    int target;
  };
  struct Attribute {
    std::string label;
    int source;
    std::string value;
  };
  std::vector<Instance> instances;
  std::vector<Relation> relations;
  std::vector<Attribute> attributes;  // includes TOP when requested

  std::size_t size() const { return instances.size() + relations.size() + attributes.size(); }
};

// One instance triple per variable, one relation or attribute triple per
// role, and (TOP, root, root concept) unless `include_top` is false.
TripleSet to_triples(const AmrGraph& g, bool include_top = true);

enum class SmatchMode { hill_climb, exact };

struct SmatchOptions {
  SmatchMode mode = SmatchMode::hill_climb;
  int restarts = 4;
  std::uint64_t seed = 1;
  bool include_top = true;
};

struct SmatchResult {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
  std::size_t matched = 0;
  std::size_t test_triples = 0;
  std::size_t gold_triples = 0;
  std::vector<int> mapping;  // test variable index -> gold variable index or -1
};

// Exact mode throws std::invalid_argument when both graphs have more than
// kExactLimit variables.
inline constexpr std::size_t kExactLimit = 8;

SmatchResult smatch(const AmrGraph& test, const AmrGraph& gold, const SmatchOptions& options = {});

// Matched triples of a given mapping.
std::size_t matched_triples(const TripleSet& test, const TripleSet& gold, const std::vector<int>& mapping);

SmatchResult make_result(std::size_t matched, std::size_t test_triples, std::size_t gold_triples);

// Corpus-level score: matched and total triple counts summed over pairs.
SmatchResult corpus_smatch(const std::vector<SmatchResult>& per_sentence);

}  // namespace amrsbmt

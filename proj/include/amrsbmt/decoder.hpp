#pragma once

// Bottom-up CKY decoding of a source sentence into SbmtTrees.
//
// Chart items are deduplicated per span by (root label, tree); n-gram
// language models are scored incrementally from each item's leading and
// trailing order-1 AMRese tokens, and the AMR language model rescores the
// best complete items. Weight names: rule features (p_root, p_src and count
// enter as logarithms), `rules`, `oov`, `glue`, one name per n-gram model and
// `amr`.

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "amrsbmt/amr.hpp"
#include "amrsbmt/amr_lm.hpp"
#include "amrsbmt/grammar.hpp"
#include "amrsbmt/ngram.hpp"
#include "amrsbmt/tree.hpp"

namespace amrsbmt {

using WeightVector = FeatureVector;

WeightVector default_weights();
WeightVector read_weights(std::istream& in);
void write_weights(std::ostream& out, const WeightVector& weights);
double dot(const WeightVector& weights, const FeatureVector& features);

struct DecoderConfig {
  std::size_t beam = 100;              // items kept per span; 0 keeps everything
  std::size_t kbest = 10;
  std::size_t rescore_k = 500;         // complete items rescored with the AMR LM
  std::size_t max_combinations = 1000; // per rule application; 0 = all
  int max_unary_rounds = 3;
  bool use_semcat = false;             // AMR LM reformulation with categories
};

struct LanguageModels {
  std::vector<std::pair<std::string, const NgramModel*>> ngrams;  // feature name, model
  const AmrTreeModel* amr = nullptr;
};

enum class StepKind { rule, oov, glue };

struct DerivationNode {
  StepKind kind = StepKind::rule;
  std::size_t rule = 0;  // grammar index for StepKind::rule
  std::vector<std::shared_ptr<const DerivationNode>> children;
};

struct Hypothesis {
  SbmtTree tree;
  double score = 0.0;
  FeatureVector features;
  std::shared_ptr<const DerivationNode> derivation;
  bool glue = false;
};

struct DecodeResult {
  std::vector<Hypothesis> kbest;  // best first
  bool glue = false;
  std::size_t chart_items = 0;
};

class Decoder {
 public:
  Decoder(const RuleGrammar& grammar, LanguageModels models, WeightVector weights, DecoderConfig config = {});

  DecodeResult decode(const std::vector<std::string>& source) const;

  // Only items whose tree is a subtree of `reference` survive, and a complete
  // item must equal it. No glue fallback: an empty k-best list means the
  // reference is not derivable.
  DecodeResult force_decode(const std::vector<std::string>& source, const SbmtTree& reference) const;

  std::vector<DecodeResult> decode_corpus(const std::vector<std::vector<std::string>>& sentences,
                                          unsigned jobs = 1) const;

  // Features a single application of a grammar rule contributes.
  static FeatureVector rule_features(const TranslationRule& rule);

  const WeightVector& weights() const { return weights_; }
  const DecoderConfig& config() const { return config_; }

 private:
  DecodeResult run(const std::vector<std::string>& source, const SbmtTree* reference) const;

  const RuleGrammar& grammar_;
  LanguageModels models_;
  WeightVector weights_;
  DecoderConfig config_;
  std::vector<FeatureVector> rule_features_;
  std::map<std::string, std::vector<std::size_t>> unary_by_label_;
};

// to_amr, except that a tree that does not describe one AMR (e.g. glued
// fragments) becomes a multi-sentence AMR over its well-formed instance
// subtrees, or (a / amr-empty) when there are none.
AmrGraph derivation_to_amr(const SbmtTree& tree);

// `id ||| score ||| AMRese ||| PENMAN` with the PENMAN on one line.
std::string format_kbest_line(std::size_t sentence_id, const Hypothesis& h);

}  // namespace amrsbmt

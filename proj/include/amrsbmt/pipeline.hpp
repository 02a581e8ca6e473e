#pragma once

// Corpus preparation, training and the end-to-end experiment runner.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amrsbmt/alignment.hpp"
#include "amrsbmt/amr.hpp"
#include "amrsbmt/amr_lm.hpp"
#include "amrsbmt/decoder.hpp"
#include "amrsbmt/grammar.hpp"
#include "amrsbmt/ngram.hpp"
#include "amrsbmt/semcat.hpp"
#include "amrsbmt/smatch.hpp"
#include "amrsbmt/transform.hpp"
#include "amrsbmt/tune.hpp"

namespace amrsbmt {

// Whitespace split, then punctuation split off word edges. Periods and commas
// between digits stay inside numbers; hyphens and apostrophes inside words
// stay. Running it on its own output changes nothing.
std::vector<std::string> tokenize(std::string_view text, bool lowercase = true);

struct TreeifyOptions {
  RestructureMode mode = RestructureMode::role_label;
  bool reorder = true;
  bool relabel = true;
  const SemanticTaxonomy* taxonomy = nullptr;
};

struct TreeifyResult {
  AmrGraph tree_graph;  // disconnected graph the tree encodes
  SbmtTree tree;
  LeafAlignment alignment;
  std::vector<ReorderedNode> nodes;
};

// disconnect, push labels, reorder, restructure, relabel, categorize.
TreeifyResult treeify(const AmrGraph& graph, const AlignmentSet& alignment, const TreeifyOptions& options);

struct ParallelCorpus {
  std::vector<std::vector<std::string>> sources;
  std::vector<AmrGraph> amrs;
  std::vector<AlignmentSet> alignments;  // empty when not supplied

  std::size_t size() const { return amrs.size(); }
};

// Reads sentences (one per line), PENMAN and (optionally) alignment files.
// Throws on count mismatches and bad alignments.
ParallelCorpus read_corpus(const std::string& source_path, const std::string& amr_path,
                           const std::string& alignment_path, bool lowercase);

std::vector<std::vector<std::string>> read_sentences(const std::string& path, bool lowercase);
std::vector<AlignmentSet> read_alignments(const std::string& path);

struct TrainedSystem {
  RuleGrammar grammar;
  std::vector<std::pair<std::string, NgramModel>> ngrams;
  std::optional<AmrTreeModel> amr;
  std::vector<SbmtTree> trees;
};

struct TrainingOptions {
  TreeifyOptions treeify;
  int ngram_order = 5;
  bool amr_lm = true;
};

// Extracts rules and trains language models. Each alignment set in
// `alignment_sets` contributes its own copy of the corpus to the grammar and
// its own AMRese n-gram model (`ngram`, `ngram2`, ...).
TrainedSystem train_system(const ParallelCorpus& corpus, const std::vector<std::vector<AlignmentSet>>& alignment_sets,
                           const TrainingOptions& options);

class PipelineConfig {
 public:
  static constexpr std::string_view kHeader = "amrsbmt-config\t1";

  PipelineConfig();

  static PipelineConfig parse(std::istream& in, const std::filesystem::path& base = {});
  static PipelineConfig load(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  std::string to_string() const;

  // Throws std::invalid_argument on unknown keys, bad values or missing files.
  void validate() const;

  const std::string& get(const std::string& key) const;
  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const;
  bool flag(const std::string& key) const;
  long integer(const std::string& key) const;
  std::string path(const std::string& key) const;  // resolved against the config directory

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::filesystem::path& base() const { return base_; }

  static const std::map<std::string, std::string>& defaults();

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_;
};

struct PipelineResult {
  std::optional<SmatchResult> tune;
  std::optional<SmatchResult> test;
  bool ok = true;
  std::string failed_stage;
};

// Runs every stage and writes its outputs, a manifest and scores.tsv under
// `run_dir`. Stage failures are recorded in the manifest; later stages are
// skipped.
PipelineResult run_pipeline(const PipelineConfig& config, const std::filesystem::path& run_dir, unsigned jobs = 1);

}  // namespace amrsbmt

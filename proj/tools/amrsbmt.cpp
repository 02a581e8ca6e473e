// Command-line front end: one subcommand per pipeline stage plus `run`.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amrsbmt/pipeline.hpp"
#include "amrsbmt/text.hpp"

using namespace amrsbmt;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

std::ifstream open_in(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path)
{
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  return out;
}

std::vector<AmrGraph> read_amrs(const std::string& path, bool lower)
{
  auto in = open_in(path);
  auto graphs = read_penman_corpus(in);
  if (lower)
    for (auto& g : graphs)
      g = lowercase(g);
  return graphs;
}

std::vector<std::vector<std::string>> read_token_lines(std::istream& in, bool tokenize_text, bool lower)
{
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line))
    out.push_back(tokenize_text ? tokenize(line, lower) : split_whitespace(lower ? to_lower(line) : line));
  return out;
}

// hierarchy,senses,salient
std::optional<SemanticTaxonomy> load_taxonomy(const std::string& files)
{
  if (files.empty())
    return std::nullopt;
  auto parts = split(files, ',');
  if (parts.size() != 3)
    throw std::invalid_argument("--semcat expects hierarchy,senses,salient");
  return SemanticTaxonomy::load(parts[0], parts[1], parts[2]);
}

struct TreeifyFlags {
  std::string restructure = "role";
  bool no_reorder = false;
  bool no_relabel = false;
  std::string semcat;

  void add(CLI::App* app)
  {
    app->add_option("--restructure", restructure, "flat, concept or role")->capture_default_str();
    app->add_flag("--no-reorder", no_reorder, "keep AMR role order");
    app->add_flag("--no-relabel", no_relabel, "keep X on string fillers");
    app->add_option("--semcat", semcat, "taxonomy files: hierarchy,senses,salient");
  }

  TreeifyOptions options(const SemanticTaxonomy* taxonomy) const
  {
    TreeifyOptions o;
    o.mode = parse_restructure_mode(restructure);
    o.reorder = !no_reorder;
    o.relabel = !no_relabel;
    o.taxonomy = taxonomy;
    return o;
  }
};

struct DecoderFlags {
  std::string grammar;
  std::vector<std::string> ngrams;
  std::string amrlm;
  std::string weights;
  DecoderConfig config;
  bool semcat = false;

  void add(CLI::App* app)
  {
    app->add_option("--grammar", grammar, "rule file from `extract`")->required()->check(CLI::ExistingFile);
    app->add_option("--ngram", ngrams, "AMRese n-gram model; repeat for ngram2, ngram3, ...")
        ->check(CLI::ExistingFile);
    app->add_option("--amrlm", amrlm, "AMR language model")->check(CLI::ExistingFile);
    app->add_option("--weights", weights, "weights file (name<TAB>value)")->check(CLI::ExistingFile);
    app->add_option("--beam", config.beam, "items per span, 0 = unbounded")->capture_default_str();
    app->add_option("--kbest", config.kbest, "hypotheses per sentence")->capture_default_str();
    app->add_option("--rescore-k", config.rescore_k, "complete items rescored by the AMR LM")->capture_default_str();
    app->add_option("--max-combinations", config.max_combinations, "per rule application, 0 = all")
        ->capture_default_str();
    app->add_flag("--semcat-lm", semcat, "score with the semantic-category AMR LM");
  }
};

// Owns everything a Decoder borrows.
struct LoadedSystem {
  RuleGrammar grammar;
  std::vector<std::unique_ptr<NgramModel>> ngrams;
  std::unique_ptr<AmrTreeModel> amr;
  LanguageModels models;
  WeightVector weights = default_weights();
  DecoderConfig config;

  explicit LoadedSystem(const DecoderFlags& f)
  {
    {
      auto in = open_in(f.grammar);
      grammar = RuleGrammar::load(in);
    }
    for (std::size_t i = 0; i < f.ngrams.size(); ++i) {
      auto in = open_in(f.ngrams[i]);
      ngrams.push_back(std::make_unique<NgramModel>(NgramModel::load(in)));
      models.ngrams.emplace_back(i == 0 ? "ngram" : "ngram" + std::to_string(i + 1), ngrams.back().get());
    }
    if (!f.amrlm.empty()) {
      auto in = open_in(f.amrlm);
      amr = std::make_unique<AmrTreeModel>(AmrTreeModel::load(in));
      models.amr = amr.get();
    }
    if (!f.weights.empty()) {
      auto in = open_in(f.weights);
      weights = read_weights(in);
    }
    config = f.config;
    config.use_semcat = f.semcat;
  }

  Decoder decoder() const { return Decoder(grammar, models, weights, config); }
};

void print_scores(std::ostream& out, const SmatchResult& r)
{
  out << format_number(r.precision) << ' ' << format_number(r.recall) << ' ' << format_number(r.f) << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"AMR parsing as string-to-tree translation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  bool keep_case = false;
  app.add_flag("--keep-case", keep_case, "do not lowercase input");

  // treeify ---------------------------------------------------------------
  auto* treeify_cmd = app.add_subcommand("treeify", "turn AMRs into aligned SBMT trees");
  std::string tr_amr, tr_align, tr_format = "tree";
  TreeifyFlags tr_flags;
  treeify_cmd->add_option("--amr", tr_amr, "PENMAN corpus")->required()->check(CLI::ExistingFile);
  treeify_cmd->add_option("--alignment", tr_align, "alignment file, one line per AMR")->check(CLI::ExistingFile);
  treeify_cmd->add_option("--format", tr_format, "tree, amrese or both")->capture_default_str();
  tr_flags.add(treeify_cmd);

  // semcat ----------------------------------------------------------------
  auto* semcat_cmd = app.add_subcommand("semcat", "semantic categories");
  semcat_cmd->require_subcommand(1);
  auto* assign_cmd = semcat_cmd->add_subcommand("assign", "category of a lemma or concept");
  std::string sc_hierarchy, sc_senses, sc_salient, sc_lemma;
  assign_cmd->add_option("--hierarchy", sc_hierarchy, "child<TAB>parent")->required()->check(CLI::ExistingFile);
  assign_cmd->add_option("--senses", sc_senses, "lemma<TAB>category<TAB>count")->required()->check(CLI::ExistingFile);
  assign_cmd->add_option("--salient", sc_salient, "one category per line")->required()->check(CLI::ExistingFile);
  assign_cmd->add_option("--lemma", sc_lemma, "lemma or concept (sense suffix is ignored)")->required();

  // lm --------------------------------------------------------------------
  auto* lm_cmd = app.add_subcommand("lm", "language models");
  lm_cmd->require_subcommand(1);
  auto* ngram_cmd = lm_cmd->add_subcommand("train-ngram", "Witten-Bell n-gram model over token lines");
  std::string ng_input, ng_output, ng_arpa;
  int ng_order = 5;
  ngram_cmd->add_option("--input", ng_input, "one sentence per line")->required()->check(CLI::ExistingFile);
  ngram_cmd->add_option("--output", ng_output, "model file")->required();
  ngram_cmd->add_option("--order", ng_order, "n-gram order")->capture_default_str();
  ngram_cmd->add_option("--arpa", ng_arpa, "also write an ARPA file");
  auto* amrlm_cmd = lm_cmd->add_subcommand("train-amr", "AMR tree language model");
  std::string al_amr, al_output, al_semcat;
  amrlm_cmd->add_option("--amr", al_amr, "PENMAN corpus")->required()->check(CLI::ExistingFile);
  amrlm_cmd->add_option("--output", al_output, "model file")->required();
  amrlm_cmd->add_option("--semcat", al_semcat, "taxonomy files: hierarchy,senses,salient");
  auto* score_cmd = lm_cmd->add_subcommand("score", "score token lines or AMRs");
  std::string ls_ngram, ls_amrlm, ls_amr, ls_input;
  bool ls_semcat = false;
  score_cmd->add_option("--ngram", ls_ngram, "n-gram model")->check(CLI::ExistingFile);
  score_cmd->add_option("--amrlm", ls_amrlm, "AMR language model")->check(CLI::ExistingFile);
  score_cmd->add_option("--amr", ls_amr, "PENMAN corpus to score with --amrlm")->check(CLI::ExistingFile);
  score_cmd->add_option("--input", ls_input, "token lines to score with --ngram (default stdin)");
  score_cmd->add_flag("--semcat", ls_semcat, "use the category reformulation");

  // extract ---------------------------------------------------------------
  auto* extract_cmd = app.add_subcommand("extract", "minimal GHKM rules");
  std::string ex_source, ex_amr, ex_align, ex_output;
  TreeifyFlags ex_flags;
  extract_cmd->add_option("--source", ex_source, "sentences")->required()->check(CLI::ExistingFile);
  extract_cmd->add_option("--amr", ex_amr, "PENMAN corpus")->required()->check(CLI::ExistingFile);
  extract_cmd->add_option("--alignment", ex_align, "alignments")->required()->check(CLI::ExistingFile);
  extract_cmd->add_option("--output", ex_output, "grammar file (default stdout)");
  ex_flags.add(extract_cmd);

  // decode ----------------------------------------------------------------
  auto* decode_cmd = app.add_subcommand("decode", "parse sentences from stdin into PENMAN");
  DecoderFlags de_flags;
  std::string de_kbest_out;
  de_flags.add(decode_cmd);
  decode_cmd->add_option("--kbest-out", de_kbest_out, "write `id ||| score ||| AMRese ||| PENMAN` lines");

  // smatch ----------------------------------------------------------------
  auto* smatch_cmd = app.add_subcommand("smatch", "Smatch between two PENMAN corpora");
  std::string sm_gold, sm_test;
  SmatchOptions sm_opts;
  bool sm_exact = false, sm_per_sent = false, sm_no_top = false;
  smatch_cmd->add_option("--gold", sm_gold, "gold AMRs")->required()->check(CLI::ExistingFile);
  smatch_cmd->add_option("--test", sm_test, "system AMRs")->required()->check(CLI::ExistingFile);
  smatch_cmd->add_flag("--exact", sm_exact, "exhaustive mapping search (small graphs only)");
  smatch_cmd->add_option("--restarts", sm_opts.restarts, "hill-climbing restarts")->capture_default_str();
  smatch_cmd->add_flag("--per-sent", sm_per_sent, "print one line per pair before the total");
  smatch_cmd->add_flag("--no-top", sm_no_top, "drop the TOP triple");

  // tune ------------------------------------------------------------------
  auto* tune_cmd = app.add_subcommand("tune", "coordinate ascent on decoder weights");
  DecoderFlags tu_flags;
  std::string tu_objective = "smatch", tu_dev, tu_trace, tu_output;
  int tu_passes = 3;
  TreeifyFlags tu_tree;
  tu_flags.add(tune_cmd);
  tune_cmd->add_option("--objective", tu_objective, "smatch or bleu")->capture_default_str();
  tune_cmd->add_option("--dev", tu_dev, "src,amr,align[,align2]")->required();
  tune_cmd->add_option("--max-passes", tu_passes, "passes over all features")->capture_default_str();
  tune_cmd->add_option("--trace", tu_trace, "TSV of every evaluation");
  tune_cmd->add_option("--output", tu_output, "final weights (default stdout)");
  tu_tree.add(tune_cmd);

  // run -------------------------------------------------------------------
  auto* run_cmd = app.add_subcommand("run", "full experiment from a config file");
  std::string ru_config, ru_dir;
  std::vector<std::string> ru_overrides;
  bool ru_print = false;
  run_cmd->add_option("--config", ru_config, "config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--run-dir", ru_dir, "output directory")->required();
  run_cmd->add_option("--set", ru_overrides, "key=value override");
  run_cmd->add_flag("--print-config", ru_print, "print the effective config and exit");

  CLI11_PARSE(app, argc, argv);
  const bool lower = !keep_case;

  try {
    if (treeify_cmd->parsed()) {
      std::optional<SemanticTaxonomy> tax = load_taxonomy(tr_flags.semcat);
      auto graphs = read_amrs(tr_amr, lower);
      std::vector<AlignmentSet> aligns = tr_align.empty() ? std::vector<AlignmentSet>{} : read_alignments(tr_align);
      aligns.resize(std::max(aligns.size(), graphs.size()));
      const auto opts = tr_flags.options(tax ? &*tax : nullptr);
      for (std::size_t i = 0; i < graphs.size(); ++i) {
        auto t = treeify(graphs[i], aligns[i], opts);
        if (tr_format == "tree" || tr_format == "both")
          std::cout << to_string(t.tree) << '\n';
        if (tr_format == "amrese" || tr_format == "both")
          std::cout << join(yield_amrese(t.tree), " ") << '\n';
      }
      return 0;
    }

    if (assign_cmd->parsed()) {
      auto tax = SemanticTaxonomy::load(sc_hierarchy, sc_senses, sc_salient);
      std::cout << tax.assign(sc_lemma) << '\n';
      for (const auto& w : tax.weights(sc_lemma))
        std::cout << w.category << '\t' << format_number(w.weight) << '\n';
      return 0;
    }

    if (ngram_cmd->parsed()) {
      auto in = open_in(ng_input);
      auto corpus = read_token_lines(in, false, false);
      auto model = NgramModel::train(corpus, ng_order);
      auto out = open_out(ng_output);
      model.save(out);
      if (!ng_arpa.empty()) {
        auto arpa = open_out(ng_arpa);
        model.write_arpa(arpa);
      }
      return 0;
    }

    if (amrlm_cmd->parsed()) {
      std::optional<SemanticTaxonomy> tax = load_taxonomy(al_semcat);
      std::vector<AmrGraph> trees;
      for (const auto& gr : read_amrs(al_amr, lower))
        trees.push_back(disconnect(gr));
      auto model = AmrTreeModel::train(trees, tax ? &*tax : nullptr);
      auto out = open_out(al_output);
      model.save(out);
      return 0;
    }

    if (score_cmd->parsed()) {
      if (ls_ngram.empty() == ls_amrlm.empty())
        throw std::invalid_argument("lm score needs exactly one of --ngram and --amrlm");
      if (!ls_ngram.empty()) {
        auto min = open_in(ls_ngram);
        auto model = NgramModel::load(min);
        std::vector<std::vector<std::string>> lines;
        if (ls_input.empty()) {
          lines = read_token_lines(std::cin, false, false);
        } else {
          auto in = open_in(ls_input);
          lines = read_token_lines(in, false, false);
        }
        for (const auto& l : lines)
          std::cout << format_number(model.score_sequence(l)) << '\n';
        std::cout << "perplexity\t" << format_number(model.perplexity(lines)) << '\n';
      } else {
        if (ls_amr.empty())
          throw std::invalid_argument("--amrlm needs --amr");
        auto min = open_in(ls_amrlm);
        auto model = AmrTreeModel::load(min);
        for (const auto& gr : read_amrs(ls_amr, lower))
          std::cout << format_number(model.log_probability(disconnect(gr), ls_semcat)) << '\n';
      }
      return 0;
    }

    if (extract_cmd->parsed()) {
      std::optional<SemanticTaxonomy> tax = load_taxonomy(ex_flags.semcat);
      auto corpus = read_corpus(ex_source, ex_amr, ex_align, lower);
      RuleGrammar grammar;
      const auto opts = ex_flags.options(tax ? &*tax : nullptr);
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        auto t = treeify(corpus.amrs[i], corpus.alignments[i], opts);
        for (auto& r : extract_minimal_rules(corpus.sources[i], t.tree, t.alignment))
          grammar.add(std::move(r));
      }
      grammar.score();
      if (ex_output.empty()) {
        grammar.save(std::cout);
      } else {
        auto out = open_out(ex_output);
        grammar.save(out);
      }
      return 0;
    }

    if (decode_cmd->parsed()) {
      LoadedSystem sys(de_flags);
      auto decoder = sys.decoder();
      auto sentences = read_token_lines(std::cin, true, lower);
      auto results = decoder.decode_corpus(sentences, g.jobs);
      std::ofstream kbest;
      if (!de_kbest_out.empty())
        kbest = open_out(de_kbest_out);
      for (std::size_t i = 0; i < results.size(); ++i) {
        std::cout << "# ::id " << i + 1 << (results[i].glue ? " ::glue" : "") << '\n';
        std::cout << emit_penman(derivation_to_amr(results[i].kbest.front().tree)) << "\n\n";
        if (kbest)
          for (const auto& h : results[i].kbest)
            kbest << format_kbest_line(i + 1, h) << '\n';
      }
      return 0;
    }

    if (smatch_cmd->parsed()) {
      sm_opts.mode = sm_exact ? SmatchMode::exact : SmatchMode::hill_climb;
      sm_opts.seed = g.seed;
      sm_opts.include_top = !sm_no_top;
      auto gold = read_amrs(sm_gold, lower);
      auto test = read_amrs(sm_test, lower);
      if (gold.size() != test.size())
        throw std::invalid_argument("gold has " + std::to_string(gold.size()) + " AMRs, test has " +
                                    std::to_string(test.size()));
      std::vector<SmatchResult> per;
      for (std::size_t i = 0; i < gold.size(); ++i) {
        per.push_back(smatch(test[i], gold[i], sm_opts));
        if (sm_per_sent) {
          std::cout << i + 1 << ' ';
          print_scores(std::cout, per.back());
        }
      }
      print_scores(std::cout, corpus_smatch(per));
      return 0;
    }

    if (tune_cmd->parsed()) {
      LoadedSystem sys(tu_flags);
      auto parts = split(tu_dev, ',');
      if (parts.size() < 3)
        throw std::invalid_argument("--dev expects src,amr,align[,align2]");
      std::optional<SemanticTaxonomy> tax = load_taxonomy(tu_tree.semcat);
      const auto topts = tu_tree.options(tax ? &*tax : nullptr);
      auto corpus = read_corpus(parts[0], parts[1], parts[2], lower);
      DevSet dev;
      dev.sources = corpus.sources;
      dev.gold = corpus.amrs;
      dev.references.resize(corpus.size());
      std::vector<std::vector<AlignmentSet>> sets = {corpus.alignments};
      for (std::size_t k = 3; k < parts.size(); ++k) {
        auto extra = read_alignments(parts[k]);
        extra.resize(std::max(extra.size(), corpus.size()));
        sets.push_back(std::move(extra));
      }
      for (const auto& s : sets)
        for (std::size_t i = 0; i < corpus.size(); ++i)
          dev.references[i].push_back(yield_amrese(treeify(corpus.amrs[i], s[i], topts).tree));
      std::vector<std::string> features;
      for (const auto& [k, v] : sys.weights)
        features.push_back(k);
      auto evaluate = [&](const WeightVector& w) {
        Decoder d(sys.grammar, sys.models, w, sys.config);
        return evaluate_dev(d, dev, g.jobs, g.seed);
      };
      auto report = coordinate_ascent(sys.weights, features, evaluate, parse_objective(tu_objective), tu_passes, g.seed);
      if (!tu_trace.empty()) {
        auto out = open_out(tu_trace);
        write_trace(out, report);
      }
      if (tu_output.empty()) {
        write_weights(std::cout, report.final_weights);
      } else {
        auto out = open_out(tu_output);
        write_weights(out, report.final_weights);
      }
      std::cerr << "bleu " << format_number(report.final_value.bleu) << " smatch "
                << format_number(report.final_value.smatch) << " correlation " << format_number(report.correlation)
                << '\n';
      return 0;
    }

    if (run_cmd->parsed()) {
      auto config = PipelineConfig::load(ru_config);
      for (const auto& kv : ru_overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw std::invalid_argument("--set expects key=value");
        config.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
      }
      if (!app.get_option("--seed")->empty())
        config.set("seed", std::to_string(g.seed));
      if (ru_print) {
        config.write(std::cout);
        return 0;
      }
      auto result = run_pipeline(config, ru_dir, g.jobs);
      if (!result.ok) {
        std::cerr << "stage '" << result.failed_stage << "' failed; see " << ru_dir << "/manifest.tsv\n";
        return 1;
      }
      auto show = [](const char* name, const std::optional<SmatchResult>& r) {
        std::cout << name << '\t';
        if (r)
          print_scores(std::cout, *r);
        else
          std::cout << "n/a\n";
      };
      show("tune", result.tune);
      show("test", result.test);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

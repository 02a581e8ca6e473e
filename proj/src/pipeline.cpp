#include "amrsbmt/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "amrsbmt/text.hpp"

namespace amrsbmt {

namespace fs = std::filesystem;

namespace {

bool is_punct(char c)
{
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

bool is_digit(char c)
{
  return std::isdigit(static_cast<unsigned char>(c)) != 0;
}

bool is_word_char(char c)
{
  return !is_punct(c) && !std::isspace(static_cast<unsigned char>(c));
}

void split_chunk(const std::string& chunk, std::vector<std::string>& out)
{
  std::string current;
  auto flush = [&]() {
    if (!current.empty())
      out.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < chunk.size(); ++i) {
    const char c = chunk[i];
    if (!is_punct(c)) {
      current += c;
      continue;
    }
    const bool prev_word = i > 0 && is_word_char(chunk[i - 1]);
    const bool next_word = i + 1 < chunk.size() && is_word_char(chunk[i + 1]);
    const bool numeric = (c == '.' || c == ',') && i > 0 && i + 1 < chunk.size() && is_digit(chunk[i - 1]) &&
                         is_digit(chunk[i + 1]);
    const bool inner = (c == '-' || c == '\'') && prev_word && next_word;
    if (numeric || inner) {
      current += c;
      continue;
    }
    flush();
    out.emplace_back(1, c);
  }
  flush();
}

std::ifstream open_in(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_out(const fs::path& path)
{
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, bool lowercase)
{
  std::vector<std::string> out;
  for (const auto& chunk : split_whitespace(text))
    split_chunk(lowercase ? to_lower(chunk) : chunk, out);
  return out;
}

TreeifyResult treeify(const AmrGraph& graph, const AlignmentSet& alignment, const TreeifyOptions& options)
{
  TreeifyResult r;
  r.tree_graph = disconnect(graph);
  r.tree = push_labels(r.tree_graph);
  r.alignment = project_alignment(r.tree_graph, alignment);
  if (options.reorder) {
    auto reordered = reorder(r.tree, r.alignment);
    r.tree = std::move(reordered.tree);
    r.alignment = std::move(reordered.alignment);
    r.nodes = std::move(reordered.nodes);
  }
  r.tree = restructure(r.tree, options.mode);
  if (options.relabel)
    r.tree = relabel_strings(r.tree);
  if (options.taxonomy)
    r.tree = apply_categories(r.tree, *options.taxonomy);
  return r;
}

std::vector<std::vector<std::string>> read_sentences(const std::string& path, bool lowercase)
{
  auto in = open_in(path);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line))
    out.push_back(tokenize(line, lowercase));
  while (!out.empty() && out.back().empty())
    out.pop_back();
  return out;
}

std::vector<AlignmentSet> read_alignments(const std::string& path)
{
  auto in = open_in(path);
  std::vector<AlignmentSet> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    try {
      out.push_back(parse_alignment(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  while (!out.empty() && out.back().links.empty())
    out.pop_back();
  return out;
}

ParallelCorpus read_corpus(const std::string& source_path, const std::string& amr_path,
                           const std::string& alignment_path, bool lowercase)
{
  ParallelCorpus c;
  c.sources = read_sentences(source_path, lowercase);
  {
    auto in = open_in(amr_path);
    c.amrs = read_penman_corpus(in);
  }
  if (lowercase)
    for (auto& g : c.amrs)
      g = amrsbmt::lowercase(g);
  if (c.sources.size() != c.amrs.size())
    throw std::runtime_error(source_path + " has " + std::to_string(c.sources.size()) + " sentences but " + amr_path +
                             " has " + std::to_string(c.amrs.size()) + " AMRs");
  if (!alignment_path.empty()) {
    c.alignments = read_alignments(alignment_path);
    c.alignments.resize(std::max(c.alignments.size(), c.amrs.size()));
    if (c.alignments.size() != c.amrs.size())
      throw std::runtime_error(alignment_path + " has more lines than there are AMRs");
    for (std::size_t i = 0; i < c.size(); ++i) {
      try {
        check_alignment(c.alignments[i], c.amrs[i], c.sources[i].size());
      } catch (const std::exception& e) {
        throw std::runtime_error(alignment_path + ":" + std::to_string(i + 1) + ": " + e.what());
      }
    }
  }
  return c;
}

TrainedSystem train_system(const ParallelCorpus& corpus, const std::vector<std::vector<AlignmentSet>>& alignment_sets,
                           const TrainingOptions& options)
{
  if (corpus.size() == 0)
    throw std::invalid_argument("empty training corpus");
  TrainedSystem sys;
  for (std::size_t k = 0; k < alignment_sets.size(); ++k) {
    const auto& aligns = alignment_sets[k];
    if (aligns.size() != corpus.size())
      throw std::invalid_argument("alignment set " + std::to_string(k + 1) + " does not match the corpus size");
    std::vector<std::vector<std::string>> yields;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      auto t = treeify(corpus.amrs[i], aligns[i], options.treeify);
      for (auto& rule : extract_minimal_rules(corpus.sources[i], t.tree, t.alignment))
        sys.grammar.add(std::move(rule));
      yields.push_back(yield_amrese(t.tree));
      if (k == 0)
        sys.trees.push_back(std::move(t.tree));
    }
    const std::string name = k == 0 ? "ngram" : "ngram" + std::to_string(k + 1);
    sys.ngrams.emplace_back(name, NgramModel::train(yields, options.ngram_order));
  }
  sys.grammar.score();
  if (options.amr_lm) {
    std::vector<AmrGraph> trees;
    for (const auto& g : corpus.amrs)
      trees.push_back(disconnect(g));
    sys.amr = AmrTreeModel::train(trees, options.treeify.taxonomy);
  }
  return sys;
}

// ---------------------------------------------------------------------------

const std::map<std::string, std::string>& PipelineConfig::defaults()
{
  static const std::map<std::string, std::string> d = {
      {"amr_lm", "true"},
      {"beam", "100"},
      {"dev_alignment", ""},
      {"dev_alignment2", ""},
      {"dev_amr", ""},
      {"dev_source", ""},
      {"kbest", "10"},
      {"lowercase", "true"},
      {"max_combinations", "1000"},
      {"ngram_order", "5"},
      {"relabel", "true"},
      {"reorder", "true"},
      {"rescore_k", "500"},
      {"restarts", "4"},
      {"restructure", "role"},
      {"seed", "1"},
      {"semcat", "false"},
      {"taxonomy_hierarchy", ""},
      {"taxonomy_salient", ""},
      {"taxonomy_senses", ""},
      {"test_amr", ""},
      {"test_source", ""},
      {"train_alignment", ""},
      {"train_alignment2", ""},
      {"train_amr", ""},
      {"train_source", ""},
      {"tune", "none"},
      {"tune_passes", "3"},
      {"weights", ""},
  };
  return d;
}

PipelineConfig::PipelineConfig() : values_(defaults()) {}

PipelineConfig PipelineConfig::parse(std::istream& in, const fs::path& base)
{
  PipelineConfig c;
  c.base_ = base;
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    auto t = trim(line);
    if (t.empty() || t[0] == '#')
      continue;
    if (!header) {
      if (line != kHeader)
        throw std::invalid_argument("config: first line must be '" + std::string(kHeader) + "'");
      header = true;
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(n) + ": expected key = value");
    auto key = trim(t.substr(0, eq));
    if (!defaults().count(key))
      throw std::invalid_argument("config line " + std::to_string(n) + ": unknown key '" + key + "'");
    c.values_[key] = trim(t.substr(eq + 1));
  }
  if (!header)
    throw std::invalid_argument("config: missing header");
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path)
{
  auto in = open_in(path.string());
  return parse(in, path.parent_path());
}

void PipelineConfig::write(std::ostream& out) const
{
  out << kHeader << '\n';
  for (const auto& [k, v] : values_)
    out << k << " = " << v << '\n';
}

std::string PipelineConfig::to_string() const
{
  std::ostringstream os;
  write(os);
  return os.str();
}

const std::string& PipelineConfig::get(const std::string& key) const
{
  auto it = values_.find(key);
  if (it == values_.end())
    throw std::invalid_argument("config: unknown key '" + key + "'");
  return it->second;
}

void PipelineConfig::set(const std::string& key, std::string value)
{
  if (!defaults().count(key))
    throw std::invalid_argument("config: unknown key '" + key + "'");
  values_[key] = std::move(value);
}

bool PipelineConfig::has(const std::string& key) const
{
  auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

bool PipelineConfig::flag(const std::string& key) const
{
  const auto v = to_lower(get(key));
  if (v == "true" || v == "1" || v == "yes" || v == "on")
    return true;
  if (v == "false" || v == "0" || v == "no" || v == "off")
    return false;
  throw std::invalid_argument("config: '" + key + "' must be true or false");
}

long PipelineConfig::integer(const std::string& key) const
{
  const auto& v = get(key);
  std::size_t used = 0;
  long x = 0;
  try {
    x = std::stol(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty())
    throw std::invalid_argument("config: '" + key + "' must be an integer");
  return x;
}

std::string PipelineConfig::path(const std::string& key) const
{
  const auto& v = get(key);
  if (v.empty())
    return v;
  fs::path p(v);
  if (p.is_relative() && !base_.empty())
    p = base_ / p;
  return p.string();
}

void PipelineConfig::validate() const
{
  for (const auto& k : {"amr_lm", "lowercase", "relabel", "reorder", "semcat"})
    flag(k);
  for (const auto& k : {"beam", "kbest", "rescore_k", "max_combinations", "ngram_order", "restarts", "tune_passes"})
    if (integer(k) < 0)
      throw std::invalid_argument(std::string("config: '") + k + "' must not be negative");
  integer("seed");
  if (integer("ngram_order") < 1)
    throw std::invalid_argument("config: ngram_order must be at least 1");
  parse_restructure_mode(get("restructure"));
  if (get("tune") != "none")
    parse_objective(get("tune"));
  for (const auto& k : {"train_amr", "train_source", "train_alignment"})
    if (!has(k))
      throw std::invalid_argument(std::string("config: '") + k + "' is required");
  if (get("tune") != "none")
    for (const auto& k : {"dev_amr", "dev_source", "dev_alignment"})
      if (!has(k))
        throw std::invalid_argument(std::string("config: tuning needs '") + k + "'");
  if (flag("semcat"))
    for (const auto& k : {"taxonomy_hierarchy", "taxonomy_senses", "taxonomy_salient"})
      if (!has(k))
        throw std::invalid_argument(std::string("config: semcat needs '") + k + "'");
  for (const auto& [k, v] : values_) {
    const bool is_path = k.find("_amr") != std::string::npos || k.find("_source") != std::string::npos ||
                         k.find("_alignment") != std::string::npos || k.rfind("taxonomy_", 0) == 0 ||
                         k == "weights";
    if (is_path && k != "amr_lm" && !v.empty() && !fs::exists(path(k)))
      throw std::invalid_argument("config: file for '" + k + "' does not exist: " + path(k));
  }
  if (has("test_source") != has("test_amr"))
    throw std::invalid_argument("config: test_source and test_amr go together");
}

// ---------------------------------------------------------------------------

namespace {

class Manifest {
 public:
  explicit Manifest(fs::path path) : path_(std::move(path)) {}

  void record(const std::string& stage, const std::string& status, const std::vector<std::string>& outputs,
              const std::string& detail = "")
  {
    lines_.push_back(stage + '\t' + status + '\t' + join(outputs, ",") + '\t' + detail);
    flush();
  }

  void flush() const
  {
    auto out = open_out(path_);
    out << "stage\tstatus\toutputs\tdetail\n";
    for (const auto& l : lines_)
      out << l << '\n';
  }

 private:
  fs::path path_;
  std::vector<std::string> lines_;
};

std::string one_line(std::string s)
{
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\t', ' ');
  return s;
}

std::vector<SmatchResult> score_outputs(const std::vector<DecodeResult>& decoded, const std::vector<AmrGraph>& gold,
                                        const SmatchOptions& options)
{
  std::vector<SmatchResult> per;
  for (std::size_t i = 0; i < decoded.size(); ++i)
    per.push_back(smatch(derivation_to_amr(decoded[i].kbest.front().tree), gold[i], options));
  return per;
}

void write_decodes(const fs::path& dir, const std::string& name, const std::vector<DecodeResult>& decoded)
{
  auto amr = open_out(dir / (name + ".decoded.amr"));
  auto kbest = open_out(dir / (name + ".kbest"));
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    const auto& best = decoded[i].kbest.front();
    amr << "# ::id " << i + 1 << (decoded[i].glue ? " ::glue" : "") << '\n';
    amr << emit_penman(derivation_to_amr(best.tree)) << "\n\n";
    for (const auto& h : decoded[i].kbest)
      kbest << format_kbest_line(i + 1, h) << '\n';
  }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, const fs::path& run_dir, unsigned jobs)
{
  PipelineResult result;
  fs::create_directories(run_dir);
  {
    auto out = open_out(run_dir / "config.txt");
    config.write(out);
  }
  Manifest manifest(run_dir / "manifest.tsv");
  std::string stage;
  auto run_stage = [&](const std::string& name, const std::function<std::vector<std::string>()>& body) {
    if (!result.ok) {
      manifest.record(name, "skipped", {});
      return;
    }
    stage = name;
    try {
      manifest.record(name, "ok", body());
    } catch (const std::exception& e) {
      result.ok = false;
      result.failed_stage = name;
      manifest.record(name, "failed", {}, one_line(e.what()));
    }
  };

  const bool lower = config.has("lowercase") ? config.flag("lowercase") : true;
  ParallelCorpus train, dev, test;
  std::vector<std::vector<AlignmentSet>> train_aligns;
  std::vector<std::vector<AlignmentSet>> dev_aligns;
  std::optional<SemanticTaxonomy> taxonomy;
  TrainingOptions topt;
  std::optional<TrainedSystem> system;
  WeightVector weights = default_weights();
  DecoderConfig dconf;
  SmatchOptions sopt;
  LanguageModels models;

  run_stage("validate", [&]() -> std::vector<std::string> {
    config.validate();
    return {"config.txt"};
  });

  run_stage("prepare", [&]() -> std::vector<std::string> {
    train = read_corpus(config.path("train_source"), config.path("train_amr"), config.path("train_alignment"), lower);
    train_aligns.push_back(train.alignments);
    if (config.has("train_alignment2")) {
      auto second = read_alignments(config.path("train_alignment2"));
      second.resize(std::max(second.size(), train.size()));
      if (second.size() != train.size())
        throw std::runtime_error("second training alignment has more lines than there are AMRs");
      for (std::size_t i = 0; i < train.size(); ++i)
        check_alignment(second[i], train.amrs[i], train.sources[i].size());
      train_aligns.push_back(std::move(second));
    }
    if (config.has("dev_source")) {
      dev = read_corpus(config.path("dev_source"), config.path("dev_amr"), config.path("dev_alignment"), lower);
      dev_aligns.push_back(dev.alignments);
      if (config.has("dev_alignment2")) {
        auto second = read_alignments(config.path("dev_alignment2"));
        second.resize(std::max(second.size(), dev.size()));
        dev_aligns.push_back(std::move(second));
      }
    }
    if (config.has("test_source"))
      test = read_corpus(config.path("test_source"), config.path("test_amr"), "", lower);
    if (config.flag("semcat"))
      taxonomy = SemanticTaxonomy::load(config.path("taxonomy_hierarchy"), config.path("taxonomy_senses"),
                                        config.path("taxonomy_salient"));
    return {};
  });

  run_stage("train", [&]() -> std::vector<std::string> {
    topt.treeify.mode = parse_restructure_mode(config.get("restructure"));
    topt.treeify.reorder = config.flag("reorder");
    topt.treeify.relabel = config.flag("relabel");
    topt.treeify.taxonomy = taxonomy ? &*taxonomy : nullptr;
    topt.ngram_order = static_cast<int>(config.integer("ngram_order"));
    topt.amr_lm = config.flag("amr_lm");
    system = train_system(train, train_aligns, topt);
    std::vector<std::string> outputs = {"train.trees", "train.amrese", "grammar.tsv"};
    {
      auto trees = open_out(run_dir / "train.trees");
      auto amrese = open_out(run_dir / "train.amrese");
      for (const auto& t : system->trees) {
        trees << to_string(t) << '\n';
        amrese << join(yield_amrese(t), " ") << '\n';
      }
    }
    {
      auto g = open_out(run_dir / "grammar.tsv");
      system->grammar.save(g);
    }
    for (const auto& [name, m] : system->ngrams) {
      auto out = open_out(run_dir / (name + ".lm"));
      m.save(out);
      outputs.push_back(name + ".lm");
    }
    if (system->amr) {
      auto out = open_out(run_dir / "amr.lm");
      system->amr->save(out);
      outputs.push_back("amr.lm");
    }
    return outputs;
  });

  run_stage("tune", [&]() -> std::vector<std::string> {
    if (config.has("weights")) {
      auto in = open_in(config.path("weights"));
      weights = read_weights(in);
    }
    dconf.beam = static_cast<std::size_t>(config.integer("beam"));
    dconf.kbest = static_cast<std::size_t>(std::max(1L, config.integer("kbest")));
    dconf.rescore_k = static_cast<std::size_t>(config.integer("rescore_k"));
    dconf.max_combinations = static_cast<std::size_t>(config.integer("max_combinations"));
    dconf.use_semcat = taxonomy.has_value();
    sopt.restarts = static_cast<int>(config.integer("restarts"));
    sopt.seed = static_cast<std::uint64_t>(config.integer("seed"));
    for (const auto& [name, m] : system->ngrams)
      models.ngrams.emplace_back(name, &m);
    models.amr = system->amr ? &*system->amr : nullptr;

    std::vector<std::string> outputs;
    if (config.get("tune") != "none" && dev.size() > 0) {
      DevSet devset;
      devset.sources = dev.sources;
      devset.gold = dev.amrs;
      devset.references.resize(dev.size());
      for (const auto& aligns : dev_aligns)
        for (std::size_t i = 0; i < dev.size(); ++i)
          devset.references[i].push_back(yield_amrese(treeify(dev.amrs[i], aligns[i], topt.treeify).tree));
      std::vector<std::string> features;
      for (const auto& [k, v] : weights)
        features.push_back(k);
      auto evaluate = [&](const WeightVector& w) {
        Decoder d(system->grammar, models, w, dconf);
        return evaluate_dev(d, devset, jobs, sopt.seed);
      };
      auto report = coordinate_ascent(weights, features, evaluate, parse_objective(config.get("tune")),
                                      static_cast<int>(config.integer("tune_passes")), sopt.seed);
      weights = report.final_weights;
      auto trace = open_out(run_dir / "tune_trace.tsv");
      write_trace(trace, report);
      outputs.push_back("tune_trace.tsv");
    }
    auto out = open_out(run_dir / "weights.tsv");
    write_weights(out, weights);
    outputs.push_back("weights.tsv");
    return outputs;
  });

  std::vector<DecodeResult> dev_out, test_out;
  run_stage("decode", [&]() -> std::vector<std::string> {
    Decoder decoder(system->grammar, models, weights, dconf);
    std::vector<std::string> outputs;
    if (dev.size() > 0) {
      dev_out = decoder.decode_corpus(dev.sources, jobs);
      write_decodes(run_dir, "tune", dev_out);
      outputs.insert(outputs.end(), {"tune.decoded.amr", "tune.kbest"});
    }
    if (test.size() > 0) {
      test_out = decoder.decode_corpus(test.sources, jobs);
      write_decodes(run_dir, "test", test_out);
      outputs.insert(outputs.end(), {"test.decoded.amr", "test.kbest"});
    }
    return outputs;
  });

  run_stage("evaluate", [&]() -> std::vector<std::string> {
    auto out = open_out(run_dir / "scores.tsv");
    out << "set\tprecision\trecall\tf\n";
    auto row = [&](const std::string& name, const std::vector<DecodeResult>& decoded, const ParallelCorpus& gold,
                   std::optional<SmatchResult>& slot) {
      if (decoded.empty()) {
        out << name << "\tn/a\tn/a\tn/a\n";
        return;
      }
      auto per = score_outputs(decoded, gold.amrs, sopt);
      slot = corpus_smatch(per);
      out << name << '\t' << format_number(slot->precision) << '\t' << format_number(slot->recall) << '\t'
          << format_number(slot->f) << '\n';
    };
    row("tune", dev_out, dev, result.tune);
    row("test", test_out, test, result.test);
    return {"scores.tsv"};
  });
  return result;
}

}  // namespace amrsbmt

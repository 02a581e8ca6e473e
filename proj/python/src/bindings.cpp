// Python surface: strings in, strings out. PENMAN text for graphs, bracketed
// text for trees, token lists for sentences.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <memory>
#include <sstream>

#include "amrsbmt/amr_lm.hpp"
#include "amrsbmt/decoder.hpp"
#include "amrsbmt/grammar.hpp"
#include "amrsbmt/ngram.hpp"
#include "amrsbmt/pipeline.hpp"
#include "amrsbmt/semcat.hpp"
#include "amrsbmt/smatch.hpp"
#include "amrsbmt/text.hpp"
#include "amrsbmt/transform.hpp"
#include "amrsbmt/tune.hpp"

namespace py = pybind11;
using namespace amrsbmt;

namespace {

std::string single_line(const AmrGraph& g)
{
  return emit_penman(g, PenmanLayout::single_line);
}

TreeifyOptions treeify_options(const std::string& mode, bool reorder, bool relabel)
{
  TreeifyOptions o;
  o.mode = parse_restructure_mode(mode);
  o.reorder = reorder;
  o.relabel = relabel;
  return o;
}

// Owns a trained system and the decoder views into it.
class Parser {
 public:
  Parser(const std::string& source, const std::string& amr, const std::string& alignment, const std::string& mode,
         int ngram_order, bool amr_lm, bool lowercase)
  {
    auto corpus = read_corpus(source, amr, alignment, lowercase);
    TrainingOptions opt;
    opt.treeify.mode = parse_restructure_mode(mode);
    opt.ngram_order = ngram_order;
    opt.amr_lm = amr_lm;
    std::vector<std::vector<AlignmentSet>> sets;
    if (!corpus.alignments.empty())
      sets.push_back(corpus.alignments);
    system_ = std::make_unique<TrainedSystem>(train_system(corpus, sets, opt));
    weights_ = default_weights();
  }

  std::vector<std::pair<double, std::string>> decode(const std::vector<std::string>& tokens, std::size_t beam,
                                                     std::size_t kbest) const
  {
    DecoderConfig c;
    c.beam = beam;
    c.kbest = kbest;
    LanguageModels m;
    for (const auto& [name, lm] : system_->ngrams)
      m.ngrams.emplace_back(name, &lm);
    if (system_->amr)
      m.amr = &*system_->amr;
    DecodeResult r;
    {
      py::gil_scoped_release unlocked;
      r = Decoder(system_->grammar, m, weights_, c).decode(tokens);
    }
    std::vector<std::pair<double, std::string>> out;
    for (const auto& h : r.kbest)
      out.emplace_back(h.score, single_line(derivation_to_amr(h.tree)));
    return out;
  }

  std::size_t rule_count() const { return system_->grammar.size(); }
  WeightVector weights() const { return weights_; }
  void set_weights(const WeightVector& w) { weights_ = w; }

 private:
  std::unique_ptr<TrainedSystem> system_;
  WeightVector weights_;
};

}  // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "AMR parsing as string-to-tree translation";

  py::register_exception<AmrError>(m, "AmrError", PyExc_ValueError);
  py::register_exception<TaxonomyError>(m, "TaxonomyError", PyExc_ValueError);

  m.def("tokenize", &tokenize, py::arg("text"), py::arg("lowercase") = true);

  m.def(
      "normalize", [](const std::string& penman, bool indented) {
        return emit_penman(parse_penman(penman), indented ? PenmanLayout::indented : PenmanLayout::single_line);
      },
      py::arg("penman"), py::arg("indented") = false, "Parse and re-emit a PENMAN graph with v0, v1, ... variables.");
  m.def(
      "canonical_form", [](const std::string& penman) { return canonical_form(parse_penman(penman)); },
      py::arg("penman"));
  m.def(
      "disconnect", [](const std::string& penman) { return single_line(disconnect(parse_penman(penman))); },
      py::arg("penman"), "Replace every reentrant edge with a * leaf.");

  m.def(
      "treeify",
      [](const std::string& penman, const std::string& alignment, const std::string& mode, bool reorder,
         bool relabel) {
        auto t = treeify(parse_penman(penman), parse_alignment(alignment), treeify_options(mode, reorder, relabel));
        py::dict d;
        d["tree"] = to_string(t.tree);
        d["amrese"] = yield_amrese(t.tree);
        d["amr"] = single_line(t.tree_graph);
        return d;
      },
      py::arg("penman"), py::arg("alignment") = "", py::arg("mode") = "role", py::arg("reorder") = true,
      py::arg("relabel") = true);
  m.def(
      "tree_to_amr", [](const std::string& tree) { return single_line(derivation_to_amr(parse_tree(tree))); },
      py::arg("tree"));

  m.def(
      "smatch",
      [](const std::string& test, const std::string& gold, bool exact, int restarts, std::uint64_t seed,
         bool include_top) {
        SmatchOptions o;
        o.mode = exact ? SmatchMode::exact : SmatchMode::hill_climb;
        o.restarts = restarts;
        o.seed = seed;
        o.include_top = include_top;
        auto r = smatch(parse_penman(test), parse_penman(gold), o);
        return py::make_tuple(r.precision, r.recall, r.f);
      },
      py::arg("test"), py::arg("gold"), py::arg("exact") = false, py::arg("restarts") = 4, py::arg("seed") = 1,
      py::arg("include_top") = true, "Precision, recall and F between two graphs.");

  m.def("bleu", &bleu, py::arg("candidates"), py::arg("references"));

  m.def(
      "extract_rules",
      [](const std::vector<std::string>& source, const std::string& penman, const std::string& alignment,
         const std::string& mode) {
        auto t = treeify(parse_penman(penman), parse_alignment(alignment), treeify_options(mode, true, true));
        std::vector<std::tuple<std::string, std::string, std::string>> out;
        for (const auto& r : extract_minimal_rules(source, t.tree, t.alignment))
          out.emplace_back(r.root(), r.source_string(), r.target_string());
        return out;
      },
      py::arg("source"), py::arg("penman"), py::arg("alignment"), py::arg("mode") = "role",
      "Minimal rules as (root, source, target) strings.");

  py::class_<SemanticTaxonomy>(m, "Taxonomy")
      .def(py::init(&SemanticTaxonomy::load), py::arg("hierarchy"), py::arg("senses"), py::arg("salient"))
      .def("assign", &SemanticTaxonomy::assign, py::arg("concept"))
      .def(
          "weights",
          [](const SemanticTaxonomy& t, const std::string& c) {
            std::map<std::string, double> out;
            for (const auto& w : t.weights(c))
              out[w.category] = w.weight;
            return out;
          },
          py::arg("concept"))
      .def("propagate", &SemanticTaxonomy::propagate, py::arg("lemma"));

  py::class_<NgramModel>(m, "NgramModel")
      .def_static("train", &NgramModel::train, py::arg("corpus"), py::arg("order") = 5)
      .def_static(
          "load",
          [](const std::string& path) {
            std::ifstream in(path);
            if (!in)
              throw std::invalid_argument("cannot open " + path);
            return NgramModel::load(in);
          },
          py::arg("path"))
      .def(
          "save",
          [](const NgramModel& lm, const std::string& path) {
            std::ofstream out(path);
            lm.save(out);
          },
          py::arg("path"))
      .def_property_readonly("order", &NgramModel::order)
      .def(
          "score",
          [](const NgramModel& lm, const std::vector<std::string>& tokens) { return lm.score_sequence(tokens); },
          py::arg("tokens"), "Natural-log probability including the end marker.")
      .def(
          "prob",
          [](const NgramModel& lm, const std::vector<std::string>& history, const std::string& word) {
            return lm.prob(history, word);
          },
          py::arg("history"), py::arg("word"), "history is most recent first.");

  py::class_<AmrTreeModel>(m, "AmrLanguageModel")
      .def_static(
          "train",
          [](const std::vector<std::string>& graphs) {
            std::vector<AmrGraph> trees;
            for (const auto& g : graphs)
              trees.push_back(disconnect(parse_penman(g)));
            return AmrTreeModel::train(trees);
          },
          py::arg("graphs"), "Graphs are disconnected before counting.")
      .def(
          "log_probability",
          [](const AmrTreeModel& lm, const std::string& penman) {
            return lm.log_probability(disconnect(parse_penman(penman)));
          },
          py::arg("penman"));

  py::class_<Parser>(m, "Parser")
      .def(py::init<const std::string&, const std::string&, const std::string&, const std::string&, int, bool, bool>(),
           py::arg("source"), py::arg("amr"), py::arg("alignment"), py::arg("mode") = "role",
           py::arg("ngram_order") = 5, py::arg("amr_lm") = true, py::arg("lowercase") = true,
           "Train a parser from sentence, PENMAN and alignment files.")
      .def("decode", &Parser::decode, py::arg("tokens"), py::arg("beam") = 100, py::arg("kbest") = 1,
           "(score, PENMAN) pairs, best first.")
      .def_property_readonly("rule_count", &Parser::rule_count)
      .def_property("weights", &Parser::weights, &Parser::set_weights);

  m.def(
      "run_pipeline",
      [](const std::string& config_path, const std::string& run_dir, const std::map<std::string, std::string>& set,
         unsigned jobs) {
        auto c = PipelineConfig::load(config_path);
        for (const auto& [k, v] : set)
          c.set(k, v);
        PipelineResult r;
        {
          py::gil_scoped_release unlocked;
          r = run_pipeline(c, run_dir, jobs);
        }
        py::dict d;
        d["ok"] = r.ok;
        d["failed_stage"] = r.failed_stage;
        d["tune_f"] = r.tune ? py::object(py::float_(r.tune->f)) : py::object(py::none());
        d["test_f"] = r.test ? py::object(py::float_(r.test->f)) : py::object(py::none());
        return d;
      },
      py::arg("config"), py::arg("run_dir"), py::arg("set") = std::map<std::string, std::string>{},
      py::arg("jobs") = 1);
}

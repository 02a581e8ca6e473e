#pragma once

// BLEU over AMRese and coordinate ascent on decoder weights.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "amrsbmt/amr.hpp"
#include "amrsbmt/decoder.hpp"

namespace amrsbmt {

using TokenSequence = std::vector<std::string>;

// Corpus BLEU-4 with clipped counts against every reference of a sentence and
// the brevity penalty computed from the closest reference length (shorter
// wins ties). Zero when any order has no matches.
double bleu(const std::vector<TokenSequence>& candidates, const std::vector<std::vector<TokenSequence>>& references);

enum class TuneObjective { smatch, bleu };

TuneObjective parse_objective(std::string_view name);
std::string_view to_string(TuneObjective objective);

struct Evaluation {
  double bleu = 0.0;
  double smatch = 0.0;
};

struct TuneStep {
  int pass = 0;
  std::string feature;  // empty for the initial point
  double multiplier = 1.0;
  WeightVector weights;
  Evaluation value;
  bool accepted = false;
};

struct TuneReport {
  std::vector<TuneStep> evaluations;  // every point tried
  std::vector<TuneStep> trace;        // initial point and accepted moves
  WeightVector final_weights;
  Evaluation final_value;
  double correlation = 0.0;           // Pearson, BLEU vs Smatch over all evaluations
  int passes = 0;
};

inline const std::vector<double> kMultiplierLadder = {0.25, 0.5, 0.8, 1.25, 2.0, 4.0, -1.0};

// `features` are tuned in an order shuffled per pass from `seed`. A zero
// weight is treated as 1.0 before multiplying. Stops after a pass without
// improvement or after `max_passes`.
TuneReport coordinate_ascent(const WeightVector& initial, const std::vector<std::string>& features,
                             const std::function<Evaluation(const WeightVector&)>& evaluate, TuneObjective objective,
                             int max_passes, std::uint64_t seed);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct DevSet {
  std::vector<TokenSequence> sources;
  std::vector<std::vector<TokenSequence>> references;  // AMRese per sentence
  std::vector<AmrGraph> gold;
};

// Decodes the development set and scores the 1-best outputs.
Evaluation evaluate_dev(const Decoder& decoder, const DevSet& dev, unsigned jobs, std::uint64_t seed);

void write_trace(std::ostream& out, const TuneReport& report);

}  // namespace amrsbmt

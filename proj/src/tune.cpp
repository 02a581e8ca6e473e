#include "amrsbmt/tune.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>

#include "amrsbmt/smatch.hpp"
#include "amrsbmt/text.hpp"
#include "amrsbmt/transform.hpp"

namespace amrsbmt {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, int> ngram_counts(const TokenSequence& s, std::size_t n)
{
  std::map<Ngram, int> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i)
    ++out[Ngram(s.begin() + static_cast<std::ptrdiff_t>(i), s.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

}  // namespace

double bleu(const std::vector<TokenSequence>& candidates, const std::vector<std::vector<TokenSequence>>& references)
{
  if (candidates.empty())
    throw std::invalid_argument("BLEU of an empty corpus");
  if (candidates.size() != references.size())
    throw std::invalid_argument("BLEU needs one reference set per candidate");
  double matches[4] = {0, 0, 0, 0}, totals[4] = {0, 0, 0, 0};
  double cand_len = 0, ref_len = 0;
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    const auto& c = candidates[s];
    const auto& refs = references[s];
    if (refs.empty())
      throw std::invalid_argument("BLEU: sentence without references");
    cand_len += static_cast<double>(c.size());
    std::size_t closest = refs.front().size();
    for (const auto& r : refs) {
      const auto d = std::llabs(static_cast<long long>(r.size()) - static_cast<long long>(c.size()));
      const auto best = std::llabs(static_cast<long long>(closest) - static_cast<long long>(c.size()));
      if (d < best || (d == best && r.size() < closest))
        closest = r.size();
    }
    ref_len += static_cast<double>(closest);
    for (std::size_t n = 1; n <= 4; ++n) {
      auto cc = ngram_counts(c, n);
      std::map<Ngram, int> max_ref;
      for (const auto& r : refs)
        for (const auto& [g, k] : ngram_counts(r, n))
          max_ref[g] = std::max(max_ref[g], k);
      for (const auto& [g, k] : cc) {
        auto it = max_ref.find(g);
        matches[n - 1] += std::min(k, it == max_ref.end() ? 0 : it->second);
        totals[n - 1] += k;
      }
    }
  }
  double log_sum = 0.0;
  for (int n = 0; n < 4; ++n) {
    if (matches[n] == 0 || totals[n] == 0)
      return 0.0;
    log_sum += std::log(matches[n] / totals[n]);
  }
  const double bp = cand_len >= ref_len ? 1.0 : std::exp(1.0 - ref_len / cand_len);
  return bp * std::exp(log_sum / 4.0);
}

TuneObjective parse_objective(std::string_view name)
{
  if (name == "smatch")
    return TuneObjective::smatch;
  if (name == "bleu" || name == "bleu-amrese")
    return TuneObjective::bleu;
  throw std::invalid_argument("unknown tuning objective '" + std::string(name) + "'");
}

std::string_view to_string(TuneObjective objective)
{
  return objective == TuneObjective::smatch ? "smatch" : "bleu";
}

double pearson(const std::vector<double>& x, const std::vector<double>& y)
{
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2)
    return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0)
    return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

TuneReport coordinate_ascent(const WeightVector& initial, const std::vector<std::string>& features,
                             const std::function<Evaluation(const WeightVector&)>& evaluate, TuneObjective objective,
                             int max_passes, std::uint64_t seed)
{
  auto pick = [&](const Evaluation& e) { return objective == TuneObjective::smatch ? e.smatch : e.bleu; };
  TuneReport report;
  WeightVector current = initial;
  Evaluation value = evaluate(current);
  TuneStep start{0, "", 1.0, current, value, true};
  report.evaluations.push_back(start);
  report.trace.push_back(start);

  std::mt19937_64 rng(seed);
  for (int pass = 1; pass <= max_passes; ++pass) {
    report.passes = pass;
    auto order = features;
    std::shuffle(order.begin(), order.end(), rng);
    bool improved = false;
    for (const auto& f : order) {
      const double base = current.count(f) && current.at(f) != 0.0 ? current.at(f) : 1.0;
      TuneStep best{pass, f, 1.0, current, value, false};
      std::size_t best_index = 0;
      for (double m : kMultiplierLadder) {
        WeightVector w = current;
        w[f] = base * m;
        Evaluation e = evaluate(w);
        report.evaluations.push_back({pass, f, m, w, e, false});
        if (pick(e) > pick(best.value)) {
          best = {pass, f, m, w, e, true};
          best_index = report.evaluations.size() - 1;
        }
      }
      if (best.accepted) {
        report.evaluations[best_index].accepted = true;
        current = best.weights;
        value = best.value;
        report.trace.push_back(best);
        improved = true;
      }
    }
    if (!improved)
      break;
  }
  report.final_weights = current;
  report.final_value = value;
  std::vector<double> xs, ys;
  for (const auto& e : report.evaluations) {
    xs.push_back(e.value.bleu);
    ys.push_back(e.value.smatch);
  }
  report.correlation = pearson(xs, ys);
  return report;
}

Evaluation evaluate_dev(const Decoder& decoder, const DevSet& dev, unsigned jobs, std::uint64_t seed)
{
  Evaluation e;
  if (dev.sources.empty())
    return e;
  auto results = decoder.decode_corpus(dev.sources, jobs);
  std::vector<TokenSequence> candidates;
  std::vector<SmatchResult> per;
  SmatchOptions opt;
  opt.seed = seed;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& best = results[i].kbest.front();
    candidates.push_back(yield_amrese(best.tree));
    if (i < dev.gold.size())
      per.push_back(smatch(derivation_to_amr(best.tree), dev.gold[i], opt));
  }
  e.bleu = bleu(candidates, dev.references);
  e.smatch = corpus_smatch(per).f;
  return e;
}

void write_trace(std::ostream& out, const TuneReport& report)
{
  out << "pass\tfeature\tmultiplier\taccepted\tbleu\tsmatch\tweights\n";
  for (const auto& s : report.evaluations) {
    std::vector<std::string> w;
    for (const auto& [k, v] : s.weights)
      w.push_back(k + "=" + format_number(v));
    out << s.pass << '\t' << (s.feature.empty() ? "-" : s.feature) << '\t' << format_number(s.multiplier) << '\t'
        << (s.accepted ? 1 : 0) << '\t' << format_number(s.value.bleu) << '\t' << format_number(s.value.smatch)
        << '\t' << join(w, ",") << '\n';
  }
}

}  // namespace amrsbmt

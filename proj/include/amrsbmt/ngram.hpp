#pragma once

// Interpolated Witten-Bell n-gram model over token sequences (AMRese yields).
// Sentences are padded with order-1 BOS symbols and one EOS. All log
// probabilities are natural logarithms.

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amrsbmt/witten_bell.hpp"

namespace amrsbmt {

class NgramModel {
 public:
  static constexpr std::string_view kBos = "<s>";
  static constexpr std::string_view kEos = "</s>";
  static constexpr std::string_view kUnk = "<unk>";

  NgramModel() = default;

  static NgramModel train(const std::vector<std::vector<std::string>>& corpus, int order = 5);

  int order() const { return order_; }

  // `history` runs oldest to newest; only its last order-1 tokens matter and
  // missing positions are BOS.
  double log_prob(std::span<const std::string> history, const std::string& word) const;
  double prob(std::span<const std::string> history, const std::string& word) const;
  // Like log_prob but without BOS padding: a short history simply backs off.
  double log_prob_partial(std::span<const std::string> history, const std::string& word) const;

  // Sum of per-token log probabilities including EOS.
  double score_sequence(std::span<const std::string> tokens) const;
  double perplexity(const std::vector<std::vector<std::string>>& corpus) const;

  // Known predicted tokens (words and EOS).
  std::vector<std::string> vocabulary() const { return table_.events(); }
  const WittenBellTable& table() const { return table_; }

  // Context of the table for a history: most recent token first.
  std::vector<std::string> context_of(std::span<const std::string> history) const;

  void save(std::ostream& out) const;
  static NgramModel load(std::istream& in);
  void write_arpa(std::ostream& out) const;

 private:
  int order_ = 5;
  WittenBellTable table_;
};

}  // namespace amrsbmt

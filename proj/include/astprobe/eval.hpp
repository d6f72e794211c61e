#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "astprobe/ast.hpp"

namespace astprobe {

/// A (non-terminal label, token span) pair; `end` is inclusive.
struct Constituent {
  std::string label;
  std::size_t start = 0;
  std::size_t end = 0;

  auto operator<=>(const Constituent&) const = default;
};

struct PrfScore {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t hits = 0;
  std::size_t n_pred = 0;
  std::size_t n_gold = 0;

  /// P, R and F1 from the counts. An empty side scores 0 unless both sides
  /// are empty, which scores (1, 1, 1).
  static PrfScore from_counts(std::size_t hits, std::size_t n_pred, std::size_t n_gold);
};

/// One constituent per non-terminal, in pre-order. Placeholder (kNullLabel)
/// non-terminals are not grammar constituents and are skipped.
std::vector<Constituent> constituents(const Ast& ast);

/// Multiset intersection count of two constituent lists.
std::size_t count_hits(std::vector<Constituent> pred, std::vector<Constituent> gold);

/// Throws LeafMismatch when the trees cover different numbers of tokens.
PrfScore score(const Ast& pred, const Ast& gold);

/// Corpus aggregation: micro (summed counts) and macro (mean of per-sample
/// P/R/F1).
class CorpusScore {
 public:
  void add(const PrfScore& sample);

  PrfScore micro() const;
  PrfScore macro() const;
  std::size_t samples() const { return samples_; }

 private:
  std::size_t samples_ = 0;
  std::size_t hits_ = 0, n_pred_ = 0, n_gold_ = 0;
  double precision_sum_ = 0, recall_sum_ = 0, f1_sum_ = 0;
};

/// {sample_id, precision, recall, f1, hits, n_pred, n_gold}
nlohmann::json score_record(const std::string& sample_id, const PrfScore& score);

}  // namespace astprobe

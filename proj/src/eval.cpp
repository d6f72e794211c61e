#include "astprobe/eval.hpp"

#include <algorithm>
#include <cstdint>

#include "astprobe/errors.hpp"

namespace astprobe {

namespace {

// Returns the (first, last) token covered by `node`.
std::pair<std::size_t, std::size_t> collect(const AstNode& node, std::vector<Constituent>& out) {
  if (node.is_terminal()) return {node.token_index, node.token_index};
  const std::size_t slot = out.size();
  const bool keep = node.label != kNullLabel;
  if (keep) out.push_back({node.label, 0, 0});
  std::size_t first = SIZE_MAX, last = 0;
  for (const auto& child : node.children) {
    auto [lo, hi] = collect(child, out);
    first = std::min(first, lo);
    last = std::max(last, hi);
  }
  if (keep) {
    out[slot].start = first;
    out[slot].end = last;
  }
  return {first, last};
}

}  // namespace

PrfScore PrfScore::from_counts(std::size_t hits, std::size_t n_pred, std::size_t n_gold) {
  PrfScore s;
  s.hits = hits;
  s.n_pred = n_pred;
  s.n_gold = n_gold;
  if (n_pred == 0 && n_gold == 0) {
    s.precision = s.recall = s.f1 = 1.0;
    return s;
  }
  s.precision = n_pred == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n_pred);
  s.recall = n_gold == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n_gold);
  const double sum = s.precision + s.recall;
  s.f1 = sum > 0 ? 2.0 * s.precision * s.recall / sum : 0.0;
  return s;
}

std::vector<Constituent> constituents(const Ast& ast) {
  std::vector<Constituent> out;
  collect(ast.root, out);
  return out;
}

std::size_t count_hits(std::vector<Constituent> pred, std::vector<Constituent> gold) {
  std::sort(pred.begin(), pred.end());
  std::sort(gold.begin(), gold.end());
  std::size_t hits = 0;
  auto p = pred.begin();
  auto g = gold.begin();
  while (p != pred.end() && g != gold.end()) {
    if (*p < *g) {
      ++p;
    } else if (*g < *p) {
      ++g;
    } else {
      ++hits;
      ++p;
      ++g;
    }
  }
  return hits;
}

PrfScore score(const Ast& pred, const Ast& gold) {
  const auto n_pred_leaves = leaf_count(pred);
  const auto n_gold_leaves = leaf_count(gold);
  if (n_pred_leaves != n_gold_leaves) {
    throw LeafMismatch("prediction covers " + std::to_string(n_pred_leaves) +
                       " tokens, ground truth " + std::to_string(n_gold_leaves));
  }
  auto p = constituents(pred);
  auto g = constituents(gold);
  const auto n_pred = p.size(), n_gold = g.size();
  return PrfScore::from_counts(count_hits(std::move(p), std::move(g)), n_pred, n_gold);
}

void CorpusScore::add(const PrfScore& sample) {
  ++samples_;
  hits_ += sample.hits;
  n_pred_ += sample.n_pred;
  n_gold_ += sample.n_gold;
  precision_sum_ += sample.precision;
  recall_sum_ += sample.recall;
  f1_sum_ += sample.f1;
}

PrfScore CorpusScore::micro() const { return PrfScore::from_counts(hits_, n_pred_, n_gold_); }

PrfScore CorpusScore::macro() const {
  PrfScore s;
  s.hits = hits_;
  s.n_pred = n_pred_;
  s.n_gold = n_gold_;
  if (samples_ == 0) return s;
  const double count = static_cast<double>(samples_);
  s.precision = precision_sum_ / count;
  s.recall = recall_sum_ / count;
  s.f1 = f1_sum_ / count;
  return s;
}

nlohmann::json score_record(const std::string& sample_id, const PrfScore& score) {
  return {{"sample_id", sample_id}, {"precision", score.precision}, {"recall", score.recall},
          {"f1", score.f1},         {"hits", score.hits},           {"n_pred", score.n_pred},
          {"n_gold", score.n_gold}};
}

}  // namespace astprobe

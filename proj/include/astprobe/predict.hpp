#pragma once

#include <span>
#include <string>

#include "astprobe/ast.hpp"
#include "astprobe/label_vocab.hpp"
#include "astprobe/probe.hpp"
#include "astprobe/tuple_codec.hpp"

namespace astprobe {

/// Index of the first maximum.
template <typename Row>
Eigen::Index leftmost_argmax(const Row& row) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < row.size(); ++k) {
    if (row(k) > row(best)) best = k;
  }
  return best;
}

/// Predicted tuple: distances straight from the probe, labels by leftmost
/// argmax of each logit row.
template <typename T>
TupleDCU predict_tuple(const ProbeParams<T>& params, const Matrix<T>& words);

/// predict_tuple -> tuple_to_tree -> unbinarize. `tokens`, when non-empty,
/// supplies terminal texts.
template <typename T>
Ast predict_ast(const ProbeParams<T>& params, const Matrix<T>& words, const LabelVocab& c_vocab,
                const LabelVocab& u_vocab, std::span<const std::string> tokens = {});

}  // namespace astprobe

#pragma once

#include <span>
#include <string>
#include <vector>

#include "astprobe/binary_tree.hpp"
#include "astprobe/label_vocab.hpp"

namespace astprobe {

/// (d, c, u) with labels spelled out. For a tree with n+1 leaves,
/// distances and c have n entries, u and tokens have n+1.
struct LabeledTuple {
  std::vector<int> distances;  // gold LCA heights
  std::vector<std::string> c;
  std::vector<std::string> u;
  std::vector<std::string> tokens;
  int height = 0;

  bool operator==(const LabeledTuple&) const = default;
};

/// (d, c, u) with vocabulary ids; d holds the integer gold distances.
struct GoldTuple {
  std::vector<int> distances;
  std::vector<LabelId> c;
  std::vector<LabelId> u;
  int height = 0;

  std::size_t gaps() const { return distances.size(); }
  bool operator==(const GoldTuple&) const = default;
};

/// Tuple with real-valued distances, e.g. a probe prediction.
struct TupleDCU {
  std::vector<double> d;
  std::vector<LabelId> c;
  std::vector<LabelId> u;
};

/// Recursive binary tree -> tuple: leaf yields ([], [], [unary], h=0);
/// an internal node concatenates its children around [h] and [label] with
/// h = max(h_left, h_right) + 1.
LabeledTuple tree_to_labels(const BinaryTree& tree);

/// tree_to_labels followed by vocabulary lookup. Throws UnknownLabel for a
/// label missing from a frozen vocabulary; unfrozen vocabularies grow.
GoldTuple tree_to_tuple(const BinaryTree& tree, LabelVocab& c_vocab, LabelVocab& u_vocab);
GoldTuple tree_to_tuple(const BinaryTree& tree, const LabelVocab& c_vocab,
                        const LabelVocab& u_vocab);
GoldTuple encode_labels(const LabeledTuple& tuple, const LabelVocab& c_vocab,
                        const LabelVocab& u_vocab);

/// Recursive split at the leftmost maximum of d. Leaves are numbered by
/// position and take their text from `tokens` when it is non-empty.
/// Throws LengthMismatch unless |d| = |c| = |u| - 1 (and |tokens| = |u|).
BinaryTree tuple_to_tree(std::span<const double> d, std::span<const std::string> c,
                         std::span<const std::string> u,
                         std::span<const std::string> tokens = {});
BinaryTree tuple_to_tree(std::span<const double> d, std::span<const LabelId> c,
                         std::span<const LabelId> u, const LabelVocab& c_vocab,
                         const LabelVocab& u_vocab, std::span<const std::string> tokens = {});
BinaryTree tuple_to_tree(const LabeledTuple& tuple);

/// True iff sign(a_i - a_j) == sign(b_i - b_j) for every pair i < j.
/// Throws LengthMismatch on different lengths.
bool rank_equivalent(std::span<const double> a, std::span<const double> b);

std::vector<double> to_real(std::span<const int> distances);

}  // namespace astprobe

#include "astprobe/tuple_codec.hpp"

#include <algorithm>

#include "astprobe/errors.hpp"

namespace astprobe {

namespace {

int encode_node(const BtNode& node, LabeledTuple& out) {
  if (node.is_leaf()) {
    out.u.push_back(node.unary_label.empty() ? std::string(kNullLabel) : node.unary_label);
    out.tokens.push_back(node.text);
    return 0;
  }
  int left = encode_node(node.left(), out);
  // The node's own entry sits between the left and right subtrees' entries.
  std::size_t slot = out.distances.size();
  out.distances.push_back(0);
  out.c.push_back(node.label);
  int right = encode_node(node.right(), out);
  int h = std::max(left, right) + 1;
  out.distances[slot] = h;
  return h;
}

template <typename Label>
GoldTuple lookup(const LabeledTuple& tuple, Label&& to_id) {
  GoldTuple gold;
  gold.distances = tuple.distances;
  gold.height = tuple.height;
  gold.c.reserve(tuple.c.size());
  for (const auto& label : tuple.c) gold.c.push_back(to_id(true, label));
  gold.u.reserve(tuple.u.size());
  for (const auto& label : tuple.u) gold.u.push_back(to_id(false, label));
  return gold;
}

struct Decoder {
  std::span<const double> d;
  std::span<const std::string> c;
  std::span<const std::string> u;
  std::span<const std::string> tokens;

  // Leaves first..last (inclusive); gaps first..last-1.
  BtNode build(std::size_t first, std::size_t last) const {
    if (first == last) {
      return BtNode::leaf(first, tokens.empty() ? std::to_string(first) : tokens[first], u[first]);
    }
    std::size_t split = first;
    for (std::size_t i = first + 1; i < last; ++i) {
      if (d[i] > d[split]) split = i;
    }
    return BtNode::internal(c[split], build(first, split), build(split + 1, last));
  }
};

int sign(double x) { return (x > 0) - (x < 0); }

}  // namespace

LabeledTuple tree_to_labels(const BinaryTree& tree) {
  LabeledTuple out;
  out.height = encode_node(tree.root, out);
  return out;
}

GoldTuple encode_labels(const LabeledTuple& tuple, const LabelVocab& c_vocab,
                        const LabelVocab& u_vocab) {
  return lookup(tuple, [&](bool is_c, const std::string& label) {
    return is_c ? c_vocab.id(label) : u_vocab.id(label);
  });
}

GoldTuple tree_to_tuple(const BinaryTree& tree, const LabelVocab& c_vocab,
                        const LabelVocab& u_vocab) {
  return encode_labels(tree_to_labels(tree), c_vocab, u_vocab);
}

GoldTuple tree_to_tuple(const BinaryTree& tree, LabelVocab& c_vocab, LabelVocab& u_vocab) {
  return lookup(tree_to_labels(tree), [&](bool is_c, const std::string& label) {
    return is_c ? c_vocab.intern(label) : u_vocab.intern(label);
  });
}

BinaryTree tuple_to_tree(std::span<const double> d, std::span<const std::string> c,
                         std::span<const std::string> u, std::span<const std::string> tokens) {
  if (u.empty() || d.size() != c.size() || d.size() + 1 != u.size()) {
    throw LengthMismatch("tuple lengths |d|=" + std::to_string(d.size()) +
                         " |c|=" + std::to_string(c.size()) +
                         " |u|=" + std::to_string(u.size()));
  }
  if (!tokens.empty() && tokens.size() != u.size()) {
    throw LengthMismatch("token count " + std::to_string(tokens.size()) +
                         " does not match |u|=" + std::to_string(u.size()));
  }
  Decoder decoder{d, c, u, tokens};
  return BinaryTree{decoder.build(0, u.size() - 1)};
}

BinaryTree tuple_to_tree(std::span<const double> d, std::span<const LabelId> c,
                         std::span<const LabelId> u, const LabelVocab& c_vocab,
                         const LabelVocab& u_vocab, std::span<const std::string> tokens) {
  std::vector<std::string> c_labels;
  c_labels.reserve(c.size());
  for (LabelId id : c) c_labels.push_back(c_vocab.label(id));
  std::vector<std::string> u_labels;
  u_labels.reserve(u.size());
  for (LabelId id : u) u_labels.push_back(u_vocab.label(id));
  return tuple_to_tree(d, c_labels, u_labels, tokens);
}

BinaryTree tuple_to_tree(const LabeledTuple& tuple) {
  auto d = to_real(tuple.distances);
  return tuple_to_tree(d, tuple.c, tuple.u, tuple.tokens);
}

bool rank_equivalent(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("rank_equivalent on vectors of length " + std::to_string(a.size()) +
                         " and " + std::to_string(b.size()));
  }
  // Equal ranking <=> sorting the indices by a also sorts b, with the same
  // tie groups.
  std::vector<std::size_t> order(a.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a[i] < a[j]; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    std::size_t i = order[k - 1], j = order[k];
    if (sign(a[j] - a[i]) != sign(b[j] - b[i])) return false;
  }
  return true;
}

std::vector<double> to_real(std::span<const int> distances) {
  return {distances.begin(), distances.end()};
}

}  // namespace astprobe

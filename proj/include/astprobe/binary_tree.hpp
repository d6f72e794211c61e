#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "astprobe/ast.hpp"

namespace astprobe {

/// Node of a strictly binary tree. Internal nodes carry a label that may be
/// kNullLabel or a "-"-joined merged chain; leaves carry a token and a unary
/// label (kNullLabel when the token has none).
struct BtNode {
  enum class Kind : std::uint8_t { Internal, Leaf };

  Kind kind = Kind::Leaf;
  std::string label;             // internal nodes
  std::vector<BtNode> children;  // internal nodes: exactly two
  std::size_t token_index = 0;   // leaves
  std::string text;              // leaves
  std::string unary_label{kNullLabel};  // leaves

  static BtNode leaf(std::size_t token_index, std::string text,
                     std::string unary_label = std::string(kNullLabel));
  static BtNode internal(std::string label, BtNode left, BtNode right);

  bool is_leaf() const { return kind == Kind::Leaf; }
  const BtNode& left() const { return children[0]; }
  const BtNode& right() const { return children[1]; }

  bool operator==(const BtNode&) const = default;
};

struct BinaryTree {
  BtNode root;

  bool operator==(const BinaryTree&) const = default;
};

std::size_t leaf_count(const BinaryTree& tree);
std::size_t height(const BinaryTree& tree);

/// Bracketed debug form: internal `(label l r)`, leaf `text` or `text/unary`.
std::string to_string(const BinaryTree& tree);

}  // namespace astprobe

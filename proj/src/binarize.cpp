#include "astprobe/binarize.hpp"

#include <algorithm>

#include "astprobe/errors.hpp"

namespace astprobe {

BtNode BtNode::leaf(std::size_t token_index, std::string text, std::string unary_label) {
  BtNode node;
  node.kind = Kind::Leaf;
  node.token_index = token_index;
  node.text = std::move(text);
  node.unary_label = std::move(unary_label);
  return node;
}

BtNode BtNode::internal(std::string label, BtNode left, BtNode right) {
  BtNode node;
  node.kind = Kind::Internal;
  node.label = std::move(label);
  node.children.reserve(2);
  node.children.push_back(std::move(left));
  node.children.push_back(std::move(right));
  node.unary_label.clear();
  return node;
}

namespace {

std::size_t count_leaves(const BtNode& node) {
  if (node.is_leaf()) return 1;
  return count_leaves(node.left()) + count_leaves(node.right());
}

std::size_t node_height(const BtNode& node) {
  if (node.is_leaf()) return 0;
  return std::max(node_height(node.left()), node_height(node.right())) + 1;
}

void write(std::string& out, const BtNode& node) {
  if (node.is_leaf()) {
    out += node.text;
    if (node.unary_label != kNullLabel) {
      out += '/';
      out += node.unary_label;
    }
    return;
  }
  out += '(';
  out += node.label;
  out += ' ';
  write(out, node.left());
  out += ' ';
  write(out, node.right());
  out += ')';
}

std::string join_chain(std::string_view parent, std::string_view child) {
  std::string joined(parent);
  joined += kChainSeparator;
  joined += child;
  return joined;
}

BtNode binarize_node(const AstNode& node) {
  if (node.is_terminal()) return BtNode::leaf(node.token_index, node.text);

  if (node.children.size() == 1) {
    BtNode child = binarize_node(node.children.front());
    if (child.is_leaf()) {
      // Chain ending in a terminal: fold the whole chain into the leaf.
      child.unary_label = child.unary_label == kNullLabel
                              ? node.label
                              : join_chain(node.label, child.unary_label);
    } else {
      child.label = join_chain(node.label, child.label);
    }
    return child;
  }

  std::vector<BtNode> parts;
  parts.reserve(node.children.size());
  for (const auto& child : node.children) parts.push_back(binarize_node(child));

  BtNode tail = std::move(parts.back());
  for (std::size_t i = parts.size() - 2; i >= 1; --i) {
    tail = BtNode::internal(std::string(kNullLabel), std::move(parts[i]), std::move(tail));
  }
  return BtNode::internal(node.label, std::move(parts.front()), std::move(tail));
}

std::vector<std::string> split_chain(const std::string& label) {
  std::vector<std::string> parts;
  std::string current;
  for (char ch : label) {
    if (ch == kChainSeparator) {
      parts.push_back(std::move(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  parts.push_back(std::move(current));
  for (const auto& part : parts) {
    if (part.empty()) throw MalformedLabel("empty component in merged label '" + label + "'");
  }
  return parts;
}

AstNode wrap_chain(const std::string& label, std::vector<AstNode> children) {
  auto chain = split_chain(label);
  AstNode node = AstNode::nonterminal(std::move(chain.back()), std::move(children));
  for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it) {
    std::vector<AstNode> single;
    single.push_back(std::move(node));
    node = AstNode::nonterminal(std::move(*it), std::move(single));
  }
  return node;
}

AstNode unbinarize_node(const BtNode& node);

// Children contributed to the nearest non-null ancestor.
void expand_into(const BtNode& node, std::vector<AstNode>& out) {
  if (!node.is_leaf() && node.label == kNullLabel) {
    expand_into(node.left(), out);
    expand_into(node.right(), out);
    return;
  }
  out.push_back(unbinarize_node(node));
}

AstNode unbinarize_node(const BtNode& node) {
  if (node.is_leaf()) {
    AstNode terminal = AstNode::terminal(node.token_index, node.text);
    if (node.unary_label == kNullLabel || node.unary_label.empty()) return terminal;
    std::vector<AstNode> single;
    single.push_back(std::move(terminal));
    return wrap_chain(node.unary_label, std::move(single));
  }
  std::vector<AstNode> children;
  expand_into(node.left(), children);
  expand_into(node.right(), children);
  if (node.label == kNullLabel) {
    return AstNode::nonterminal(std::string(kNullLabel), std::move(children));
  }
  return wrap_chain(node.label, std::move(children));
}

}  // namespace

std::size_t leaf_count(const BinaryTree& tree) { return count_leaves(tree.root); }

std::size_t height(const BinaryTree& tree) { return node_height(tree.root); }

std::string to_string(const BinaryTree& tree) {
  std::string out;
  write(out, tree.root);
  return out;
}

BinaryTree binarize(const Ast& ast) { return BinaryTree{binarize_node(ast.root)}; }

Ast unbinarize(const BinaryTree& tree) { return Ast{unbinarize_node(tree.root)}; }

}  // namespace astprobe

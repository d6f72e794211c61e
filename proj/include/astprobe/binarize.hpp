#pragma once

#include "astprobe/ast.hpp"
#include "astprobe/binary_tree.hpp"

namespace astprobe {

/// AST to binary tree, in one post-order pass:
///  - a non-terminal chain ending in a single terminal is removed and its
///    labels, joined by "-", become the terminal's unary label;
///  - any other unary non-terminal is merged with its child ("parent-child");
///  - an n-ary node keeps its first child on the left and hangs the rest off a
///    right-branching chain of kNullLabel nodes (arity - 2 of them).
BinaryTree binarize(const Ast& ast);

/// Inverse of binarize: splices out kNullLabel nodes, re-expands merged
/// labels into unary chains and unary leaf labels into chains above the
/// terminal. A kNullLabel root has no parent to splice into and is kept as a
/// non-terminal labeled kNullLabel.
///
/// Throws MalformedLabel when a merged label has an empty component.
Ast unbinarize(const BinaryTree& tree);

}  // namespace astprobe

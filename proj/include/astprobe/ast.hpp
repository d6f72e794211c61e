#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace astprobe {

/// Placeholder label: inner node added while binarizing an n-ary node, and
/// the "no label" symbol of the c/u vocabularies.
inline constexpr std::string_view kNullLabel = "\xE2\x88\x85";  // U+2205

/// Separator joining merged unary-chain labels.
inline constexpr char kChainSeparator = '-';

/// A node of a rose tree: either a labeled non-terminal with at least one
/// child, or a terminal holding one code token.
struct AstNode {
  enum class Kind : std::uint8_t { NonTerminal, Terminal };

  Kind kind = Kind::Terminal;
  std::string label;              // non-terminals only
  std::vector<AstNode> children;  // non-terminals only
  std::size_t token_index = 0;    // terminals only, 0-based leaf position
  std::string text;               // terminals only

  static AstNode terminal(std::size_t token_index, std::string text);
  static AstNode nonterminal(std::string label, std::vector<AstNode> children);

  bool is_terminal() const { return kind == Kind::Terminal; }

  bool operator==(const AstNode&) const = default;
};

struct Ast {
  AstNode root;

  bool operator==(const Ast&) const = default;
};

std::size_t leaf_count(const Ast& ast);
std::size_t nonterminal_count(const Ast& ast);

/// Token texts in leaf order.
std::vector<std::string> leaf_texts(const Ast& ast);

/// Throws astprobe::Error when a structural invariant does not hold:
/// empty child lists, empty labels, or leaf indices that are not 0..n in order.
void validate(const Ast& ast);

/// Rewrites terminal indices as 0..n in left-to-right order.
void renumber_leaves(Ast& ast);

/// Bracketed form, e.g. `(block (assignment x = 1) (break_statement break))`.
/// Atoms containing whitespace, parentheses, quotes or backslashes are
/// written as double-quoted strings.
std::string to_sexpr(const Ast& ast);

/// Inverse of to_sexpr. Leaves are numbered in reading order.
Ast parse_sexpr(std::string_view text);

/// FNV-1a 64 hash of to_sexpr(ast), as 16 lowercase hex digits.
std::string fingerprint(const Ast& ast);

std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace astprobe

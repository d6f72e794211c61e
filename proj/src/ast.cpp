#include "astprobe/ast.hpp"

#include <cctype>
#include <cstdio>

#include "astprobe/errors.hpp"

namespace astprobe {

AstNode AstNode::terminal(std::size_t token_index, std::string text) {
  AstNode node;
  node.kind = Kind::Terminal;
  node.token_index = token_index;
  node.text = std::move(text);
  return node;
}

AstNode AstNode::nonterminal(std::string label, std::vector<AstNode> children) {
  AstNode node;
  node.kind = Kind::NonTerminal;
  node.label = std::move(label);
  node.children = std::move(children);
  return node;
}

namespace {

template <typename Visit>
void preorder(const AstNode& node, Visit&& visit) {
  visit(node);
  for (const auto& child : node.children) preorder(child, visit);
}

void renumber(AstNode& node, std::size_t& next) {
  if (node.is_terminal()) {
    node.token_index = next++;
    return;
  }
  for (auto& child : node.children) renumber(child, next);
}

bool needs_quoting(std::string_view atom) {
  if (atom.empty()) return true;
  for (char ch : atom) {
    switch (ch) {
      case ' ': case '\t': case '\n': case '\r': case '\f': case '\v':
      case '(': case ')': case '"': case '\\':
        return true;
      default:
        break;
    }
  }
  return false;
}

void write_atom(std::string& out, std::string_view atom) {
  if (!needs_quoting(atom)) {
    out += atom;
    return;
  }
  out += '"';
  for (char ch : atom) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += ch; break;
    }
  }
  out += '"';
}

void write_node(std::string& out, const AstNode& node) {
  if (node.is_terminal()) {
    write_atom(out, node.text);
    return;
  }
  out += '(';
  write_atom(out, node.label);
  for (const auto& child : node.children) {
    out += ' ';
    write_node(out, child);
  }
  out += ')';
}

class SexprReader {
 public:
  explicit SexprReader(std::string_view text) : text_(text) {}

  AstNode read_node() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (text_[pos_] == ')') fail("unexpected ')'");
    if (text_[pos_] != '(') return AstNode::terminal(next_leaf_++, read_atom());
    ++pos_;
    skip_space();
    std::string label = read_atom();
    std::vector<AstNode> children;
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) fail("unterminated list");
      if (text_[pos_] == ')') {
        ++pos_;
        break;
      }
      children.push_back(read_node());
    }
    if (children.empty()) fail("non-terminal '" + label + "' has no children");
    return AstNode::nonterminal(std::move(label), std::move(children));
  }

  void expect_end() {
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("s-expression at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string read_atom() {
    if (pos_ >= text_.size()) fail("expected atom");
    std::string atom;
    if (text_[pos_] == '"') {
      ++pos_;
      for (;;) {
        if (pos_ >= text_.size()) fail("unterminated string");
        char ch = text_[pos_++];
        if (ch == '"') break;
        if (ch == '\\') {
          if (pos_ >= text_.size()) fail("dangling escape");
          char esc = text_[pos_++];
          switch (esc) {
            case 'n': atom += '\n'; break;
            case 't': atom += '\t'; break;
            case 'r': atom += '\r'; break;
            default: atom += esc; break;
          }
        } else {
          atom += ch;
        }
      }
      return atom;
    }
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(ch)) || ch == '(' || ch == ')') break;
      atom += ch;
      ++pos_;
    }
    if (atom.empty()) fail("expected atom");
    return atom;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t next_leaf_ = 0;
};

}  // namespace

std::size_t leaf_count(const Ast& ast) {
  std::size_t count = 0;
  preorder(ast.root, [&](const AstNode& n) { count += n.is_terminal() ? 1 : 0; });
  return count;
}

std::size_t nonterminal_count(const Ast& ast) {
  std::size_t count = 0;
  preorder(ast.root, [&](const AstNode& n) { count += n.is_terminal() ? 0 : 1; });
  return count;
}

std::vector<std::string> leaf_texts(const Ast& ast) {
  std::vector<std::string> texts;
  preorder(ast.root, [&](const AstNode& n) {
    if (n.is_terminal()) texts.push_back(n.text);
  });
  return texts;
}

void validate(const Ast& ast) {
  std::size_t expected = 0;
  preorder(ast.root, [&](const AstNode& n) {
    if (n.is_terminal()) {
      if (n.token_index != expected) {
        throw Error("leaf " + std::to_string(expected) + " carries index " +
                    std::to_string(n.token_index));
      }
      ++expected;
      return;
    }
    if (n.label.empty()) throw Error("non-terminal with empty label");
    if (n.children.empty()) throw Error("non-terminal '" + n.label + "' has no children");
  });
}

void renumber_leaves(Ast& ast) {
  std::size_t next = 0;
  renumber(ast.root, next);
}

std::string to_sexpr(const Ast& ast) {
  std::string out;
  write_node(out, ast.root);
  return out;
}

Ast parse_sexpr(std::string_view text) {
  SexprReader reader(text);
  Ast ast{reader.read_node()};
  reader.expect_end();
  return ast;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t hash = seed;
  for (unsigned char ch : bytes) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string fingerprint(const Ast& ast) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_sexpr(ast))));
  return buf;
}

}  // namespace astprobe

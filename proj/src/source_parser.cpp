#include "astprobe/source_parser.hpp"

#include <tree_sitter/api.h>

#include <algorithm>
#include <cctype>
#include <memory>

#include "astprobe/errors.hpp"

extern "C" {
const TSLanguage* tree_sitter_python();
const TSLanguage* tree_sitter_go();
const TSLanguage* tree_sitter_javascript();
}

namespace astprobe {

namespace {

struct Grammar {
  std::string_view id;
  std::string_view extension;
  const TSLanguage* (*language)();
};

constexpr Grammar kGrammars[] = {
    {"python", "py", tree_sitter_python},
    {"go", "go", tree_sitter_go},
    {"javascript", "js", tree_sitter_javascript},
};

const Grammar& find_grammar(std::string_view language) {
  for (const auto& grammar : kGrammars) {
    if (grammar.id == language) return grammar;
  }
  throw UnsupportedLanguage("no grammar for language '" + std::string(language) + "'");
}

struct ParserDeleter {
  void operator()(TSParser* p) const { ts_parser_delete(p); }
};
struct TreeDeleter {
  void operator()(TSTree* t) const { ts_tree_delete(t); }
};

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char ch) { return std::isspace(ch) != 0; });
}

class Converter {
 public:
  explicit Converter(std::string_view code) : code_(code) {}

  // Returns false when nothing of the node survives filtering.
  bool convert(TSNode node, AstNode& out) {
    std::string_view type = ts_node_type(node);
    if (type == "comment") return false;
    uint32_t count = ts_node_child_count(node);
    if (count == 0) {
      uint32_t begin = ts_node_start_byte(node);
      uint32_t end = ts_node_end_byte(node);
      std::string_view text = code_.substr(begin, end - begin);
      if (text.empty() || is_blank(text)) return false;
      out = AstNode::terminal(ranges_.size(), std::string(text));
      ranges_.push_back({begin, end});
      return true;
    }
    std::vector<AstNode> children;
    for (uint32_t i = 0; i < count; ++i) {
      AstNode child;
      if (convert(ts_node_child(node, i), child)) children.push_back(std::move(child));
    }
    if (children.empty()) return false;
    out = AstNode::nonterminal(sanitize_label(type), std::move(children));
    return true;
  }

  std::vector<TokenRange> take_ranges() { return std::move(ranges_); }

 private:
  std::string_view code_;
  std::vector<TokenRange> ranges_;
};

}  // namespace

std::vector<std::string> supported_languages() {
  std::vector<std::string> ids;
  for (const auto& grammar : kGrammars) ids.emplace_back(grammar.id);
  return ids;
}

bool is_supported_language(std::string_view language) {
  return std::any_of(std::begin(kGrammars), std::end(kGrammars),
                     [&](const Grammar& g) { return g.id == language; });
}

std::string_view source_extension(std::string_view language) {
  return find_grammar(language).extension;
}

std::string sanitize_label(std::string_view node_type) {
  std::string label(node_type);
  std::replace(label.begin(), label.end(), kChainSeparator, '_');
  if (label.empty() || label == kNullLabel) label = "_null_";
  return label;
}

ParsedSource parse_source_with_ranges(std::string_view code, std::string_view language) {
  const Grammar& grammar = find_grammar(language);
  std::unique_ptr<TSParser, ParserDeleter> parser(ts_parser_new());
  if (!ts_parser_set_language(parser.get(), grammar.language())) {
    throw UnsupportedLanguage("grammar ABI mismatch for '" + std::string(language) + "'");
  }
  std::unique_ptr<TSTree, TreeDeleter> tree(
      ts_parser_parse_string(parser.get(), nullptr, code.data(), static_cast<uint32_t>(code.size())));
  if (!tree) throw ParseError("parser returned no tree");
  TSNode root = ts_tree_root_node(tree.get());
  if (ts_node_has_error(root)) {
    throw ParseError("syntax error in " + std::string(language) + " source");
  }
  Converter converter(code);
  ParsedSource parsed;
  if (!converter.convert(root, parsed.ast.root)) throw ParseError("source has no tokens");
  parsed.token_ranges = converter.take_ranges();
  return parsed;
}

Ast parse_source(std::string_view code, std::string_view language) {
  return parse_source_with_ranges(code, language).ast;
}

}  // namespace astprobe

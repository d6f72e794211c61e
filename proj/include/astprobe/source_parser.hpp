#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "astprobe/ast.hpp"

namespace astprobe {

/// Byte range [begin, end) of one code token in the source text.
struct TokenRange {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;

  bool operator==(const TokenRange&) const = default;
};

struct ParsedSource {
  Ast ast;
  std::vector<TokenRange> token_ranges;  // one per leaf, in leaf order
};

/// Language ids with a bundled grammar: "python", "go", "javascript".
std::vector<std::string> supported_languages();
bool is_supported_language(std::string_view language);

/// File extension (without dot) conventionally used for the language.
std::string_view source_extension(std::string_view language);

/// Makes a grammar node type usable as an AST label: '-' becomes '_' so merged
/// chains can be split unambiguously, and the null label is never produced.
std::string sanitize_label(std::string_view node_type);

/// Concrete syntax tree of `code`. Comments, zero-width nodes and
/// whitespace-only tokens are dropped; leaves are numbered left to right.
///
/// Throws UnsupportedLanguage for an unknown language id and ParseError when
/// the grammar reports an error or missing node, or no token remains.
Ast parse_source(std::string_view code, std::string_view language);
ParsedSource parse_source_with_ranges(std::string_view code, std::string_view language);

}  // namespace astprobe

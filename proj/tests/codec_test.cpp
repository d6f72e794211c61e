#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "astprobe/binarize.hpp"
#include "astprobe/errors.hpp"
#include "astprobe/source_parser.hpp"
#include "astprobe/synthetic.hpp"
#include "astprobe/tuple_codec.hpp"

using namespace astprobe;

namespace {

const std::string N(kNullLabel);

// Gold else-block of the running example.
const char* kElseBlock =
    "(block (expression_statement (assignment selected = element)) (break_statement break))";

// Height of the lowest common ancestor of leaves i and j, found by walking
// root-to-leaf paths. Quadratic, independent of the recursive encoder.
int lca_height(const BtNode& root, std::size_t i, std::size_t j) {
  std::function<bool(const BtNode&, std::size_t, std::vector<const BtNode*>&)> path =
      [&](const BtNode& node, std::size_t leaf, std::vector<const BtNode*>& out) {
        out.push_back(&node);
        if (node.is_leaf()) {
          if (node.token_index == leaf) return true;
        } else {
          for (const auto& child : node.children) {
            if (path(child, leaf, out)) return true;
          }
        }
        out.pop_back();
        return false;
      };
  std::function<int(const BtNode&)> node_height = [&](const BtNode& node) {
    if (node.is_leaf()) return 0;
    return 1 + std::max(node_height(node.left()), node_height(node.right()));
  };
  std::vector<const BtNode*> a, b;
  path(root, i, a);
  path(root, j, b);
  std::size_t k = 0;
  while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
  return node_height(*a[k - 1]);
}

bool pairwise_equivalent(const std::vector<double>& a, const std::vector<double>& b) {
  auto sign = [](double x) { return (x > 0) - (x < 0); };
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (sign(a[i] - a[j]) != sign(b[i] - b[j])) return false;
  return true;
}

}  // namespace

TEST(Binarize, ElseBlockMatchesWorkedExample) {
  const Ast ast = parse_sexpr(kElseBlock);
  const BinaryTree tree = binarize(ast);
  EXPECT_EQ(to_string(tree),
            "(block (expression_statement-assignment selected (" + N +
                " = element)) break/break_statement)");

  const LabeledTuple t = tree_to_labels(tree);
  EXPECT_EQ(t.distances, (std::vector<int>{2, 1, 3}));
  EXPECT_EQ(t.c, (std::vector<std::string>{"expression_statement-assignment", N, "block"}));
  EXPECT_EQ(t.u, (std::vector<std::string>{N, N, N, "break_statement"}));
  EXPECT_EQ(t.tokens, (std::vector<std::string>{"selected", "=", "element", "break"}));
  EXPECT_EQ(unbinarize(tree), ast);
}

TEST(Binarize, FiveAryNodeGetsThreePlaceholders) {
  const BinaryTree tree = binarize(parse_sexpr("(call a b c d e)"));
  EXPECT_EQ(to_string(tree), "(call a (" + N + " b (" + N + " c (" + N + " d e))))");
}

TEST(Binarize, ChainOverNonTerminalIsMerged) {
  const BinaryTree tree = binarize(parse_sexpr("(module (stmt (expr a b)))"));
  EXPECT_EQ(to_string(tree), "(module-stmt-expr a b)");
}

TEST(Binarize, ChainOverTerminalBecomesUnaryLabel) {
  const Ast ast = parse_sexpr("(block (return (name x)) y)");
  const BinaryTree tree = binarize(ast);
  EXPECT_EQ(to_string(tree), "(block x/return-name y)");
  EXPECT_EQ(unbinarize(tree), ast);
}

TEST(Binarize, MalformedMergedLabel) {
  const BinaryTree tree{BtNode::internal("a--b", BtNode::leaf(0, "x"), BtNode::leaf(1, "y"))};
  EXPECT_THROW(unbinarize(tree), MalformedLabel);
}

TEST(Codec, SplitsAtLeftmostMaximum) {
  const std::vector<double> d{1, 3, 3};
  const std::vector<std::string> c{"a", "b", "c"}, u{N, N, N, N};
  // Leftmost max at gap 1 splits [w0 w1] | [w2 w3].
  EXPECT_EQ(to_string(tuple_to_tree(d, c, u)), "(b (a 0 1) (c 2 3))");
}

TEST(Codec, LengthMismatch) {
  const std::vector<double> d{1, 2};
  const std::vector<std::string> c{"a"}, u{N, N, N};
  EXPECT_THROW(tuple_to_tree(d, c, u), LengthMismatch);
}

TEST(Codec, FrozenVocabularyRejectsUnknownLabel) {
  LabelVocab c, u;
  const BinaryTree tree = binarize(parse_sexpr(kElseBlock));
  tree_to_tuple(tree, c, u);
  c.freeze();
  u.freeze();
  EXPECT_THROW(tree_to_tuple(binarize(parse_sexpr("(other a b)")), c, u), UnknownLabel);
}

TEST(Codec, DistancesEqualQuadraticLcaOracle) {
  std::mt19937_64 rng(11);
  const RandomAstOptions options{.min_leaves = 2, .max_leaves = 40};
  for (int k = 0; k < 200; ++k) {
    const BinaryTree tree = binarize(random_ast(rng, options));
    const LabeledTuple t = tree_to_labels(tree);
    for (std::size_t i = 0; i < t.distances.size(); ++i) {
      ASSERT_EQ(t.distances[i], lca_height(tree.root, i, i + 1));
    }
  }
}

TEST(Codec, RoundTripsRandomTrees) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 300; ++k) {
    const Ast ast = random_ast(rng, {});
    const BinaryTree tree = binarize(ast);
    ASSERT_EQ(unbinarize(tree), ast) << to_sexpr(ast);
    ASSERT_EQ(tuple_to_tree(tree_to_labels(tree)), tree) << to_sexpr(ast);
  }
}

TEST(Codec, RoundTripsArbitraryBinaryTrees) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> labels{"a", "b", "c"};
  for (int k = 0; k < 200; ++k) {
    const BinaryTree tree = random_binary_tree(rng, 1 + rng() % 30, labels);
    ASSERT_EQ(tuple_to_tree(tree_to_labels(tree)), tree);
  }
}

TEST(Codec, RankEquivalentAgreesWithPairwiseOracle) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> value(0, 4);
  for (int k = 0; k < 2000; ++k) {
    const std::size_t n = rng() % 8;
    std::vector<double> a(n), b(n);
    for (auto& x : a) x = value(rng);
    for (auto& x : b) x = value(rng);
    if (k % 2 == 0) {
      for (std::size_t i = 0; i < n; ++i) b[i] = 2 * a[i] + 1;  // monotone image
      if (n > 0 && k % 4 == 0) b[rng() % n] += 0.5;
    }
    ASSERT_EQ(rank_equivalent(a, b), pairwise_equivalent(a, b));
  }
  EXPECT_THROW(rank_equivalent(std::vector<double>{1}, std::vector<double>{1, 2}), LengthMismatch);
}

TEST(SexprFormat, RoundTripsQuotedAtoms) {
  const Ast ast = parse_sexpr(R"x((call f "(" "a b" ")"))x");
  EXPECT_EQ(leaf_texts(ast), (std::vector<std::string>{"f", "(", "a b", ")"}));
  EXPECT_EQ(parse_sexpr(to_sexpr(ast)), ast);
  EXPECT_THROW(parse_sexpr("(call f"), ParseError);
}

// ---------------------------------------------------------------------------

TEST(SourceParser, AugmentedAssignment) {
  const Ast ast = parse_source("c+=1", "python");
  EXPECT_EQ(to_sexpr(ast), "(module (expression_statement (augmented_assignment c += 1)))");
}

TEST(SourceParser, RunningExampleElseBlock) {
  const Ast ast = parse_source(
      "for element in l:\n"
      "    if element > 0:\n"
      "        c+=1\n"
      "    else:\n"
      "        selected = element\n"
      "        break\n",
      "python");
  EXPECT_NE(to_sexpr(ast).find(std::string("(else_clause else : ") + kElseBlock + ")"),
            std::string::npos);
}

TEST(SourceParser, EmptyInputIsAnError) {
  EXPECT_THROW(parse_source("", "python"), ParseError);
  EXPECT_THROW(parse_source("def (:", "python"), ParseError);
  EXPECT_THROW(parse_source("x = 1", "cobol"), UnsupportedLanguage);
}

TEST(SourceParser, LeafCountMatchesPythonTokenizer) {
  // Python's own tokenize module yields 29 tokens for this function once
  // NEWLINE/INDENT/DEDENT/COMMENT/ENDMARKER are removed.
  const std::string code =
      "def scale(values, factor):\n"
      "    total = sum(values) * factor\n"
      "    values.append(total)  # keep it\n"
      "    return [total, -factor]\n";
  const ParsedSource parsed = parse_source_with_ranges(code, "python");
  EXPECT_EQ(leaf_count(parsed.ast), 29u);
  ASSERT_EQ(parsed.token_ranges.size(), 29u);
  const auto texts = leaf_texts(parsed.ast);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto& r = parsed.token_ranges[i];
    EXPECT_EQ(code.substr(r.begin, r.end - r.begin), texts[i]);
  }
}

TEST(SourceParser, OtherGrammars) {
  EXPECT_EQ(to_sexpr(parse_source("package main", "go")), "(source_file (package_clause package main))");
  EXPECT_EQ(leaf_count(parse_source("let x = f(1);", "javascript")), 8u);
  EXPECT_EQ(sanitize_label("a-b"), "a_b");
}

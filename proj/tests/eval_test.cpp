#include <gtest/gtest.h>

#include <map>
#include <random>

#include "astprobe/binarize.hpp"
#include "astprobe/errors.hpp"
#include "astprobe/eval.hpp"
#include "astprobe/synthetic.hpp"

using namespace astprobe;

namespace {

const char* kGold =
    "(block (expression_statement (assignment selected = element)) (break_statement break))";
const char* kPredicted =
    "(block (expression_statement (augmented_assignment selected = element)) break)";

// Multiset intersection via a counting map.
std::size_t hits_by_counting(const std::vector<Constituent>& pred,
                             const std::vector<Constituent>& gold) {
  std::map<std::tuple<std::string, std::size_t, std::size_t>, int> counts;
  for (const auto& c : gold) ++counts[{c.label, c.start, c.end}];
  std::size_t hits = 0;
  for (const auto& c : pred) {
    auto it = counts.find({c.label, c.start, c.end});
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++hits;
    }
  }
  return hits;
}

}  // namespace

TEST(Constituents, ElseBlock) {
  const auto got = constituents(parse_sexpr(kGold));
  const std::vector<Constituent> want{{"block", 0, 3},
                                      {"expression_statement", 0, 2},
                                      {"assignment", 0, 2},
                                      {"break_statement", 3, 3}};
  EXPECT_EQ(got, want);
}

TEST(Constituents, SkipsPlaceholderNodes) {
  Ast ast = parse_sexpr("(a x y)");
  ast.root.label = std::string(kNullLabel);
  EXPECT_TRUE(constituents(ast).empty());
}

TEST(Score, WorkedExample) {
  const PrfScore s = score(parse_sexpr(kPredicted), parse_sexpr(kGold));
  EXPECT_EQ(s.hits, 2u);
  EXPECT_EQ(s.n_pred, 3u);
  EXPECT_EQ(s.n_gold, 4u);
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.f1, 2.0 * (2.0 / 3.0) * 0.5 / (2.0 / 3.0 + 0.5));
}

TEST(Score, IdenticalTreesScoreOne) {
  const Ast gold = parse_sexpr(kGold);
  const PrfScore s = score(gold, gold);
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.recall, 1.0);
  EXPECT_EQ(s.f1, 1.0);
}

TEST(Score, LeafMismatch) {
  EXPECT_THROW(score(parse_sexpr("(a x y)"), parse_sexpr("(a x y z)")), LeafMismatch);
}

TEST(Score, EmptySides) {
  EXPECT_EQ(PrfScore::from_counts(0, 0, 0).f1, 1.0);
  EXPECT_EQ(PrfScore::from_counts(0, 0, 3).f1, 0.0);
  EXPECT_EQ(PrfScore::from_counts(0, 2, 3).f1, 0.0);
}

TEST(Score, SymmetricAndMatchesCountingOracle) {
  std::mt19937_64 rng(21);
  const RandomAstOptions options{.min_leaves = 1, .max_leaves = 25, .labels = {"a", "b", "c"}};
  for (int k = 0; k < 300; ++k) {
    const Ast gold = random_ast(rng, options);
    // A random tree over the same leaves.
    Ast pred;
    do {
      pred = random_ast(rng, options);
    } while (leaf_count(pred) != leaf_count(gold));
    const PrfScore forward = score(pred, gold);
    const PrfScore backward = score(gold, pred);
    ASSERT_EQ(forward.hits, hits_by_counting(constituents(pred), constituents(gold)));
    ASSERT_EQ(forward.precision, backward.recall);
    ASSERT_EQ(forward.recall, backward.precision);
    ASSERT_EQ(forward.f1, backward.f1);
  }
}

TEST(CorpusScore, MicroAndMacroAgreeWithOracle) {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<std::size_t> count(0, 12);
  CorpusScore corpus;
  std::size_t hits = 0, n_pred = 0, n_gold = 0;
  double f1_sum = 0, p_sum = 0, r_sum = 0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t p = count(rng), g = count(rng);
    const std::size_t h = std::min(p, g) == 0 ? 0 : count(rng) % (std::min(p, g) + 1);
    const PrfScore s = PrfScore::from_counts(h, p, g);
    corpus.add(s);
    hits += h;
    n_pred += p;
    n_gold += g;
    p_sum += s.precision;
    r_sum += s.recall;
    f1_sum += s.f1;
  }
  const PrfScore micro = corpus.micro();
  EXPECT_DOUBLE_EQ(micro.precision, static_cast<double>(hits) / static_cast<double>(n_pred));
  EXPECT_DOUBLE_EQ(micro.recall, static_cast<double>(hits) / static_cast<double>(n_gold));
  const PrfScore macro = corpus.macro();
  EXPECT_NEAR(macro.precision, p_sum / 50, 1e-12);
  EXPECT_NEAR(macro.recall, r_sum / 50, 1e-12);
  EXPECT_NEAR(macro.f1, f1_sum / 50, 1e-12);
  EXPECT_EQ(corpus.samples(), 50u);
}

TEST(ScoreRecord, Fields) {
  const auto j = score_record("s1", PrfScore::from_counts(2, 3, 4));
  EXPECT_EQ(j.at("sample_id"), "s1");
  EXPECT_EQ(j.at("hits"), 2);
  EXPECT_DOUBLE_EQ(j.at("recall").get<double>(), 0.5);
}

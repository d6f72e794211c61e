#include <gtest/gtest.h>

#include <random>
#include <set>

#include "astprobe/binarize.hpp"
#include "astprobe/byte_io.hpp"
#include "astprobe/corpus.hpp"
#include "astprobe/embedding_io.hpp"
#include "astprobe/errors.hpp"
#include "astprobe/synthetic.hpp"
#include "test_paths.hpp"

using namespace astprobe;
namespace fs = std::filesystem;

namespace {

Matrix<float> random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  Matrix<float> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

EmbeddingRecord random_record(std::mt19937_64& rng) {
  EmbeddingRecord r;
  r.sample_id = "sample";
  r.ambient_dim = 7;
  for (std::uint32_t layer : {0u, 4u, 12u}) r.layers.push_back({layer, random_matrix(rng, 9, 7)});
  // [CLS] w0 w1 w1 w2 w2 w2 w3 [SEP]
  r.word_spans = {{1, 1}, {2, 3}, {4, 6}, {7, 7}};
  return r;
}

}  // namespace

TEST(Crc64, CheckValue) {
  const std::string text = "123456789";
  EXPECT_EQ(crc64(text), 0x995DC9BBDF1939FAULL);
}

TEST(EmbeddingContainer, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  const EmbeddingRecord r = random_record(rng);
  const auto bytes = encode_embeddings(r);
  const std::vector<std::uint32_t> per_layer{9, 9, 9};
  EXPECT_EQ(bytes.size(), container_size(7, per_layer, 4));
  const EmbeddingRecord back = decode_embeddings(bytes, "sample");
  EXPECT_EQ(back, r);
  EXPECT_EQ(encode_embeddings(back), bytes);
}

TEST(EmbeddingContainer, SizeFormulaForLargeShape) {
  // 13 layers of 200 x 768 floats.
  const std::vector<std::uint32_t> per_layer(13, 200);
  const std::uint64_t expected = 12 + 13 * (8 + 4ull * 200 * 768) + 4 + 8ull * 200 + 8;
  EXPECT_EQ(container_size(768, per_layer, 200), expected);
  EXPECT_EQ(expected, 7'988'928u);

  EmbeddingRecord r;
  r.ambient_dim = 768;
  for (std::uint32_t l = 0; l < 13; ++l) r.layers.push_back({l, Matrix<float>::Zero(200, 768)});
  for (std::uint32_t w = 0; w < 200; ++w) r.word_spans.push_back({w, w});
  EXPECT_EQ(encode_embeddings(r).size(), expected);
}

TEST(EmbeddingContainer, RejectsDamage) {
  std::mt19937_64 rng(2);
  const auto bytes = encode_embeddings(random_record(rng));
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{11}, bytes.size() / 2,
                          bytes.size() - 1}) {
    const std::vector<char> truncated(bytes.begin(), bytes.begin() + static_cast<long>(cut));
    EXPECT_THROW(decode_embeddings(truncated, "x"), FormatError) << cut;
  }
  auto flipped = bytes;
  flipped[40] ^= 0x10;
  EXPECT_THROW(decode_embeddings(flipped, "x"), ChecksumError);
  auto magic = bytes;
  magic[1] = 'Z';
  EXPECT_THROW(decode_embeddings(magic, "x"), FormatError);
  auto version = bytes;
  version[4] = 2;
  EXPECT_THROW(decode_embeddings(version, "x"), FormatError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(decode_embeddings(trailing, "x"), FormatError);
}

TEST(EmbeddingContainer, FileStemIsSampleId) {
  std::mt19937_64 rng(3);
  const TempDir dir;
  EmbeddingRecord r = random_record(rng);
  r.sample_id = "abc";
  write_embeddings(dir.path() / "abc.astp", r);
  EXPECT_EQ(read_embeddings(dir.path() / "abc.astp"), r);
}

TEST(Alignment, SingleSubwordWordsAreCopied) {
  std::mt19937_64 rng(4);
  const Matrix<float> m = random_matrix(rng, 5, 3);
  const EmbeddingRecord r = word_level_record("s", 0, m);
  EXPECT_EQ(align_subwords(r, 0), m);
}

TEST(Alignment, HandMean) {
  Matrix<float> sub(2, 3);
  sub << 1, 1, 1, 3, 3, 3;
  const std::vector<WordSpan> spans{{0, 1}};
  const Matrix<float> w = align_subwords(sub, spans);
  EXPECT_EQ(w.rows(), 1);
  EXPECT_FLOAT_EQ(w(0, 0), 2.0f);
  EXPECT_FLOAT_EQ(w(0, 2), 2.0f);
}

TEST(Alignment, RandomSpansMatchLoopOracle) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const std::uint32_t words = 1 + rng() % 10;
    std::vector<WordSpan> spans;
    std::uint32_t next = rng() % 3;  // leading special subwords
    for (std::uint32_t w = 0; w < words; ++w) {
      const std::uint32_t len = 1 + rng() % 4;
      spans.push_back({next, next + len - 1});
      next += len;
    }
    const Matrix<float> sub = random_matrix(rng, next + rng() % 3, 6);
    const Matrix<float> got = align_subwords(sub, spans);
    for (std::uint32_t w = 0; w < words; ++w) {
      for (Eigen::Index c = 0; c < 6; ++c) {
        double sum = 0;
        for (std::uint32_t s = spans[w].first; s <= spans[w].last; ++s) sum += sub(s, c);
        ASSERT_NEAR(got(w, c), sum / (spans[w].last - spans[w].first + 1), 1e-6);
      }
    }
  }
}

TEST(Alignment, InvalidSpans) {
  const Matrix<float> sub = Matrix<float>::Zero(6, 2);
  EXPECT_THROW(align_subwords(sub, std::vector<WordSpan>{{0, 1}, {1, 2}}), SpanError);  // overlap
  EXPECT_THROW(align_subwords(sub, std::vector<WordSpan>{{0, 1}, {3, 4}}), SpanError);  // gap
  EXPECT_THROW(align_subwords(sub, std::vector<WordSpan>{{2, 1}}), SpanError);          // empty
  EXPECT_THROW(align_subwords(sub, std::vector<WordSpan>{{4, 6}}), SpanError);          // range
}

// ---------------------------------------------------------------------------

TEST(Vocab, ElseBlockExample) {
  const auto tuple = tree_to_labels(binarize(parse_sexpr(
      "(block (expression_statement (assignment selected = element)) (break_statement break))")));
  const auto [c, u] = build_vocabs(std::vector<LabeledTuple>{tuple});
  const std::string n(kNullLabel);
  EXPECT_EQ(c.labels(), (std::vector<std::string>{n, "expression_statement-assignment", "block"}));
  EXPECT_EQ(u.labels(), (std::vector<std::string>{n, "break_statement"}));
  EXPECT_TRUE(c.frozen());
  EXPECT_THROW(c.id("assignment"), UnknownLabel);
}

TEST(Vocab, EmptyCorpusHoldsOnlyNull) {
  const auto [c, u] = build_vocabs({});
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(u.size(), 1u);
  EXPECT_EQ(c.label(0), kNullLabel);
}

TEST(Vocab, SizesMatchStreamingRecount) {
  std::mt19937_64 rng(6);
  std::vector<LabeledTuple> tuples;
  std::set<std::string> c_seen{std::string(kNullLabel)}, u_seen{std::string(kNullLabel)};
  for (int k = 0; k < 100; ++k) {
    tuples.push_back(tree_to_labels(binarize(random_ast(rng, {}))));
    c_seen.insert(tuples.back().c.begin(), tuples.back().c.end());
    u_seen.insert(tuples.back().u.begin(), tuples.back().u.end());
  }
  const auto [c, u] = build_vocabs(tuples);
  EXPECT_EQ(c.size(), c_seen.size());
  EXPECT_EQ(u.size(), u_seen.size());
  EXPECT_EQ(LabelVocab::from_labels(c.labels()).hash(), c.hash());
}

TEST(Sidecar, RoundTrip) {
  const ParsedSource parsed = parse_source_with_ranges("c+=1", "python");
  const Sidecar s{"x", tree_to_labels(binarize(parsed.ast)), parsed.token_ranges};
  const Sidecar back = decode_sidecar(encode_sidecar(s));
  EXPECT_EQ(back.tuple, s.tuple);
  EXPECT_EQ(back.token_ranges, s.token_ranges);
  EXPECT_THROW(decode_sidecar("{\"sample_id\": 1}"), FormatError);
}

TEST(Splits, OneEachOnThreeSamples) {
  const std::vector<std::string> ids{"a", "b", "c"};
  const auto splits = assign_splits(ids, {1, 1, 1}, 9);
  EXPECT_EQ(std::multiset<std::string>(splits.begin(), splits.end()),
            (std::multiset<std::string>{"train", "test", "validation"}));
  EXPECT_EQ(assign_splits(ids, {1, 1, 1}, 9), splits);
  EXPECT_THROW(assign_splits(ids, {2, 1, 1}, 9), InsufficientData);
}

TEST(Splits, DisjointWithRequestedSizes) {
  std::vector<std::string> ids;
  for (int i = 0; i < 30000; ++i) ids.push_back("s" + std::to_string(i));
  const auto splits = assign_splits(ids, {20000, 4000, 2000}, 1);
  std::map<std::string, int> counts;
  for (const auto& s : splits) ++counts[s];
  EXPECT_EQ(counts["train"], 20000);
  EXPECT_EQ(counts["test"], 4000);
  EXPECT_EQ(counts["validation"], 2000);
  EXPECT_EQ(counts[""], 4000);
}

TEST(Manifest, FixtureCorpusIsDeterministic) {
  const auto a = make_manifest(kFixtureDir, "python", {1, 1, 1}, 3);
  const auto b = make_manifest(kFixtureDir, "python", {1, 1, 1}, 3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(encode_manifest(a), encode_manifest(b));
  ASSERT_EQ(a.samples.size(), 3u);
  std::set<std::string> ids;
  for (const auto& e : a.samples) ids.insert(e.sample_id);
  EXPECT_EQ(ids, (std::set<std::string>{"counter", "running_example", "scale"}));
  EXPECT_EQ(decode_manifest(encode_manifest(a)), a);
  EXPECT_THROW(make_manifest(kFixtureDir, "python", {2, 1, 1}, 3), InsufficientData);
}

TEST(Manifest, ExcludesBrokenSamples) {
  const TempDir dir;
  write_text_file(dir.path() / "good.py", "x = 1\n");
  write_text_file(dir.path() / "broken.py", "def (:\n");
  write_text_file(dir.path() / "tiny.py", "x\n");
  const ScanResult scan = scan_corpus(dir.path(), "python");
  ASSERT_EQ(scan.accepted.size(), 1u);
  EXPECT_EQ(scan.accepted[0].sample_id, "good");
  ASSERT_EQ(scan.excluded.size(), 2u);
  EXPECT_EQ(scan.excluded[0].sample_id, "broken");
  EXPECT_EQ(scan.excluded[0].reason.rfind("parse_error", 0), 0u);
  EXPECT_EQ(scan.excluded[1].reason, "too_few_tokens");
}

TEST(Manifest, ChecksEmbeddingsAgainstTokens) {
  const TempDir dir;
  const fs::path src = dir.path() / "src", emb = dir.path() / "emb";
  write_text_file(src / "a.py", "x = 1\n");
  write_text_file(src / "b.py", "y = 2\n");
  write_text_file(src / "c.py", "z = 3\n");
  write_text_file(src / "d.py", "w = 4\n");
  std::mt19937_64 rng(7);
  write_embeddings(emb / "a.astp", word_level_record("a", 0, random_matrix(rng, 3, 4)));
  write_embeddings(emb / "b.astp", word_level_record("b", 0, random_matrix(rng, 2, 4)));
  write_embeddings(emb / "d.astp", word_level_record("d", 0, random_matrix(rng, 3, 4)));
  ScanOptions options;
  options.embeddings_dir = emb;
  options.max_subwords = 2;
  EXPECT_EQ(scan_corpus(src, "python", options).excluded.size(), 4u);
  options.max_subwords = 512;
  const ScanResult scan = scan_corpus(src, "python", options);
  ASSERT_EQ(scan.accepted.size(), 2u);
  EXPECT_EQ(scan.excluded, (std::vector<Exclusion>{{"b", "alignment_mismatch"},
                                                   {"c", "missing_embedding"}}));
}

TEST(Synthetic, RandomAstRespectsOptions) {
  std::mt19937_64 rng(8);
  const RandomAstOptions options{.min_leaves = 3, .max_leaves = 9, .max_arity = 3};
  for (int k = 0; k < 200; ++k) {
    const Ast ast = random_ast(rng, options);
    EXPECT_NO_THROW(validate(ast));
    EXPECT_GE(leaf_count(ast), 3u);
    EXPECT_LE(leaf_count(ast), 9u);
  }
}

TEST(Synthetic, PlantedCorpusIsDeterministicAndOrthonormal) {
  PlantedOptions options;
  options.sizes = {5, 2, 2};
  const PlantedCorpus a = make_planted_corpus(options);
  const PlantedCorpus b = make_planted_corpus(options);
  ASSERT_EQ(a.samples.size(), 9u);
  EXPECT_EQ(a.basis, b.basis);
  EXPECT_LT((a.basis * a.basis.transpose() - Matrix<double>::Identity(16, 16)).norm(), 1e-12);
  for (std::size_t k = 0; k < a.samples.size(); ++k) EXPECT_EQ(a.samples[k].words, b.samples[k].words);

  options.noise_only = true;
  const PlantedCorpus noise = make_planted_corpus(options);
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    EXPECT_EQ(noise.samples[k].ast, a.samples[k].ast);
    EXPECT_EQ(noise.samples[k].words.rows(), a.samples[k].words.rows());
  }
}

TEST(Synthetic, WrittenCorpusLoadsBack) {
  const TempDir dir;
  PlantedOptions options;
  options.sizes = {4, 2, 2};
  const PlantedCorpus corpus = make_planted_corpus(options);
  const CorpusManifest manifest = write_planted_corpus(dir.path(), corpus, options);
  EXPECT_EQ(read_manifest(dir.path() / "manifest.jsonl"), manifest);
  const LoadedSplit test = load_split(manifest, dir.path(), "test", 0);
  ASSERT_EQ(test.samples.size(), 2u);
  EXPECT_TRUE(test.skipped.empty());
  EXPECT_EQ(test.samples[0].words, corpus.samples[4].words);
  EXPECT_EQ(test.samples[0].tuple, corpus.samples[4].tuple);
}

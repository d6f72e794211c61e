#include <gtest/gtest.h>

#include "astprobe/checkpoint.hpp"
#include "astprobe/corpus.hpp"
#include "astprobe/errors.hpp"
#include "astprobe/synthetic.hpp"
#include "astprobe/train.hpp"

using namespace astprobe;

namespace {

struct SmallCorpus {
  LabelVocab c_vocab, u_vocab;
  std::vector<TrainingSample> train, validation;
  ProbeShape shape;
};

SmallCorpus small_corpus(std::uint64_t seed = 1) {
  PlantedOptions options;
  options.sizes = {60, 0, 12};
  options.trees.max_leaves = 12;
  options.seed = seed;
  const PlantedCorpus corpus = make_planted_corpus(options);
  std::vector<LabeledTuple> tuples;
  for (const auto& s : corpus.samples) tuples.push_back(s.tuple);

  SmallCorpus out;
  // Vocabularies over all samples so no validation sample is dropped.
  std::tie(out.c_vocab, out.u_vocab) = build_vocabs(tuples);
  for (const auto& s : corpus.samples) {
    TrainingSample t{s.sample_id, s.words, encode_labels(s.tuple, out.c_vocab, out.u_vocab)};
    (s.split == kTrainSplit ? out.train : out.validation).push_back(std::move(t));
  }
  out.shape = {options.ambient_dim, options.planted_dim,
               static_cast<Eigen::Index>(out.c_vocab.size()),
               static_cast<Eigen::Index>(out.u_vocab.size())};
  return out;
}

}  // namespace

TEST(Train, ZeroEpochsKeepsInitialParameters) {
  const auto c = small_corpus();
  TrainConfig config;
  config.max_epochs = 0;
  config.seed = 17;
  const auto result = train(c.train, c.validation, c.shape, config);
  EXPECT_EQ(result.params, init_probe(c.shape.ambient_dim, c.shape.subspace_dim, c.shape.c_labels,
                                      c.shape.u_labels, 17)
                               .cast<float>());
  EXPECT_EQ(result.log.best_epoch, 0);
  EXPECT_TRUE(result.log.epochs.empty());
}

TEST(Train, ReducesValidationLossAndReturnsBestEpoch) {
  const auto c = small_corpus();
  TrainConfig config;
  config.lr = 1e-2;
  config.max_epochs = 15;
  const auto result = train(c.train, c.validation, c.shape, config);
  const auto init = init_probe(c.shape.ambient_dim, c.shape.subspace_dim, c.shape.c_labels,
                               c.shape.u_labels, config.seed)
                        .cast<float>();
  const double initial = dataset_loss(init, c.validation, config.lambda).total;
  EXPECT_LT(result.log.best_validation_loss, 0.7 * initial);
  EXPECT_GE(result.log.best_epoch, 1);
  EXPECT_NEAR(dataset_loss(result.params, c.validation, config.lambda).total,
              result.log.best_validation_loss, 1e-9);
  EXPECT_LT(orthogonality_penalty(result.params.basis), 1e-2f);
}

TEST(Train, ZeroPatienceStopsAtFirstStaleEpoch) {
  const auto c = small_corpus();
  TrainConfig config;
  config.lr = 0.5;  // large enough that some epoch fails to improve
  config.max_epochs = 40;
  config.patience = 0;
  const auto log = train(c.train, c.validation, c.shape, config).log;
  ASSERT_FALSE(log.epochs.empty());
  for (std::size_t k = 0; k + 1 < log.epochs.size(); ++k) EXPECT_TRUE(log.epochs[k].improved);
  EXPECT_FALSE(log.epochs.back().improved);
  EXPECT_EQ(log.stop_reason, "early_stopping");
}

TEST(Train, DecaysLearningRateAfterStaleEpoch) {
  const auto c = small_corpus();
  TrainConfig config;
  config.lr = 0.5;
  config.lr_decay = 0.25;
  config.max_epochs = 12;
  config.patience = 3;
  const auto log = train(c.train, c.validation, c.shape, config).log;
  for (std::size_t k = 0; k + 1 < log.epochs.size(); ++k) {
    const double expected = log.epochs[k].lr * (log.epochs[k].improved ? 1.0 : 0.25);
    EXPECT_DOUBLE_EQ(log.epochs[k + 1].lr, expected);
  }
}

TEST(Train, DeterministicAcrossThreadCounts) {
  const auto c = small_corpus();
  TrainConfig config;
  config.max_epochs = 3;
  config.seed = 5;
  const auto one = train(c.train, c.validation, c.shape, config);
  config.jobs = 3;
  const auto three = train(c.train, c.validation, c.shape, config);
  EXPECT_EQ(one.params, three.params);
  EXPECT_EQ(to_json(one.log), to_json(three.log));
}

TEST(Train, RejectsEmptySplitsAndBadConfig) {
  const auto c = small_corpus();
  EXPECT_THROW(train({}, c.validation, c.shape, {}), EmptyDataset);
  EXPECT_THROW(train(c.train, {}, c.shape, {}), EmptyDataset);
  TrainConfig bad;
  bad.batch_size = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Checkpoint, RoundTripsAndDetectsDamage) {
  const auto c = small_corpus();
  TrainConfig config;
  config.max_epochs = 2;
  const auto result = train(c.train, c.validation, c.shape, config);
  Checkpoint ck{result.params, c.c_vocab, c.u_vocab, result.log, {{"layer", 3}}};
  const auto bytes = encode_checkpoint(ck);
  const Checkpoint back = decode_checkpoint(bytes);
  EXPECT_EQ(back.params, ck.params);
  EXPECT_EQ(back.c_vocab, ck.c_vocab);
  EXPECT_EQ(back.u_vocab, ck.u_vocab);
  EXPECT_EQ(to_json(back.log), to_json(ck.log));
  EXPECT_EQ(back.meta, ck.meta);
  EXPECT_EQ(encode_checkpoint(back), bytes);

  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  EXPECT_THROW(decode_checkpoint(truncated), FormatError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad_magic), FormatError);
  auto bad_hash = bytes;
  bad_hash[24] ^= 1;  // first byte of the c vocabulary hash
  EXPECT_THROW(decode_checkpoint(bad_hash), FormatError);
}

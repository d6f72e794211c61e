#include <gtest/gtest.h>

#include <random>

#include "astprobe/errors.hpp"
#include "astprobe/predict.hpp"
#include "astprobe/probe.hpp"
#include "oracles.hpp"

using namespace astprobe;

TEST(InitProbe, BasisIsOrthonormal) {
  const auto p = init_probe(64, 16, 5, 7, 42);
  EXPECT_EQ(p.basis.rows(), 16);
  EXPECT_EQ(p.basis.cols(), 64);
  EXPECT_EQ(p.c_protos.rows(), 5);
  EXPECT_EQ(p.u_protos.rows(), 7);
  EXPECT_EQ(p.parameter_count(), 64 * 16 + 16 * (5 + 7));
  EXPECT_LT(orthogonality_penalty(p.basis), 1e-24);
  EXPECT_EQ(init_probe(64, 16, 5, 7, 42), p);
  EXPECT_FALSE(init_probe(64, 16, 5, 7, 43) == p);
}

TEST(InitProbe, SquareBasisHasUnitDeterminant) {
  const auto p = init_probe(8, 8, 1, 1, 1);
  const Eigen::MatrixXd b = p.basis;
  EXPECT_NEAR(std::abs(b.determinant()), 1.0, 1e-12);
}

TEST(InitProbe, RejectsBadDimensions) {
  EXPECT_THROW(init_probe(4, 5, 1, 1, 0), DimensionError);
  EXPECT_THROW(init_probe(4, 0, 1, 1, 0), DimensionError);
}

TEST(Forward, TwoDimensionalHandExample) {
  ProbeParams<double> p;
  p.basis = Matrix<double>::Identity(2, 2);
  p.c_protos = Matrix<double>::Zero(1, 2);
  p.u_protos = Matrix<double>::Zero(1, 2);
  Matrix<double> h(2, 2);
  h << 0, 0, 2, 0;
  const auto out = forward(p, h);
  ASSERT_EQ(out.distances.size(), 1);
  EXPECT_DOUBLE_EQ(out.distances(0), 4.0);
}

TEST(Forward, DistancesIgnoreTranslationAndOrthogonalComplement) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto p = init_probe(10, 4, 2, 2, 5);
  Matrix<double> h(6, 10);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = normal(rng);
  const auto base = forward(p, h).distances;

  Eigen::RowVectorXd shift(10);
  for (auto& x : shift) x = normal(rng);
  Matrix<double> shifted = h.rowwise() + shift;
  EXPECT_LT((forward(p, shifted).distances - base).cwiseAbs().maxCoeff(), 1e-10);

  Matrix<double> noise(6, 10);
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = normal(rng);
  noise -= (noise * p.basis.transpose()) * p.basis;  // orthogonal to every basis row
  Matrix<double> complement = h + noise;
  EXPECT_LT((forward(p, complement).distances - base).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Forward, FloatAgreesWithDouble) {
  std::mt19937_64 rng(4);
  const auto inst = oracle::random_instance(rng);
  const auto d = forward(inst.params, inst.words);
  const auto f = forward(inst.params.cast<float>(), Matrix<float>(inst.words.cast<float>()));
  EXPECT_LT((d.distances - f.distances.cast<double>()).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_LT((d.u_logits - f.u_logits.cast<double>()).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Loss, MatchesScalarOracle) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 100; ++k) {
    const auto inst = oracle::random_instance(rng);
    const auto got = loss(inst.params, inst.words, inst.gold, inst.lambda);
    const auto want = oracle::scalar_loss(inst.params, inst.words, inst.gold, inst.lambda);
    const double tol = 1e-10 * std::max(1.0, std::abs(want.total));
    ASSERT_NEAR(got.distance, want.distance, tol);
    ASSERT_NEAR(got.c_label, want.c_label, tol);
    ASSERT_NEAR(got.u_label, want.u_label, tol);
    ASSERT_NEAR(got.orthogonality, want.orthogonality, tol);
    ASSERT_NEAR(got.total, want.total, tol);
  }
}

TEST(Loss, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 25; ++k) {
    const auto inst = oracle::smooth_instance(rng);
    ASSERT_LT(oracle::max_gradient_error(inst), 1e-4);
  }
}

TEST(Loss, OrthogonalityGradient) {
  std::mt19937_64 rng(10);
  const auto inst = oracle::random_instance(rng);
  const Matrix<double>& b = inst.params.basis;
  Matrix<double> g = Matrix<double>::Zero(b.rows(), b.cols());
  const double penalty = add_orthogonality_grad(b, 2.0, g);
  const Matrix<double> gram = b * b.transpose() - Matrix<double>::Identity(b.rows(), b.rows());
  EXPECT_NEAR(penalty, gram.squaredNorm(), 1e-12);
  EXPECT_LT((g - 2.0 * 4.0 * gram * b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Loss, InputValidation) {
  const auto p = init_probe(3, 2, 2, 2, 0);
  GoldTuple gold{{}, {}, {0}, 0};
  EXPECT_THROW(loss(p, Matrix<double>(Matrix<double>::Zero(1, 3)), gold, 1.0), DegenerateSequence);

  GoldTuple ok{{1}, {1}, {0, 1}, 1};
  EXPECT_NO_THROW(loss(p, Matrix<double>(Matrix<double>::Zero(2, 3)), ok, 1.0));
  EXPECT_THROW(loss(p, Matrix<double>(Matrix<double>::Zero(3, 3)), ok, 1.0), LengthMismatch);
  EXPECT_THROW(loss(p, Matrix<double>(Matrix<double>::Zero(2, 4)), ok, 1.0), DimensionError);
  GoldTuple unknown{{1}, {2}, {0, 1}, 1};
  EXPECT_THROW(loss(p, Matrix<double>(Matrix<double>::Zero(2, 3)), unknown, 1.0), UnknownLabel);
}

TEST(Predict, LeftmostArgmaxBreaksTies) {
  Eigen::RowVectorXd row(4);
  row << 1, 3, 3, 2;
  EXPECT_EQ(leftmost_argmax(row), 1);
}

TEST(Predict, ReadsDistancesAndLabelsFromGeometry) {
  LabelVocab c_vocab = LabelVocab::from_labels(std::vector<std::string>{std::string(kNullLabel)});
  LabelVocab u_vocab =
      LabelVocab::from_labels(std::vector<std::string>{std::string(kNullLabel), "break_statement"});
  ProbeParams<double> p;
  p.basis = Matrix<double>::Identity(3, 3);
  p.c_protos = Matrix<double>::Zero(1, 3);
  p.u_protos.resize(2, 3);
  p.u_protos << 0, 0, 0.5,  //
      0, 0, 1;
  // Coordinates 0 and 1 carry a walk with squared steps 2, 1, 3; coordinate
  // 2 flags the unary label of the last word.
  Matrix<double> h(4, 3);
  h << 0, 0, -1,                                   //
      -std::sqrt(2.0), 0, -1,                      //
      -std::sqrt(2.0), -1, -1,                     //
      -std::sqrt(2.0) - std::sqrt(3.0), -1, 1;
  const TupleDCU t = predict_tuple(p, h);
  ASSERT_EQ(t.d.size(), 3u);
  EXPECT_NEAR(t.d[0], 2.0, 1e-12);
  EXPECT_NEAR(t.d[1], 1.0, 1e-12);
  EXPECT_NEAR(t.d[2], 3.0 + 4.0, 1e-12);
  EXPECT_EQ(t.u, (std::vector<LabelId>{0, 0, 0, 1}));

  const std::vector<std::string> tokens{"selected", "=", "element", "break"};
  const Ast ast = predict_ast(p, h, c_vocab, u_vocab, tokens);
  EXPECT_EQ(leaf_texts(ast), tokens);
  EXPECT_THROW(predict_ast(p, h, u_vocab, u_vocab, tokens), DimensionError);
}

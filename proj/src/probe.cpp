#include "astprobe/probe.hpp"

#include <cmath>
#include <random>
#include <string>

#include "astprobe/errors.hpp"

namespace astprobe {

namespace {

template <typename T>
void check_words(const ProbeParams<T>& params, const Matrix<T>& words) {
  if (words.cols() != params.ambient_dim()) {
    throw DimensionError("word vectors have dimension " + std::to_string(words.cols()) +
                         ", probe expects " + std::to_string(params.ambient_dim()));
  }
  if (words.rows() == 0) throw DimensionError("empty token sequence");
}

template <typename T>
void check_gold(const ProbeParams<T>& params, const Matrix<T>& words, const GoldTuple& gold) {
  check_words(params, words);
  const auto tokens = static_cast<std::size_t>(words.rows());
  if (tokens < 2) throw DegenerateSequence("sequence has a single token and no gaps");
  if (gold.distances.size() != tokens - 1 || gold.c.size() != tokens - 1 ||
      gold.u.size() != tokens) {
    throw LengthMismatch("gold tuple does not match " + std::to_string(tokens) + " tokens");
  }
  for (LabelId id : gold.c) {
    if (id < 0 || id >= params.c_protos.rows()) throw UnknownLabel("c label id out of range");
  }
  for (LabelId id : gold.u) {
    if (id < 0 || id >= params.u_protos.rows()) throw UnknownLabel("u label id out of range");
  }
}

// Mean softmax cross-entropy of `logits` rows against `targets`. When
// `dlogits` is given it receives d(mean CE)/d(logits).
template <typename T>
T cross_entropy(const Matrix<T>& logits, const std::vector<LabelId>& targets,
                Matrix<T>* dlogits) {
  const auto rows = logits.rows();
  T total = 0;
  if (dlogits) dlogits->resize(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < rows; ++i) {
    const T peak = logits.row(i).maxCoeff();
    const Eigen::Array<T, 1, Eigen::Dynamic> shifted = (logits.row(i).array() - peak).exp();
    const T norm = shifted.sum();
    total += std::log(norm) + peak - logits(i, targets[static_cast<std::size_t>(i)]);
    if (dlogits) {
      dlogits->row(i) = shifted / norm;
      (*dlogits)(i, targets[static_cast<std::size_t>(i)]) -= T(1);
    }
  }
  if (dlogits) *dlogits /= static_cast<T>(rows);
  return total / static_cast<T>(rows);
}

// Pairwise margin-1 hinge on predicted distances. `ddist` receives the
// subgradient when non-null.
template <typename T>
T ranking_hinge(const Vector<T>& dist, const std::vector<int>& gold, Vector<T>* ddist) {
  const auto n = static_cast<Eigen::Index>(gold.size());
  if (ddist) ddist->setZero(n);
  T total = 0;
  std::size_t pairs = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const int diff = gold[static_cast<std::size_t>(i)] - gold[static_cast<std::size_t>(j)];
      if (diff == 0) continue;
      ++pairs;
      const T s = diff > 0 ? T(1) : T(-1);
      const T margin = T(1) - s * (dist(i) - dist(j));
      if (margin > 0) {
        total += margin;
        if (ddist) {
          (*ddist)(i) -= s;
          (*ddist)(j) += s;
        }
      }
    }
  }
  if (pairs == 0) return 0;
  if (ddist) *ddist /= static_cast<T>(pairs);
  return total / static_cast<T>(pairs);
}

}  // namespace

template <typename T>
ProbeGradient<T> ProbeGradient<T>::zeros_like(const ProbeParams<T>& params) {
  return {Matrix<T>::Zero(params.basis.rows(), params.basis.cols()),
          Matrix<T>::Zero(params.c_protos.rows(), params.c_protos.cols()),
          Matrix<T>::Zero(params.u_protos.rows(), params.u_protos.cols())};
}

template <typename T>
ProbeGradient<T>& ProbeGradient<T>::operator+=(const ProbeGradient& other) {
  basis += other.basis;
  c_protos += other.c_protos;
  u_protos += other.u_protos;
  return *this;
}

template <typename T>
ProbeGradient<T>& ProbeGradient<T>::operator*=(T factor) {
  basis *= factor;
  c_protos *= factor;
  u_protos *= factor;
  return *this;
}

ProbeParams<double> init_probe(Eigen::Index m1, Eigen::Index m2, Eigen::Index n_c_labels,
                               Eigen::Index n_u_labels, std::uint64_t seed) {
  if (m2 < 1 || m2 > m1) {
    throw DimensionError("subspace dimension " + std::to_string(m2) +
                         " must lie in [1, " + std::to_string(m1) + "]");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::MatrixXd draw(m1, m2);
  for (Eigen::Index j = 0; j < m2; ++j)
    for (Eigen::Index i = 0; i < m1; ++i) draw(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(draw);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m1, m2);

  ProbeParams<double> params;
  params.basis = q.transpose();
  const double scale = 1.0 / std::sqrt(static_cast<double>(m2));
  params.c_protos.resize(n_c_labels, m2);
  for (Eigen::Index i = 0; i < params.c_protos.size(); ++i)
    params.c_protos.data()[i] = scale * normal(rng);
  params.u_protos.resize(n_u_labels, m2);
  for (Eigen::Index i = 0; i < params.u_protos.size(); ++i)
    params.u_protos.data()[i] = scale * normal(rng);
  return params;
}

template <typename T>
Matrix<T> project(const ProbeParams<T>& params, const Matrix<T>& words) {
  check_words(params, words);
  return words * params.basis.transpose();
}

template <typename T>
ProbeOutput<T> forward(const ProbeParams<T>& params, const Matrix<T>& words) {
  const Matrix<T> coords = project(params, words);
  const auto gaps = coords.rows() - 1;
  const Matrix<T> diffs = coords.topRows(gaps) - coords.bottomRows(gaps);
  ProbeOutput<T> out;
  out.distances = diffs.rowwise().squaredNorm();
  out.c_logits = diffs * params.c_protos.transpose();
  out.u_logits = coords * params.u_protos.transpose();
  return out;
}

template <typename T>
T orthogonality_penalty(const Matrix<T>& basis) {
  Matrix<T> gram = basis * basis.transpose();
  gram.diagonal().array() -= T(1);
  return gram.squaredNorm();
}

template <typename T>
T add_orthogonality_grad(const Matrix<T>& basis, T lambda, Matrix<T>& grad_basis) {
  Matrix<T> gram = basis * basis.transpose();
  gram.diagonal().array() -= T(1);
  grad_basis.noalias() += (T(4) * lambda) * (gram * basis);
  return gram.squaredNorm();
}

template <typename T>
LossBreakdown<T> sequence_loss_and_grad(const ProbeParams<T>& params, const Matrix<T>& words,
                                        const GoldTuple& gold, ProbeGradient<T>* grad) {
  check_gold(params, words, gold);
  const Matrix<T> coords = words * params.basis.transpose();
  const auto gaps = coords.rows() - 1;
  const Matrix<T> diffs = coords.topRows(gaps) - coords.bottomRows(gaps);
  const Vector<T> dist = diffs.rowwise().squaredNorm();
  const Matrix<T> c_logits = diffs * params.c_protos.transpose();
  const Matrix<T> u_logits = coords * params.u_protos.transpose();

  LossBreakdown<T> out;
  if (!grad) {
    out.distance = ranking_hinge<T>(dist, gold.distances, nullptr);
    out.c_label = cross_entropy<T>(c_logits, gold.c, nullptr);
    out.u_label = cross_entropy<T>(u_logits, gold.u, nullptr);
    out.total = out.distance + out.c_label + out.u_label;
    return out;
  }

  Vector<T> ddist;
  Matrix<T> dc_logits, du_logits;
  out.distance = ranking_hinge<T>(dist, gold.distances, &ddist);
  out.c_label = cross_entropy<T>(c_logits, gold.c, &dc_logits);
  out.u_label = cross_entropy<T>(u_logits, gold.u, &du_logits);
  out.total = out.distance + out.c_label + out.u_label;

  const Vector<T> scale = T(2) * ddist;
  Matrix<T> ddiffs = scale.asDiagonal() * diffs;
  ddiffs.noalias() += dc_logits * params.c_protos;
  Matrix<T> dcoords = du_logits * params.u_protos;
  dcoords.topRows(gaps) += ddiffs;
  dcoords.bottomRows(gaps) -= ddiffs;

  grad->c_protos.noalias() = dc_logits.transpose() * diffs;
  grad->u_protos.noalias() = du_logits.transpose() * coords;
  grad->basis.noalias() = dcoords.transpose() * words;
  return out;
}

template <typename T>
LossBreakdown<T> loss(const ProbeParams<T>& params, const Matrix<T>& words,
                      const GoldTuple& gold, T lambda) {
  auto out = sequence_loss_and_grad<T>(params, words, gold, nullptr);
  out.orthogonality = orthogonality_penalty<T>(params.basis);
  out.total += lambda * out.orthogonality;
  return out;
}

template <typename T>
LossBreakdown<T> loss_and_grad(const ProbeParams<T>& params, const Matrix<T>& words,
                               const GoldTuple& gold, T lambda, ProbeGradient<T>& grad) {
  auto out = sequence_loss_and_grad<T>(params, words, gold, &grad);
  out.orthogonality = add_orthogonality_grad<T>(params.basis, lambda, grad.basis);
  out.total += lambda * out.orthogonality;
  return out;
}

template <typename T>
ProbeGradient<T> grad(const ProbeParams<T>& params, const Matrix<T>& words,
                      const GoldTuple& gold, T lambda) {
  auto g = ProbeGradient<T>::zeros_like(params);
  loss_and_grad<T>(params, words, gold, lambda, g);
  return g;
}

#define ASTPROBE_INSTANTIATE(T)                                                              \
  template struct ProbeGradient<T>;                                                          \
  template Matrix<T> project<T>(const ProbeParams<T>&, const Matrix<T>&);                    \
  template ProbeOutput<T> forward<T>(const ProbeParams<T>&, const Matrix<T>&);               \
  template T orthogonality_penalty<T>(const Matrix<T>&);                                     \
  template T add_orthogonality_grad<T>(const Matrix<T>&, T, Matrix<T>&);                     \
  template LossBreakdown<T> sequence_loss_and_grad<T>(const ProbeParams<T>&,                 \
                                                      const Matrix<T>&, const GoldTuple&,    \
                                                      ProbeGradient<T>*);                    \
  template LossBreakdown<T> loss<T>(const ProbeParams<T>&, const Matrix<T>&,                 \
                                    const GoldTuple&, T);                                    \
  template LossBreakdown<T> loss_and_grad<T>(const ProbeParams<T>&, const Matrix<T>&,        \
                                             const GoldTuple&, T, ProbeGradient<T>&);        \
  template ProbeGradient<T> grad<T>(const ProbeParams<T>&, const Matrix<T>&,                 \
                                    const GoldTuple&, T);

ASTPROBE_INSTANTIATE(float)
ASTPROBE_INSTANTIATE(double)

#undef ASTPROBE_INSTANTIATE

}  // namespace astprobe

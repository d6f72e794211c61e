#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "astprobe/tuple_codec.hpp"

namespace astprobe {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// Learned probe. `basis` (m2 x m1) has rows spanning the syntactic subspace;
/// label prototypes are stored in basis coordinates, one row per label id.
template <typename T>
struct ProbeParams {
  Matrix<T> basis;
  Matrix<T> c_protos;  // |C| x m2
  Matrix<T> u_protos;  // |U| x m2

  Eigen::Index ambient_dim() const { return basis.cols(); }
  Eigen::Index subspace_dim() const { return basis.rows(); }
  /// m1*m2 + m2*(|C| + |U|)
  Eigen::Index parameter_count() const {
    return basis.size() + c_protos.size() + u_protos.size();
  }

  template <typename U>
  ProbeParams<U> cast() const {
    return {basis.template cast<U>(), c_protos.template cast<U>(), u_protos.template cast<U>()};
  }

  bool operator==(const ProbeParams& other) const {
    return basis == other.basis && c_protos == other.c_protos && u_protos == other.u_protos;
  }
};

template <typename T>
struct ProbeOutput {
  Vector<T> distances;  // n entries: ||B h_{i-1} - B h_i||^2
  Matrix<T> c_logits;   // n x |C|
  Matrix<T> u_logits;   // (n+1) x |U|
};

template <typename T>
struct LossBreakdown {
  T distance = 0;       // pairwise ranking hinge
  T c_label = 0;        // softmax cross-entropy on gap labels
  T u_label = 0;        // softmax cross-entropy on unary labels
  T orthogonality = 0;  // ||B B^T - I||_F^2, before weighting
  T total = 0;          // distance + c_label + u_label + lambda * orthogonality
};

template <typename T>
struct ProbeGradient {
  Matrix<T> basis;
  Matrix<T> c_protos;
  Matrix<T> u_protos;

  static ProbeGradient zeros_like(const ProbeParams<T>& params);
  ProbeGradient& operator+=(const ProbeGradient& other);
  ProbeGradient& operator*=(T factor);
};

/// Random probe: basis rows are an exact orthonormalization of a Gaussian
/// draw, prototypes are i.i.d. N(0, 1/m2). Deterministic in `seed`.
/// Throws DimensionError unless 1 <= m2 <= m1.
ProbeParams<double> init_probe(Eigen::Index m1, Eigen::Index m2, Eigen::Index n_c_labels,
                               Eigen::Index n_u_labels, std::uint64_t seed);

/// Rows of `words` (n+1 x m1) mapped to basis coordinates (n+1 x m2).
template <typename T>
Matrix<T> project(const ProbeParams<T>& params, const Matrix<T>& words);

template <typename T>
ProbeOutput<T> forward(const ProbeParams<T>& params, const Matrix<T>& words);

template <typename T>
T orthogonality_penalty(const Matrix<T>& basis);

/// Per-sequence terms are means over the sequence's pairs, gaps or tokens.
/// Pairs with tied gold distance are skipped; a sequence without untied
/// pairs has a zero ranking term.
template <typename T>
LossBreakdown<T> loss(const ProbeParams<T>& params, const Matrix<T>& words,
                      const GoldTuple& gold, T lambda);

/// Loss plus exact gradient with respect to every parameter. The hinge uses
/// subgradient 0 at its kink.
template <typename T>
LossBreakdown<T> loss_and_grad(const ProbeParams<T>& params, const Matrix<T>& words,
                               const GoldTuple& gold, T lambda, ProbeGradient<T>& grad);

template <typename T>
ProbeGradient<T> grad(const ProbeParams<T>& params, const Matrix<T>& words,
                      const GoldTuple& gold, T lambda);

/// Sequence terms only (orthogonality left at 0); `grad` is overwritten.
/// Used to evaluate a mini-batch and add the regularizer once.
template <typename T>
LossBreakdown<T> sequence_loss_and_grad(const ProbeParams<T>& params, const Matrix<T>& words,
                                        const GoldTuple& gold, ProbeGradient<T>* grad);

/// Adds lambda * d||BB^T - I||^2/dB to `grad_basis`; returns the penalty.
template <typename T>
T add_orthogonality_grad(const Matrix<T>& basis, T lambda, Matrix<T>& grad_basis);

}  // namespace astprobe

// Reference implementations shared by the unit and acceptance tests. They
// are written with plain loops and share no code with the library's
// vectorized paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "astprobe/probe.hpp"
#include "astprobe/synthetic.hpp"
#include "astprobe/tuple_codec.hpp"

namespace oracle {

using astprobe::GoldTuple;
using astprobe::Matrix;
using astprobe::ProbeParams;

struct ScalarLoss {
  double distance = 0, c_label = 0, u_label = 0, orthogonality = 0, total = 0;
  double min_kink_distance = std::numeric_limits<double>::infinity();
};

inline double cross_entropy(const std::vector<double>& logits, int gold) {
  double top = logits[0];
  for (double z : logits) top = std::max(top, z);
  double sum = 0;
  for (double z : logits) sum += std::exp(z - top);
  return top + std::log(sum) - logits[static_cast<std::size_t>(gold)];
}

inline ScalarLoss scalar_loss(const ProbeParams<double>& p, const Matrix<double>& h,
                              const GoldTuple& gold, double lambda) {
  const auto m1 = p.basis.cols(), m2 = p.basis.rows();
  const auto tokens = h.rows();
  std::vector<std::vector<double>> proj(tokens, std::vector<double>(m2, 0.0));
  for (Eigen::Index t = 0; t < tokens; ++t)
    for (Eigen::Index k = 0; k < m2; ++k)
      for (Eigen::Index j = 0; j < m1; ++j) proj[t][k] += p.basis(k, j) * h(t, j);

  const std::size_t n = gold.distances.size();
  std::vector<std::vector<double>> gap(n, std::vector<double>(m2));
  std::vector<double> dist(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < m2; ++k) {
      gap[i][k] = proj[i][k] - proj[i + 1][k];
      dist[i] += gap[i][k] * gap[i][k];
    }
  }

  ScalarLoss out;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (gold.distances[i] == gold.distances[j]) continue;
      const double s = gold.distances[i] > gold.distances[j] ? 1.0 : -1.0;
      const double margin = 1.0 - s * (dist[i] - dist[j]);
      out.distance += std::max(0.0, margin);
      out.min_kink_distance = std::min(out.min_kink_distance, std::abs(margin));
      ++pairs;
    }
  }
  if (pairs > 0) out.distance /= static_cast<double>(pairs);

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> logits(static_cast<std::size_t>(p.c_protos.rows()), 0.0);
    for (Eigen::Index l = 0; l < p.c_protos.rows(); ++l)
      for (Eigen::Index k = 0; k < m2; ++k) logits[l] += gap[i][k] * p.c_protos(l, k);
    out.c_label += cross_entropy(logits, gold.c[i]);
  }
  if (n > 0) out.c_label /= static_cast<double>(n);

  for (Eigen::Index t = 0; t < tokens; ++t) {
    std::vector<double> logits(static_cast<std::size_t>(p.u_protos.rows()), 0.0);
    for (Eigen::Index l = 0; l < p.u_protos.rows(); ++l)
      for (Eigen::Index k = 0; k < m2; ++k) logits[l] += proj[t][k] * p.u_protos(l, k);
    out.u_label += cross_entropy(logits, gold.u[static_cast<std::size_t>(t)]);
  }
  out.u_label /= static_cast<double>(tokens);

  for (Eigen::Index a = 0; a < m2; ++a) {
    for (Eigen::Index b = 0; b < m2; ++b) {
      double dot = 0;
      for (Eigen::Index j = 0; j < m1; ++j) dot += p.basis(a, j) * p.basis(b, j);
      const double e = dot - (a == b ? 1.0 : 0.0);
      out.orthogonality += e * e;
    }
  }
  out.total = out.distance + out.c_label + out.u_label + lambda * out.orthogonality;
  return out;
}

struct Instance {
  ProbeParams<double> params;
  Matrix<double> words;
  GoldTuple gold;
  double lambda = 5.0;
};

/// Small random problem: gold distances come from a random binary tree, the
/// basis is an orthonormal draw plus a perturbation so every loss term is
/// active.
inline Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 1 << 20);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index m1 = 2 + pick(rng) % 5;
  const Eigen::Index m2 = 1 + pick(rng) % m1;
  const Eigen::Index n_c = 1 + pick(rng) % 4, n_u = 1 + pick(rng) % 4;
  const std::size_t tokens = 2 + static_cast<std::size_t>(pick(rng) % 6);

  Instance inst;
  inst.params = astprobe::init_probe(m1, m2, n_c, n_u, rng());
  for (Eigen::Index i = 0; i < inst.params.basis.size(); ++i)
    inst.params.basis.data()[i] += 0.2 * normal(rng);
  inst.words.resize(static_cast<Eigen::Index>(tokens), m1);
  for (Eigen::Index i = 0; i < inst.words.size(); ++i) inst.words.data()[i] = 0.5 * normal(rng);

  const auto tree = astprobe::random_binary_tree(rng, tokens, {"x"});
  inst.gold.distances = astprobe::tree_to_labels(tree).distances;
  for (std::size_t i = 0; i + 1 < tokens; ++i) inst.gold.c.push_back(pick(rng) % n_c);
  for (std::size_t i = 0; i < tokens; ++i) inst.gold.u.push_back(pick(rng) % n_u);
  return inst;
}

/// Largest relative error between the analytic gradient and central
/// differences of the scalar reference loss. Errors are relative to
/// max(|analytic|, |numeric|, floor).
inline double max_gradient_error(const Instance& inst, double eps = 1e-5, double floor = 1e-3) {
  astprobe::ProbeGradient<double> analytic;
  analytic = astprobe::grad(inst.params, inst.words, inst.gold, inst.lambda);
  double worst = 0;
  auto check = [&](Matrix<double> ProbeParams<double>::*block,
                   Matrix<double> astprobe::ProbeGradient<double>::*gblock) {
    const Matrix<double>& g = analytic.*gblock;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      ProbeParams<double> plus = inst.params, minus = inst.params;
      (plus.*block).data()[i] += eps;
      (minus.*block).data()[i] -= eps;
      const double numeric = (scalar_loss(plus, inst.words, inst.gold, inst.lambda).total -
                              scalar_loss(minus, inst.words, inst.gold, inst.lambda).total) /
                             (2 * eps);
      const double a = g.data()[i];
      worst = std::max(worst, std::abs(a - numeric) /
                                  std::max({std::abs(a), std::abs(numeric), floor}));
    }
  };
  check(&ProbeParams<double>::basis, &astprobe::ProbeGradient<double>::basis);
  check(&ProbeParams<double>::c_protos, &astprobe::ProbeGradient<double>::c_protos);
  check(&ProbeParams<double>::u_protos, &astprobe::ProbeGradient<double>::u_protos);
  return worst;
}

/// Redraws until every hinge margin is far enough from its kink for a
/// central difference of width `eps` to stay on one side.
inline Instance smooth_instance(std::mt19937_64& rng, double eps = 1e-5) {
  for (;;) {
    Instance inst = random_instance(rng);
    const auto ref = scalar_loss(inst.params, inst.words, inst.gold, inst.lambda);
    if (ref.min_kink_distance > 1e3 * eps) return inst;
  }
}

}  // namespace oracle

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "astprobe/ast.hpp"
#include "astprobe/binary_tree.hpp"
#include "astprobe/corpus.hpp"
#include "astprobe/probe.hpp"
#include "astprobe/tuple_codec.hpp"

namespace astprobe {

struct RandomAstOptions {
  std::size_t min_leaves = 1;
  std::size_t max_leaves = 50;
  std::size_t max_arity = 6;
  double unary_prob = 0.25;  // chance of wrapping a node in an extra unary parent
  std::vector<std::string> labels = {"module", "block", "call", "expr",   "stmt",
                                     "args",   "binop", "assign", "return", "if"};
};

/// Random rose tree whose non-terminal labels come from options.labels.
/// Terminals are named t0, t1, ... in leaf order.
Ast random_ast(std::mt19937_64& rng, const RandomAstOptions& options);

/// Random strictly binary tree with `leaves` leaves; internal labels and unary
/// labels are drawn from `labels` plus the null label.
BinaryTree random_binary_tree(std::mt19937_64& rng, std::size_t leaves,
                              const std::vector<std::string>& labels);

/// Synthetic corpus whose word vectors carry an exact geometric encoding of
/// each tree's (d, c, u) inside a hidden `planted_dim`-dimensional subspace:
///
///   s_i   = [ r * dir_u(u_i) ; w_i ],   w_i = w_{i-1} - sqrt(scale * d_i) * dir_c(c_i)
///   h_i   = Q^T s_i + noise orthogonal to the rows of Q
///
/// dir_u / dir_c are fixed random unit vectors per label, in the first
/// `unary_dims` and the remaining coordinates respectively.
struct PlantedOptions {
  Eigen::Index ambient_dim = 64;
  Eigen::Index planted_dim = 16;
  Eigen::Index unary_dims = 8;
  double noise_sigma = 0.1;
  double unary_radius = 1.0;
  double distance_scale = 6.0;
  SplitSizes sizes{600, 100, 100};
  RandomAstOptions trees{.min_leaves = 2,
                         .max_leaves = 30,
                         .max_arity = 6,
                         .unary_prob = 0.1,
                         .labels = {"block", "call", "expr", "stmt", "args", "if"}};
  std::uint64_t seed = 7;
  /// Drop the planted signal: every word vector becomes i.i.d. N(0, noise_sigma^2)
  /// noise over all m1 coordinates (the baseline run).
  bool noise_only = false;
};

struct PlantedSample {
  std::string sample_id;
  std::string split;
  Ast ast;
  LabeledTuple tuple;
  Matrix<float> words;
};

struct PlantedCorpus {
  Matrix<double> basis;  // planted_dim x ambient_dim, orthonormal rows
  std::vector<PlantedSample> samples;
};

PlantedCorpus make_planted_corpus(const PlantedOptions& options);

/// Writes manifest.jsonl, tuples/<id>.json and embeddings/<id>.astp (layer 0)
/// under `dir`.
CorpusManifest write_planted_corpus(const std::filesystem::path& dir, const PlantedCorpus& corpus,
                                    const PlantedOptions& options);

}  // namespace astprobe

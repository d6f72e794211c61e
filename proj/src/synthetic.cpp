#include "astprobe/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "astprobe/binarize.hpp"
#include "astprobe/embedding_io.hpp"
#include "astprobe/errors.hpp"

namespace fs = std::filesystem;

namespace astprobe {

namespace {

const std::string& pick(std::mt19937_64& rng, const std::vector<std::string>& labels) {
  std::uniform_int_distribution<std::size_t> dist(0, labels.size() - 1);
  return labels[dist(rng)];
}

bool coin(std::mt19937_64& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

class AstBuilder {
 public:
  AstBuilder(std::mt19937_64& rng, const RandomAstOptions& options) : rng_(rng), opt_(options) {}

  AstNode build(std::size_t leaves) {
    if (leaves == 1) {
      AstNode node = AstNode::terminal(next_leaf_, "t" + std::to_string(next_leaf_));
      ++next_leaf_;
      for (int depth = 0; depth < 2 && coin(rng_, opt_.unary_prob); ++depth) node = wrap(std::move(node));
      return node;
    }
    const std::size_t max_arity = std::min(opt_.max_arity, leaves);
    const std::size_t arity = std::uniform_int_distribution<std::size_t>(2, max_arity)(rng_);
    // arity - 1 distinct cut points in 1..leaves-1
    std::vector<std::size_t> cuts(leaves - 1);
    for (std::size_t i = 0; i < cuts.size(); ++i) cuts[i] = i + 1;
    std::shuffle(cuts.begin(), cuts.end(), rng_);
    cuts.resize(arity - 1);
    std::sort(cuts.begin(), cuts.end());
    std::vector<AstNode> children;
    std::size_t prev = 0;
    for (std::size_t cut : cuts) {
      children.push_back(build(cut - prev));
      prev = cut;
    }
    children.push_back(build(leaves - prev));
    AstNode node = AstNode::nonterminal(pick(rng_, opt_.labels), std::move(children));
    if (coin(rng_, opt_.unary_prob)) node = wrap(std::move(node));
    return node;
  }

 private:
  AstNode wrap(AstNode child) {
    std::vector<AstNode> single;
    single.push_back(std::move(child));
    return AstNode::nonterminal(pick(rng_, opt_.labels), std::move(single));
  }

  std::mt19937_64& rng_;
  const RandomAstOptions& opt_;
  std::size_t next_leaf_ = 0;
};

BtNode random_bt(std::mt19937_64& rng, std::size_t first, std::size_t leaves,
                 const std::vector<std::string>& labels) {
  auto label = [&] { return coin(rng, 0.3) ? std::string(kNullLabel) : pick(rng, labels); };
  if (leaves == 1) return BtNode::leaf(first, "t" + std::to_string(first), label());
  const std::size_t left = std::uniform_int_distribution<std::size_t>(1, leaves - 1)(rng);
  std::string node_label = label();
  BtNode l = random_bt(rng, first, left, labels);
  BtNode r = random_bt(rng, first + left, leaves - left, labels);
  return BtNode::internal(std::move(node_label), std::move(l), std::move(r));
}

// Fixed random unit vector for a label, deterministic in (seed, salt, label).
Vector<double> label_direction(std::string_view label, std::uint64_t seed, std::uint64_t salt,
                               Eigen::Index dims) {
  std::mt19937_64 rng(seed ^ fnv1a64(label) ^ salt);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector<double> v(dims);
  for (Eigen::Index i = 0; i < dims; ++i) v(i) = normal(rng);
  return v.normalized();
}

Matrix<double> random_orthonormal_rows(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd draw(cols, rows);
  for (Eigen::Index j = 0; j < rows; ++j)
    for (Eigen::Index i = 0; i < cols; ++i) draw(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(draw);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(cols, rows);
  return q.transpose();
}

std::string sample_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%05zu", k);
  return buf;
}

}  // namespace

Ast random_ast(std::mt19937_64& rng, const RandomAstOptions& options) {
  if (options.labels.empty() || options.min_leaves < 1 || options.max_leaves < options.min_leaves ||
      options.max_arity < 2) {
    throw std::invalid_argument("invalid random AST options");
  }
  const std::size_t leaves =
      std::uniform_int_distribution<std::size_t>(options.min_leaves, options.max_leaves)(rng);
  AstBuilder builder(rng, options);
  return Ast{builder.build(leaves)};
}

BinaryTree random_binary_tree(std::mt19937_64& rng, std::size_t leaves,
                              const std::vector<std::string>& labels) {
  if (leaves == 0 || labels.empty()) throw std::invalid_argument("invalid random tree options");
  return BinaryTree{random_bt(rng, 0, leaves, labels)};
}

PlantedCorpus make_planted_corpus(const PlantedOptions& o) {
  if (o.planted_dim > o.ambient_dim || o.unary_dims < 1 || o.unary_dims >= o.planted_dim) {
    throw DimensionError("invalid planted corpus dimensions");
  }
  std::mt19937_64 tree_rng(o.seed);
  std::mt19937_64 noise_rng(o.seed + 1);
  std::mt19937_64 basis_rng(o.seed + 2);
  std::normal_distribution<double> normal(0.0, 1.0);

  PlantedCorpus corpus;
  corpus.basis = random_orthonormal_rows(basis_rng, o.planted_dim, o.ambient_dim);
  const Eigen::Index walk_dims = o.planted_dim - o.unary_dims;

  const std::size_t total = o.sizes.total();
  for (std::size_t k = 0; k < total; ++k) {
    PlantedSample sample;
    sample.sample_id = sample_name(k);
    sample.split = std::string(k < o.sizes.train                  ? kTrainSplit
                               : k < o.sizes.train + o.sizes.test ? kTestSplit
                                                                  : kValidationSplit);
    sample.ast = random_ast(tree_rng, o.trees);
    sample.tuple = tree_to_labels(binarize(sample.ast));

    const auto tokens = static_cast<Eigen::Index>(sample.tuple.u.size());
    Matrix<double> words(tokens, o.ambient_dim);
    if (o.noise_only) {
      for (Eigen::Index i = 0; i < words.size(); ++i) words.data()[i] = o.noise_sigma * normal(noise_rng);
    } else {
      Matrix<double> coords = Matrix<double>::Zero(tokens, o.planted_dim);
      Vector<double> walk = Vector<double>::Zero(walk_dims);
      for (Eigen::Index i = 0; i < tokens; ++i) {
        if (i > 0) {
          const auto gap = static_cast<std::size_t>(i - 1);
          const double length = std::sqrt(o.distance_scale * sample.tuple.distances[gap]);
          walk -= length * label_direction(sample.tuple.c[gap], o.seed, 0xc0ffeeULL, walk_dims);
        }
        coords.row(i).head(o.unary_dims) =
            o.unary_radius *
            label_direction(sample.tuple.u[static_cast<std::size_t>(i)], o.seed, 0xbeefULL,
                            o.unary_dims)
                .transpose();
        coords.row(i).tail(walk_dims) = walk.transpose();
      }
      Matrix<double> noise(tokens, o.ambient_dim);
      for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = o.noise_sigma * normal(noise_rng);
      noise -= (noise * corpus.basis.transpose()) * corpus.basis;
      words = coords * corpus.basis + noise;
    }
    sample.words = words.cast<float>();
    corpus.samples.push_back(std::move(sample));
  }
  return corpus;
}

CorpusManifest write_planted_corpus(const fs::path& dir, const PlantedCorpus& corpus,
                                    const PlantedOptions& options) {
  CorpusManifest manifest;
  manifest.language = "synthetic";
  manifest.sizes = options.sizes;
  manifest.seed = options.seed;
  for (const auto& s : corpus.samples) {
    ManifestEntry e;
    e.sample_id = s.sample_id;
    e.split = s.split;
    e.tuples = "tuples/" + s.sample_id + ".json";
    e.embedding = "embeddings/" + s.sample_id + ".astp";
    e.ast_fingerprint = fingerprint(s.ast);
    e.n_tokens = s.tuple.tokens.size();
    write_sidecar(dir / e.tuples, Sidecar{s.sample_id, s.tuple, {}});
    write_embeddings(dir / e.embedding, word_level_record(s.sample_id, 0, s.words));
    manifest.samples.push_back(std::move(e));
  }
  write_manifest(dir / "manifest.jsonl", manifest);
  return manifest;
}

}  // namespace astprobe

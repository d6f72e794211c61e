#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "astprobe/corpus.hpp"
#include "astprobe/eval.hpp"
#include "astprobe/label_vocab.hpp"
#include "astprobe/probe.hpp"
#include "astprobe/train.hpp"

namespace astprobe {

/// Process exit codes shared by every command.
enum class ExitStatus : int { kSuccess = 0, kPartial = 1, kFatal = 2 };

/// Worse of two statuses.
ExitStatus combine(ExitStatus a, ExitStatus b);

// ---------------------------------------------------------------------------
// In-memory building blocks

/// A probe together with the vocabularies it was trained against.
struct FittedProbe {
  ProbeParams<float> params;
  LabelVocab c_vocab;
  LabelVocab u_vocab;
  TrainLog log;
  std::vector<Exclusion> excluded;  // validation samples with unseen labels
};

/// Builds vocabularies from `train_split`, drops validation samples with
/// unseen labels and trains an m2-dimensional probe.
FittedProbe fit_probe(std::span<const LoadedSample> train_split,
                      std::span<const LoadedSample> validation_split, Eigen::Index subspace_dim,
                      const TrainConfig& config);

struct SampleScore {
  std::string sample_id;
  PrfScore score;
};

struct Evaluation {
  std::vector<SampleScore> samples;
  std::vector<Exclusion> excluded;
  CorpusScore corpus;
};

/// Predicts a tree for every sample and scores it against the gold tree.
/// Samples with labels outside the vocabularies are excluded. With
/// `gold_as_prediction` the probe is bypassed and the gold tuple is decoded
/// instead (a pipeline self-check that must score 1.0).
Evaluation evaluate(const ProbeParams<float>& params, const LabelVocab& c_vocab,
                    const LabelVocab& u_vocab, std::span<const LoadedSample> samples,
                    bool gold_as_prediction = false);

// ---------------------------------------------------------------------------
// Commands. Each writes only inside its output directory and produces
// byte-identical files for identical inputs.

struct EncodeOptions {
  std::filesystem::path corpus_dir;
  std::string language = "python";
  std::optional<std::filesystem::path> embeddings_dir;
  std::size_t max_subwords = 512;
  SplitSizes sizes;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

/// Writes out/tuples/<id>.json for every accepted sample and
/// out/manifest.jsonl.
ExitStatus cmd_encode(const EncodeOptions& options, std::ostream& log);

struct TrainOptions {
  std::filesystem::path manifest;
  std::uint32_t layer = 0;
  Eigen::Index subspace_dim = 128;
  TrainConfig train;
  std::filesystem::path out;
};

/// Writes out/probe.astk and out/train_log.json.
ExitStatus cmd_train(const TrainOptions& options, std::ostream& log);

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path manifest;
  std::string split = "test";
  std::optional<std::uint32_t> layer;  // defaults to the checkpoint's layer
  bool gold_as_prediction = false;
  int jobs = 1;
  std::filesystem::path out;
};

/// Writes out/scores.jsonl (one record per sample), out/metrics.csv and
/// out/summary.json.
ExitStatus cmd_eval(const EvalOptions& options, std::ostream& log);

struct SweepOptions {
  TrainOptions base;                       // manifest, layer, m2 and schedule
  std::vector<std::uint32_t> layers;       // sweep-layers
  std::vector<Eigen::Index> subspace_dims; // sweep-dim
  std::string split = "test";
  int jobs = 1;
  std::filesystem::path out;
};

/// One probe per layer; point k lives in out/layer_<L>/. Writes
/// out/sweep.csv and out/plot.json.
ExitStatus cmd_sweep_layers(const SweepOptions& options, std::ostream& log);
/// One probe per subspace dimension; point k lives in out/dim_<m2>/.
ExitStatus cmd_sweep_dims(const SweepOptions& options, std::ostream& log);

/// Collects every summary.json below `runs_dir` into out/report.csv and
/// out/report.md.
ExitStatus cmd_report(const std::filesystem::path& runs_dir, const std::filesystem::path& out,
                      std::ostream& log);

/// key=value lines, sorted by key.
void write_resolved_config(const std::filesystem::path& out,
                           const std::map<std::string, std::string>& values);

/// Parses key=value lines; '#' starts a comment, blank lines are ignored.
/// Throws FormatError on a line without '='.
std::map<std::string, std::string> parse_config(std::string_view text);

}  // namespace astprobe

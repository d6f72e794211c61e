#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "astprobe/label_vocab.hpp"
#include "astprobe/probe.hpp"
#include "astprobe/source_parser.hpp"
#include "astprobe/tuple_codec.hpp"

namespace astprobe {

// ---------------------------------------------------------------------------
// Vocabularies

/// c and u vocabularies over the given (training) tuples plus the null
/// label, frozen on return.
std::pair<LabelVocab, LabelVocab> build_vocabs(std::span<const LabeledTuple> training);

/// True when every label of `tuple` is known to both vocabularies.
bool covered_by(const LabeledTuple& tuple, const LabelVocab& c_vocab, const LabelVocab& u_vocab);

// ---------------------------------------------------------------------------
// Sidecars: one JSON document per sample holding its gold tuple.

struct Sidecar {
  std::string sample_id;
  LabeledTuple tuple;
  std::vector<TokenRange> token_ranges;  // empty for synthetic samples
};

std::string encode_sidecar(const Sidecar& sidecar);
Sidecar decode_sidecar(std::string_view text);
void write_sidecar(const std::filesystem::path& path, const Sidecar& sidecar);
Sidecar read_sidecar(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Manifest

struct SplitSizes {
  std::size_t train = 20000;
  std::size_t test = 4000;
  std::size_t validation = 2000;

  std::size_t total() const { return train + test + validation; }
};

inline constexpr std::string_view kTrainSplit = "train";
inline constexpr std::string_view kTestSplit = "test";
inline constexpr std::string_view kValidationSplit = "validation";

struct ManifestEntry {
  std::string sample_id;
  std::string split;
  std::string source;     // relative to the manifest directory; may be empty
  std::string tuples;     // sidecar path, relative
  std::string embedding;  // container path, relative; may be empty
  std::string ast_fingerprint;
  std::size_t n_tokens = 0;

  bool operator==(const ManifestEntry&) const = default;
};

struct Exclusion {
  std::string sample_id;
  std::string reason;

  bool operator==(const Exclusion&) const = default;
};

/// JSON lines: one header object, then one object per sample, then one per
/// excluded sample.
struct CorpusManifest {
  std::string language;
  SplitSizes sizes;
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> samples;
  std::vector<Exclusion> excluded;

  std::vector<ManifestEntry> split(std::string_view name) const;
  bool operator==(const CorpusManifest& other) const;
};

std::string encode_manifest(const CorpusManifest& manifest);
CorpusManifest decode_manifest(std::string_view text);
void write_manifest(const std::filesystem::path& path, const CorpusManifest& manifest);
CorpusManifest read_manifest(const std::filesystem::path& path);

/// A candidate sample before split assignment.
struct EncodedSample {
  std::string sample_id;
  std::filesystem::path source;
  std::filesystem::path embedding;  // empty when not checked
  ParsedSource parsed;
  LabeledTuple tuple;
};

struct ScanOptions {
  std::optional<std::filesystem::path> embeddings_dir;  // <dir>/<id>.astp
  std::size_t max_subwords = 512;
};

struct ScanResult {
  std::vector<EncodedSample> accepted;  // sorted by sample id
  std::vector<Exclusion> excluded;
};

/// Parses every `*.<ext>` file of `corpus_dir` (non-recursive). Samples that
/// fail to parse, have fewer than two tokens, or (when embeddings are given)
/// lack a container, exceed `max_subwords` or disagree on the word count are
/// excluded with a reason.
ScanResult scan_corpus(const std::filesystem::path& corpus_dir, std::string_view language,
                       const ScanOptions& options = {});

/// Seeded shuffle of the ids, then the first `train`, next `test`, next
/// `validation` ids. Returns the split name for each input position ("" for
/// unused). Throws InsufficientData when ids.size() < sizes.total().
std::vector<std::string> assign_splits(std::span<const std::string> ids, const SplitSizes& sizes,
                                       std::uint64_t seed);

/// scan_corpus + assign_splits. Sidecar paths point at `tuples/<id>.json`.
CorpusManifest make_manifest(const std::filesystem::path& corpus_dir, std::string_view language,
                             const SplitSizes& sizes, std::uint64_t seed,
                             const ScanOptions& options = {});

// ---------------------------------------------------------------------------
// Loading a split for training or evaluation

struct LoadedSample {
  std::string sample_id;
  LabeledTuple tuple;
  Matrix<float> words;  // (n+1) x m1
};

struct LoadedSplit {
  std::vector<LoadedSample> samples;
  std::vector<Exclusion> skipped;
};

/// Reads sidecars and embedding containers of one split. Samples whose word
/// count differs from the token count are skipped. `manifest_dir` anchors
/// relative paths.
LoadedSplit load_split(const CorpusManifest& manifest, const std::filesystem::path& manifest_dir,
                       std::string_view split, std::uint32_t layer);

}  // namespace astprobe

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "astprobe/probe.hpp"

namespace astprobe {

/// Inclusive subword range [first, last] forming one word.
struct WordSpan {
  std::uint32_t first = 0;
  std::uint32_t last = 0;

  bool operator==(const WordSpan&) const = default;
};

struct EmbeddingLayer {
  std::uint32_t layer_id = 0;
  Matrix<float> subwords;  // n_subwords x m1

  bool operator==(const EmbeddingLayer& other) const {
    return layer_id == other.layer_id && subwords.rows() == other.subwords.rows() &&
           subwords.cols() == other.subwords.cols() && subwords == other.subwords;
  }
};

/// Hidden states of one sample: every extracted layer plus the word spans
/// shared by all layers. Word-level data uses one single-subword span per word.
struct EmbeddingRecord {
  std::string sample_id;
  std::uint16_t ambient_dim = 0;
  std::vector<EmbeddingLayer> layers;
  std::vector<WordSpan> word_spans;

  const EmbeddingLayer& layer(std::uint32_t layer_id) const;
  bool operator==(const EmbeddingRecord&) const = default;
};

/// Record whose rows already are word vectors.
EmbeddingRecord word_level_record(std::string sample_id, std::uint32_t layer_id,
                                  const Matrix<float>& words);

/// Container layout (little-endian):
///
///     "ASTP"  u16 version=1  u16 m1  u32 layer_count
///     layer_count x { u32 layer_id  u32 n_subwords  f32[n_subwords*m1] }
///     u32 n_words  u32[n_words*2] spans (first, last)
///     u64 CRC-64/XZ of every preceding byte
inline constexpr std::uint16_t kEmbeddingVersion = 1;

/// Exact byte size of a container for the given shape.
std::uint64_t container_size(std::uint32_t m1, std::span<const std::uint32_t> subwords_per_layer,
                             std::uint32_t n_words);

/// CRC-64/XZ (ECMA-182 polynomial, reflected, all-ones init and xor-out).
std::uint64_t crc64(std::span<const char> bytes);

std::vector<char> encode_embeddings(const EmbeddingRecord& record);
/// Throws FormatError on bad magic, version, layout or truncation and
/// ChecksumError when the stored CRC does not match.
EmbeddingRecord decode_embeddings(std::span<const char> bytes, std::string sample_id);

/// One file per sample; the sample id is the file stem.
void write_embeddings(const std::filesystem::path& path, const EmbeddingRecord& record);
EmbeddingRecord read_embeddings(const std::filesystem::path& path);

/// Spans must be ordered, non-empty, non-overlapping, adjacent to one
/// another and inside [0, n_subwords). Leading and trailing subwords (special
/// tokens) may stay uncovered. Throws SpanError otherwise.
void validate_spans(std::span<const WordSpan> spans, std::size_t n_subwords);

/// Word vector = mean of its subword vectors.
Matrix<float> align_subwords(const Matrix<float>& subwords, std::span<const WordSpan> spans);
Matrix<float> align_subwords(const EmbeddingRecord& record, std::uint32_t layer_id);

}  // namespace astprobe

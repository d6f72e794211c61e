#include "astprobe/embedding_io.hpp"

#include <boost/crc.hpp>

#include "astprobe/byte_io.hpp"

namespace astprobe {

namespace {

constexpr std::string_view kMagic = "ASTP";

using Crc64Xz = boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, 0xFFFFFFFFFFFFFFFFULL,
                                   0xFFFFFFFFFFFFFFFFULL, true, true>;

}  // namespace

const EmbeddingLayer& EmbeddingRecord::layer(std::uint32_t layer_id) const {
  for (const auto& l : layers) {
    if (l.layer_id == layer_id) return l;
  }
  throw FormatError("sample '" + sample_id + "' has no layer " + std::to_string(layer_id));
}

EmbeddingRecord word_level_record(std::string sample_id, std::uint32_t layer_id,
                                  const Matrix<float>& words) {
  EmbeddingRecord record;
  record.sample_id = std::move(sample_id);
  record.ambient_dim = static_cast<std::uint16_t>(words.cols());
  record.layers.push_back({layer_id, words});
  for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(words.rows()); ++i) {
    record.word_spans.push_back({i, i});
  }
  return record;
}

std::uint64_t container_size(std::uint32_t m1, std::span<const std::uint32_t> subwords_per_layer,
                             std::uint32_t n_words) {
  std::uint64_t size = 4 + 2 + 2 + 4;
  for (auto n : subwords_per_layer) size += 8 + std::uint64_t{4} * n * m1;
  size += 4 + std::uint64_t{8} * n_words;
  return size + 8;
}

std::uint64_t crc64(std::span<const char> bytes) {
  Crc64Xz crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

void validate_spans(std::span<const WordSpan> spans, std::size_t n_subwords) {
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const auto& s = spans[k];
    if (s.first > s.last) {
      throw SpanError("word " + std::to_string(k) + " has an empty subword span");
    }
    if (s.last >= n_subwords) {
      throw SpanError("word " + std::to_string(k) + " exceeds " + std::to_string(n_subwords) +
                      " subwords");
    }
    if (k > 0) {
      const auto& prev = spans[k - 1];
      if (s.first <= prev.last) throw SpanError("word " + std::to_string(k) + " overlaps its predecessor");
      if (s.first != prev.last + 1) throw SpanError("gap before word " + std::to_string(k));
    }
  }
}

std::vector<char> encode_embeddings(const EmbeddingRecord& record) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u16(kEmbeddingVersion);
  w.u16(record.ambient_dim);
  w.u32(static_cast<std::uint32_t>(record.layers.size()));
  for (const auto& layer : record.layers) {
    if (layer.subwords.cols() != record.ambient_dim) {
      throw FormatError("layer " + std::to_string(layer.layer_id) + " has dimension " +
                        std::to_string(layer.subwords.cols()));
    }
    w.u32(layer.layer_id);
    w.u32(static_cast<std::uint32_t>(layer.subwords.rows()));
    const float* data = layer.subwords.data();
    for (Eigen::Index i = 0; i < layer.subwords.size(); ++i) w.f32(data[i]);
  }
  w.u32(static_cast<std::uint32_t>(record.word_spans.size()));
  for (const auto& span : record.word_spans) {
    w.u32(span.first);
    w.u32(span.last);
  }
  w.u64(crc64(w.buffer()));
  return std::move(w.buffer());
}

EmbeddingRecord decode_embeddings(std::span<const char> bytes, std::string sample_id) {
  ByteReader r(bytes);
  if (bytes.size() < 4 || r.bytes(4) != kMagic) throw FormatError("not an embedding container (bad magic)");
  const auto version = r.u16();
  if (version != kEmbeddingVersion) {
    throw FormatError("unsupported embedding container version " + std::to_string(version));
  }
  EmbeddingRecord record;
  record.sample_id = std::move(sample_id);
  record.ambient_dim = r.u16();
  const auto layer_count = r.u32();
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    EmbeddingLayer layer;
    layer.layer_id = r.u32();
    const auto n_subwords = r.u32();
    r.require(std::size_t{4} * n_subwords * record.ambient_dim);
    layer.subwords.resize(n_subwords, record.ambient_dim);
    float* data = layer.subwords.data();
    for (Eigen::Index i = 0; i < layer.subwords.size(); ++i) data[i] = r.f32();
    record.layers.push_back(std::move(layer));
  }
  const auto n_words = r.u32();
  r.require(std::size_t{8} * n_words);
  record.word_spans.resize(n_words);
  for (auto& span : record.word_spans) {
    span.first = r.u32();
    span.last = r.u32();
  }
  const auto payload = r.position();
  const auto stored = r.u64();
  if (r.remaining() != 0) throw FormatError("trailing bytes after embedding container");
  if (crc64(bytes.first(payload)) != stored) throw ChecksumError("embedding container CRC mismatch");
  return record;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingRecord& record) {
  write_file(path, encode_embeddings(record));
}

EmbeddingRecord read_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(read_file(path), path.stem().string());
}

Matrix<float> align_subwords(const Matrix<float>& subwords, std::span<const WordSpan> spans) {
  validate_spans(spans, static_cast<std::size_t>(subwords.rows()));
  Matrix<float> words(static_cast<Eigen::Index>(spans.size()), subwords.cols());
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const auto first = static_cast<Eigen::Index>(spans[k].first);
    const auto count = static_cast<Eigen::Index>(spans[k].last - spans[k].first + 1);
    words.row(static_cast<Eigen::Index>(k)) =
        (subwords.middleRows(first, count).template cast<double>().colwise().sum() /
         static_cast<double>(count))
            .template cast<float>();
  }
  return words;
}

Matrix<float> align_subwords(const EmbeddingRecord& record, std::uint32_t layer_id) {
  return align_subwords(record.layer(layer_id).subwords, record.word_spans);
}

}  // namespace astprobe

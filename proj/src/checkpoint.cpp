#include "astprobe/checkpoint.hpp"

#include "astprobe/byte_io.hpp"

namespace astprobe {

namespace {

constexpr std::string_view kMagic = "ASTK";

void put_matrix(ByteWriter& w, const Matrix<float>& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) w.f32(m.data()[i]);
}

Matrix<float> get_matrix(ByteReader& r, std::uint32_t rows, std::uint32_t cols) {
  r.require(std::size_t{rows} * cols * 4);
  Matrix<float> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f32();
  return m;
}

}  // namespace

std::vector<char> encode_checkpoint(const Checkpoint& checkpoint) {
  const auto& p = checkpoint.params;
  if (static_cast<std::size_t>(p.c_protos.rows()) != checkpoint.c_vocab.size() ||
      static_cast<std::size_t>(p.u_protos.rows()) != checkpoint.u_vocab.size()) {
    throw DimensionError("prototype rows do not match vocabulary sizes");
  }
  ByteWriter w;
  w.bytes(kMagic);
  w.u16(Checkpoint::kVersion);
  w.u16(0);
  w.u32(static_cast<std::uint32_t>(p.ambient_dim()));
  w.u32(static_cast<std::uint32_t>(p.subspace_dim()));
  w.u32(static_cast<std::uint32_t>(p.c_protos.rows()));
  w.u32(static_cast<std::uint32_t>(p.u_protos.rows()));
  w.u64(checkpoint.c_vocab.hash());
  w.u64(checkpoint.u_vocab.hash());
  put_matrix(w, p.basis);
  put_matrix(w, p.c_protos);
  put_matrix(w, p.u_protos);
  nlohmann::json blob = {{"c_labels", checkpoint.c_vocab.labels()},
                         {"u_labels", checkpoint.u_vocab.labels()},
                         {"train_log", to_json(checkpoint.log)},
                         {"meta", checkpoint.meta}};
  const std::string text = blob.dump();
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(text);
  return std::move(w.buffer());
}

Checkpoint decode_checkpoint(std::span<const char> bytes) {
  ByteReader r(bytes);
  if (r.bytes(4) != kMagic) throw FormatError("not a probe checkpoint (bad magic)");
  const auto version = r.u16();
  if (version != Checkpoint::kVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  r.u16();
  const auto m1 = r.u32(), m2 = r.u32(), n_c = r.u32(), n_u = r.u32();
  const auto c_hash = r.u64(), u_hash = r.u64();

  Checkpoint ck;
  ck.params.basis = get_matrix(r, m2, m1);
  ck.params.c_protos = get_matrix(r, n_c, m2);
  ck.params.u_protos = get_matrix(r, n_u, m2);
  const auto size = r.u32();
  const auto text = r.bytes(size);
  if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint");

  nlohmann::json blob;
  try {
    blob = nlohmann::json::parse(text);
    ck.c_vocab = LabelVocab::from_labels(blob.at("c_labels").get<std::vector<std::string>>());
    ck.u_vocab = LabelVocab::from_labels(blob.at("u_labels").get<std::vector<std::string>>());
    ck.log = train_log_from_json(blob.at("train_log"));
    ck.meta = blob.value("meta", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }
  if (ck.c_vocab.size() != n_c || ck.u_vocab.size() != n_u) {
    throw FormatError("label lists do not match prototype counts");
  }
  if (ck.c_vocab.hash() != c_hash || ck.u_vocab.hash() != u_hash) {
    throw FormatError("vocabulary hash mismatch");
  }
  return ck;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_file(path, encode_checkpoint(checkpoint));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace astprobe

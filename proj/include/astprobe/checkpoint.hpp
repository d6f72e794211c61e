#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "astprobe/label_vocab.hpp"
#include "astprobe/probe.hpp"
#include "astprobe/train.hpp"

namespace astprobe {

/// Everything needed to run a trained probe.
///
/// File layout (little-endian):
///
///     "ASTK"  u16 version=1  u16 reserved=0
///     u32 m1  u32 m2  u32 |C|  u32 |U|
///     u64 c_vocab_hash  u64 u_vocab_hash
///     f32 B[m2*m1]  f32 C[|C|*m2]  f32 U[|U|*m2]      (row-major)
///     u32 json_size  json_size bytes of UTF-8 JSON
///
/// The JSON blob holds the label lists ("c_labels", "u_labels"), the
/// training log ("train_log") and free-form metadata ("meta").
struct Checkpoint {
  static constexpr std::uint16_t kVersion = 1;

  ProbeParams<float> params;
  LabelVocab c_vocab;
  LabelVocab u_vocab;
  TrainLog log;
  nlohmann::json meta = nlohmann::json::object();
};

std::vector<char> encode_checkpoint(const Checkpoint& checkpoint);
/// Throws FormatError on a bad header, size mismatch or vocabulary hash
/// mismatch.
Checkpoint decode_checkpoint(std::span<const char> bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace astprobe

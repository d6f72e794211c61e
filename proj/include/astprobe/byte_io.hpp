#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "astprobe/errors.hpp"

namespace astprobe {

/// Appends fixed-width little-endian values to a byte buffer.
class ByteWriter {
 public:
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(std::string_view data) { buffer_.insert(buffer_.end(), data.begin(), data.end()); }

  const std::vector<char>& buffer() const { return buffer_; }
  std::vector<char>& buffer() { return buffer_; }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  std::vector<char> buffer_;
};

/// Bounds-checked little-endian reader; running past the end throws
/// FormatError.
class ByteReader {
 public:
  explicit ByteReader(std::span<const char> data) : data_(data) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string_view bytes(std::size_t count) {
    require(count);
    std::string_view view(data_.data() + pos_, count);
    pos_ += count;
    return view;
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

  void require(std::size_t count) const {
    if (count > remaining()) throw FormatError("unexpected end of data");
  }

 private:
  std::uint64_t get(int width) {
    require(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }

  std::span<const char> data_;
  std::size_t pos_ = 0;
};

std::vector<char> read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_file(const std::filesystem::path& path, std::span<const char> bytes);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace astprobe

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace madrom::persist {

/// File layout (all integers little-endian):
///   8-byte magic "MADROM\0\x01"
///   u32 format version
///   sections: 4-byte tag, u64 payload length, payload
///   u64 FNV-1a 64 of every preceding byte
inline constexpr std::array<char, 8> kMagic{'M', 'A', 'D', 'R', 'O', 'M', '\0', '\x01'};
inline constexpr std::uint32_t kFormatVersion = 1;

using Bytes = std::vector<std::uint8_t>;

/// Little-endian payload builder. Non-finite doubles are rejected with IoError.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v);
  void f64s(std::span<const double> v);  // u64 count, then values
  void str(std::string_view s);          // u64 length, then bytes
  void raw(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }

  const Bytes& bytes() const { return bytes_; }
  Bytes take() { return std::move(bytes_); }

 private:
  Bytes bytes_;
};

/// Bounds-checked reader; truncation throws IoError.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64();
  std::vector<double> f64s();
  std::string str();
  std::span<const std::uint8_t> take(std::size_t n);

  bool done() const { return pos_ == data_.size(); }
  /// Throws IoError unless every byte was consumed.
  void expect_done(const char* what) const;

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

struct Section {
  std::array<char, 4> tag;
  Bytes payload;
};

Bytes encode(std::span<const Section> sections, std::uint32_t version = kFormatVersion);
/// Checks magic, then version (VersionError), then checksum (ChecksumError).
std::vector<Section> decode(std::span<const std::uint8_t> file);

/// First section with `tag`; throws IoError when absent.
const Bytes& find_section(const std::vector<Section>& sections, std::string_view tag);
std::array<char, 4> make_tag(std::string_view tag);

/// Temp file in the target directory, then rename over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
Bytes read_file(const std::filesystem::path& path);

}  // namespace madrom::persist

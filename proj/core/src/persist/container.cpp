#include "madrom/persist/container.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <system_error>
#include <unistd.h>

#include "madrom/errors.hpp"
#include "madrom/hash.hpp"

namespace madrom::persist {

namespace fs = std::filesystem;

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) {
  if (!std::isfinite(v)) throw IoError("refusing to serialize a non-finite value");
  u64(std::bit_cast<std::uint64_t>(v));
}

void ByteWriter::f64s(std::span<const double> v) {
  u64(v.size());
  for (double x : v) f64(x);
}

void ByteWriter::str(std::string_view s) {
  u64(s.size());
  bytes_.insert(bytes_.end(), s.begin(), s.end());
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (n > data_.size() - pos_) throw IoError("truncated payload");
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
  const auto b = take(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

std::uint64_t ByteReader::u64() {
  const auto b = take(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

double ByteReader::f64() {
  const double v = std::bit_cast<double>(u64());
  if (!std::isfinite(v)) throw IoError("non-finite value in payload");
  return v;
}

std::vector<double> ByteReader::f64s() {
  const std::uint64_t n = u64();
  if (n > (data_.size() - pos_) / 8) throw IoError("truncated payload");
  std::vector<double> out(n);
  for (auto& v : out) v = f64();
  return out;
}

std::string ByteReader::str() {
  const std::uint64_t n = u64();
  if (n > data_.size() - pos_) throw IoError("truncated payload");
  const auto b = take(n);
  return std::string(b.begin(), b.end());
}

void ByteReader::expect_done(const char* what) const {
  if (!done()) throw IoError(std::string("trailing bytes in ") + what);
}

std::array<char, 4> make_tag(std::string_view tag) {
  if (tag.size() != 4) throw std::invalid_argument("section tags are four characters");
  return {tag[0], tag[1], tag[2], tag[3]};
}

Bytes encode(std::span<const Section> sections, std::uint32_t version) {
  ByteWriter w;
  w.raw({reinterpret_cast<const std::uint8_t*>(kMagic.data()), kMagic.size()});
  w.u32(version);
  for (const auto& s : sections) {
    w.raw({reinterpret_cast<const std::uint8_t*>(s.tag.data()), 4});
    w.u64(s.payload.size());
    w.raw(s.payload);
  }
  Fnv1a h;
  h.update(w.bytes().data(), w.bytes().size());
  w.u64(h.digest());
  return w.take();
}

std::vector<Section> decode(std::span<const std::uint8_t> file) {
  if (file.size() < kMagic.size() + 4 + 8) throw IoError("file too short to be a checkpoint");
  if (std::memcmp(file.data(), kMagic.data(), kMagic.size()) != 0) throw IoError("bad magic: not a checkpoint file");
  ByteReader header(file.subspan(kMagic.size(), 4));
  const std::uint32_t version = header.u32();
  if (version != kFormatVersion) {
    throw VersionError("unsupported checkpoint format version " + std::to_string(version) + " (expected " +
                       std::to_string(kFormatVersion) + ")");
  }
  const std::size_t body = file.size() - 8;
  Fnv1a h;
  h.update(file.data(), body);
  ByteReader trailer(file.subspan(body));
  if (trailer.u64() != h.digest()) throw ChecksumError("checksum mismatch: file is corrupted");

  ByteReader r(file.subspan(kMagic.size() + 4, body - kMagic.size() - 4));
  std::vector<Section> out;
  while (!r.done()) {
    Section s;
    const auto tag = r.take(4);
    std::memcpy(s.tag.data(), tag.data(), 4);
    const std::uint64_t n = r.u64();
    const auto payload = r.take(n);
    s.payload.assign(payload.begin(), payload.end());
    out.push_back(std::move(s));
  }
  return out;
}

const Bytes& find_section(const std::vector<Section>& sections, std::string_view tag) {
  for (const auto& s : sections) {
    if (std::string_view(s.tag.data(), 4) == tag) return s.payload;
  }
  throw IoError("missing section '" + std::string(tag) + "'");
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("output directory does not exist: " + dir.string());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + tmp.string());
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    os.flush();
    if (!os) {
      fs::remove(tmp, ec);
      throw IoError("write failed: " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move file into place: " + path.string());
  }
}

Bytes read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  Bytes out((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (is.bad()) throw IoError("read failed: " + path.string());
  return out;
}

}  // namespace madrom::persist

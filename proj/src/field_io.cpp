#include "dnls/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "dnls/errors.hpp"

namespace dnls {

namespace {

constexpr std::array<char, 4> kMagic = {'D', 'N', 'L', 'S'};

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
    throw StructuralError("snapshot: truncated stream");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_snapshot(std::ostream& os, const ComplexField& field) {
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, kSnapshotVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(field.size()));
  put_le<double>(os, field.grid().half_width());
  put_le<double>(os, field.time());
  for (const auto& z : field.values()) {
    put_le<double>(os, z.real());
    put_le<double>(os, z.imag());
  }
  if (!os) throw Error("snapshot: write failed");
}

ComplexField read_snapshot(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw StructuralError("snapshot: bad magic");
  }
  const auto version = get_le<std::uint32_t>(is);
  if (version != kSnapshotVersion) throw StructuralError("snapshot: unsupported version");
  const auto n = get_le<std::uint32_t>(is);
  const auto half_width = get_le<double>(is);
  const auto time = get_le<double>(is);
  GridSpec grid(half_width, n);
  ComplexVector values(n);
  for (auto& z : values) {
    const double re = get_le<double>(is);
    const double im = get_le<double>(is);
    z = {re, im};
  }
  return {grid, time, std::move(values)};
}

void write_snapshot(const std::filesystem::path& path, const ComplexField& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("snapshot: cannot open " + path.string() + " for writing");
  write_snapshot(os, field);
}

ComplexField read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("snapshot: cannot open " + path.string());
  return read_snapshot(is);
}

}  // namespace dnls

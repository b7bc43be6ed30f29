#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace ffc {

// Little-endian scalar IO for the binary file formats. Bit-exact round trips
// are part of the persistence contract, so doubles travel as raw IEEE bits.

inline std::uint64_t byteswap64(std::uint64_t v) {
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffULL) << (8 * (7 - i));
  return r;
}

inline void write_u64_le(std::ostream& os, std::uint64_t v) {
  if constexpr (std::endian::native != std::endian::little) v = byteswap64(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint64_t read_u64_le(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw std::runtime_error("binary stream truncated");
  if constexpr (std::endian::native != std::endian::little) v = byteswap64(v);
  return v;
}

inline void write_f64_le(std::ostream& os, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  write_u64_le(os, bits);
}

inline double read_f64_le(std::istream& is) {
  const std::uint64_t bits = read_u64_le(is);
  double d;
  std::memcpy(&d, &bits, sizeof d);
  return d;
}

inline void write_u32_le(std::ostream& os, std::uint32_t v) {
  unsigned char buf[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(buf), 4);
}

inline std::uint32_t read_u32_le(std::istream& is) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  if (!is) throw std::runtime_error("binary stream truncated");
  return static_cast<std::uint32_t>(buf[0]) | (static_cast<std::uint32_t>(buf[1]) << 8) |
         (static_cast<std::uint32_t>(buf[2]) << 16) | (static_cast<std::uint32_t>(buf[3]) << 24);
}

}  // namespace ffc

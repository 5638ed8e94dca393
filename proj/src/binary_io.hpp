#ifndef SALGRAPH_BINARY_IO_HPP_
#define SALGRAPH_BINARY_IO_HPP_

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "salgraph/error.hpp"

namespace salgraph::detail {

// Little-endian primitives, independent of host byte order.
inline void put_u32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

inline void put_f32(std::ostream& os, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(os, v);
}

inline std::uint32_t decode_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline float decode_f32(const unsigned char* b) {
  const std::uint32_t v = decode_u32(b);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

inline std::uint32_t get_u32(std::istream& is, const std::string& what) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw DataError("truncated " + what + " header");
  return decode_u32(b);
}

}  // namespace salgraph::detail

#endif  // SALGRAPH_BINARY_IO_HPP_

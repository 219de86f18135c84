#pragma once
// Little-endian primitives for the versioned binary files (index, checkpoint).

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "litrank/common.hpp"

namespace litrank::binio {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}
inline void put_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 4);
}
inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
inline void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void read_exact(std::istream& in, char* buf, std::size_t n) {
  in.read(buf, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw InputError("unexpected end of binary file");
}
inline std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  read_exact(in, reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}
inline std::uint32_t get_u32(std::istream& in) {
  unsigned char buf[4];
  read_exact(in, reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }
inline std::string get_string(std::istream& in, std::size_t max_len = 1u << 26) {
  const auto n = get_u32(in);
  if (n > max_len) throw InputError("string length out of range in binary file");
  std::string s(n, '\0');
  read_exact(in, s.data(), n);
  return s;
}

inline void expect_magic(std::istream& in, std::string_view magic, const std::string& what) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (got != magic) throw InputError(what + ": bad magic");
}

}  // namespace litrank::binio

#pragma once

#include "evo/types.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

namespace evo {

// Little-endian primitives shared by snapshots, run records and frame files.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& os) : os_(os) {}
  void bytes(const void* p, std::size_t n);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v);
  void str(const std::string& s);
  void vec(const Vector& v);  // length-prefixed
  void mat(const Matrix& m);  // rows, cols, row-major data
  void batch(const Batch& b);

 private:
  std::ostream& os_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& is) : is_(is) {}
  void bytes(void* p, std::size_t n);
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64();
  std::string str();
  Vector vec();
  Matrix mat();
  Batch batch();

 private:
  std::uint64_t bounded_count(std::uint64_t n);
  std::istream& is_;
};

}  // namespace evo

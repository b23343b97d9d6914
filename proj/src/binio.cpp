#include "evo/binio.hpp"

#include <bit>

namespace evo {

namespace {

constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

template <class T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    T out{};
    auto* src = reinterpret_cast<unsigned char*>(&v);
    auto* dst = reinterpret_cast<unsigned char*>(&out);
    for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = src[sizeof(T) - 1 - i];
    return out;
  }
}

}  // namespace

void BinaryWriter::bytes(const void* p, std::size_t n) {
  os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!os_) throw Error(Errc::IoError, "write failed");
}

void BinaryWriter::u32(std::uint32_t v) {
  v = to_le(v);
  bytes(&v, sizeof v);
}

void BinaryWriter::u64(std::uint64_t v) {
  v = to_le(v);
  bytes(&v, sizeof v);
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(const std::string& s) {
  u64(s.size());
  bytes(s.data(), s.size());
}

void BinaryWriter::vec(const Vector& v) {
  u64(static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
}

void BinaryWriter::mat(const Matrix& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
}

void BinaryWriter::batch(const Batch& b) {
  u64(static_cast<std::uint64_t>(b.rows()));
  u64(static_cast<std::uint64_t>(b.cols()));
  for (Eigen::Index i = 0; i < b.size(); ++i) f64(b.data()[i]);
}

void BinaryReader::bytes(void* p, std::size_t n) {
  is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is_.gcount()) != n) throw Error(Errc::CorruptData, "unexpected end of data");
}

std::uint32_t BinaryReader::u32() {
  std::uint32_t v;
  bytes(&v, sizeof v);
  return to_le(v);
}

std::uint64_t BinaryReader::u64() {
  std::uint64_t v;
  bytes(&v, sizeof v);
  return to_le(v);
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::uint64_t BinaryReader::bounded_count(std::uint64_t n) {
  if (n > kMaxElements) throw Error(Errc::CorruptData, "implausible element count");
  return n;
}

std::string BinaryReader::str() {
  std::string s(bounded_count(u64()), '\0');
  if (!s.empty()) bytes(s.data(), s.size());
  return s;
}

Vector BinaryReader::vec() {
  Vector v(static_cast<Eigen::Index>(bounded_count(u64())));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f64();
  return v;
}

Matrix BinaryReader::mat() {
  const auto r = bounded_count(u64());
  const auto c = bounded_count(u64());
  bounded_count(r * c);
  Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f64();
  return m;
}

Batch BinaryReader::batch() {
  const auto r = bounded_count(u64());
  const auto c = bounded_count(u64());
  bounded_count(r * c);
  Batch b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = f64();
  return b;
}

}  // namespace evo

#include "acs/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

namespace acs::data {

static_assert(std::endian::native == std::endian::little,
              "ACSD I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'A', 'C', 'S', 'D'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kMaxRank = 8;

void write_bytes(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::istream& in, void* p, std::size_t n, const char* what) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw_format(std::string("acsd: truncated file while reading ") + what);
}

}  // namespace

std::size_t TensorRecord::element_count() const {
  std::size_t count = 1;
  for (std::uint32_t d : dims) count *= d;
  return count;
}

TensorRecord TensorRecord::from_matrix(const Matrix& m, Dtype dtype) {
  TensorRecord r;
  r.dtype = dtype;
  r.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  r.values.reserve(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      r.values.push_back(dtype == Dtype::f32 ? static_cast<double>(static_cast<float>(v)) : v);
    }
  return r;
}

TensorRecord TensorRecord::from_vector(const Vector& v, Dtype dtype) {
  TensorRecord r;
  r.dtype = dtype;
  r.dims = {static_cast<std::uint32_t>(v.size())};
  r.values.reserve(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i)
    r.values.push_back(dtype == Dtype::f32 ? static_cast<double>(static_cast<float>(v[i]))
                                           : v[i]);
  return r;
}

Matrix TensorRecord::to_matrix() const {
  if (dims.size() != 2) throw_format("acsd: record is not rank-2");
  Matrix m(static_cast<Index>(dims[0]), static_cast<Index>(dims[1]));
  std::size_t k = 0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = values[k++];
  return m;
}

Vector TensorRecord::to_vector() const {
  Vector v(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    v[static_cast<Index>(i)] = values[i];
  return v;
}

void write_acsd(const std::filesystem::path& path,
                const std::vector<TensorRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(errc::io_error, "cannot write " + path.string());
  write_bytes(out, kMagic, 4);
  write_bytes(out, &kVersion, 2);
  for (const TensorRecord& r : records) {
    if (r.dims.empty() || r.dims.size() > kMaxRank)
      throw_invalid_argument("acsd: record rank must be in [1, 8]");
    if (r.values.size() != r.element_count())
      throw_invalid_argument("acsd: record payload does not match dims");
    const auto rank = static_cast<std::uint8_t>(r.dims.size());
    const auto dtype = static_cast<std::uint8_t>(r.dtype);
    write_bytes(out, &rank, 1);
    write_bytes(out, &dtype, 1);
    write_bytes(out, r.dims.data(), r.dims.size() * sizeof(std::uint32_t));
    if (r.dtype == TensorRecord::Dtype::f64) {
      write_bytes(out, r.values.data(), r.values.size() * sizeof(double));
    } else {
      for (double v : r.values) {
        const float f = static_cast<float>(v);
        write_bytes(out, &f, sizeof(float));
      }
    }
  }
  if (!out) throw Error(errc::io_error, "short write to " + path.string());
}

std::vector<TensorRecord> read_acsd(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_error, "cannot open " + path.string());

  char magic[4];
  read_bytes(in, magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw_format("acsd: bad magic in " + path.string());
  std::uint16_t version = 0;
  read_bytes(in, &version, 2, "version");
  if (version != kVersion)
    throw_format("acsd: unsupported version " + std::to_string(version));

  std::vector<TensorRecord> records;
  while (true) {
    std::uint8_t rank = 0;
    in.read(reinterpret_cast<char*>(&rank), 1);
    if (in.eof()) break;
    if (!in) throw_format("acsd: read failure");
    if (rank == 0 || rank > kMaxRank)
      throw_format("acsd: bad record rank " + std::to_string(rank));
    std::uint8_t dtype = 0;
    read_bytes(in, &dtype, 1, "dtype");
    if (dtype > 1) throw_format("acsd: bad dtype tag " + std::to_string(dtype));

    TensorRecord r;
    r.dtype = static_cast<TensorRecord::Dtype>(dtype);
    r.dims.resize(rank);
    read_bytes(in, r.dims.data(), rank * sizeof(std::uint32_t), "dims");
    const std::size_t count = r.element_count();
    if (count > (std::size_t{1} << 32))
      throw_format("acsd: implausible record size");
    r.values.resize(count);
    if (r.dtype == TensorRecord::Dtype::f64) {
      read_bytes(in, r.values.data(), count * sizeof(double), "payload");
    } else {
      std::vector<float> raw(count);
      read_bytes(in, raw.data(), count * sizeof(float), "payload");
      for (std::size_t i = 0; i < count; ++i)
        r.values[i] = static_cast<double>(raw[i]);
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace acs::data

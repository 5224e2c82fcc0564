#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "acs/linalg.hpp"

namespace acs::data {

// ACSD tensor container: magic "ACSD", u16 format version, then records.
// Record layout: u8 rank, u8 dtype (0 = float32, 1 = float64), rank x u32
// dims, payload little-endian in row-major order. Dataset tensors use f32;
// checkpoints use f64 so parameters round-trip bit-exactly.
struct TensorRecord {
  enum class Dtype : std::uint8_t { f32 = 0, f64 = 1 };

  Dtype dtype = Dtype::f64;
  std::vector<std::uint32_t> dims;
  std::vector<double> values;  // f32 records hold float-rounded doubles

  static TensorRecord from_matrix(const Matrix& m, Dtype dtype = Dtype::f64);
  static TensorRecord from_vector(const Vector& v, Dtype dtype = Dtype::f64);

  Matrix to_matrix() const;  // rank-2 records
  Vector to_vector() const;  // rank-1 records (or any record, flattened)
  std::size_t element_count() const;
};

void write_acsd(const std::filesystem::path& path,
                const std::vector<TensorRecord>& records);

std::vector<TensorRecord> read_acsd(const std::filesystem::path& path);

}  // namespace acs::data

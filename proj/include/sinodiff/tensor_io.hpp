#pragma once

// "PDCT" binary tensor container.
//
// Layout (all integers little-endian):
//   magic "PDCT" | version u16 | dtype u8 | layout u8
//   layout 0 (single): rank u8 | dims u64[rank] | row-major payload
//   layout 1 (multi):  count u32 | per tensor: name_len u32 | name bytes |
//                      rank u8 | dims u64[rank] | row-major payload
//
// dtype 0 = float32, 1 = float64.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sinodiff {

enum class DType : std::uint8_t { Float32 = 0, Float64 = 1 };

inline constexpr std::uint16_t kContainerVersion = 1;

struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;  // row-major

  std::uint64_t element_count() const;
};

Tensor to_tensor(const Eigen::ArrayXXd& a);
Eigen::ArrayXXd to_array(const Tensor& t);

void write_tensor(const std::filesystem::path& path, const Tensor& t,
                  DType dtype = DType::Float32);
Tensor read_tensor(const std::filesystem::path& path);

/// Ordered by name so the byte stream is deterministic.
using TensorMap = std::map<std::string, Tensor>;

void write_tensors(const std::filesystem::path& path, const TensorMap& tensors,
                   DType dtype = DType::Float64);
TensorMap read_tensors(const std::filesystem::path& path);

/// In-memory variants used by the file functions; exposed for tests.
std::vector<std::uint8_t> encode_tensor(const Tensor& t, DType dtype);
Tensor decode_tensor(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_tensors(const TensorMap& tensors, DType dtype);
TensorMap decode_tensors(const std::vector<std::uint8_t>& bytes);

/// Convenience for 2-D arrays.
inline void write_array(const std::filesystem::path& path, const Eigen::ArrayXXd& a) {
  write_tensor(path, to_tensor(a));
}
inline Eigen::ArrayXXd read_array(const std::filesystem::path& path) {
  return to_array(read_tensor(path));
}

}  // namespace sinodiff

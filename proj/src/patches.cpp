#include "sinodiff/patches.hpp"

#include <string>

#include "sinodiff/error.hpp"

namespace sinodiff {

namespace {

std::vector<Eigen::Index> axis_offsets(Eigen::Index extent, int side, int stride) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index o = 0; o + side <= extent; o += stride) out.push_back(o);
  if (out.back() + side < extent) out.push_back(extent - side);
  return out;
}

}  // namespace

PatchGrid::PatchGrid(Eigen::Index rows, Eigen::Index cols, int patch_side, int stride)
    : rows_(rows), cols_(cols), side_(patch_side), stride_(stride) {
  if (patch_side < 1) throw ValidationError("patch side must be positive");
  if (patch_side > rows || patch_side > cols) {
    throw ValidationError("patch side " + std::to_string(patch_side) + " exceeds the " +
                          std::to_string(rows) + "x" + std::to_string(cols) + " source");
  }
  if (stride < 1 || stride > patch_side) {
    throw ValidationError("stride must lie in [1, patch side]");
  }
  row_offsets_ = axis_offsets(rows, patch_side, stride);
  col_offsets_ = axis_offsets(cols, patch_side, stride);
}

std::pair<Eigen::Index, Eigen::Index> PatchGrid::origin(Eigen::Index i) const {
  const auto per_row = static_cast<Eigen::Index>(col_offsets_.size());
  return {row_offsets_[i / per_row], col_offsets_[i % per_row]};
}

Eigen::ArrayXXd PatchGrid::coverage() const {
  Eigen::ArrayXXd c = Eigen::ArrayXXd::Zero(rows_, cols_);
  for (Eigen::Index i = 0; i < count(); ++i) {
    const auto [r, k] = origin(i);
    c.block(r, k, side_, side_) += 1.0;
  }
  return c;
}

Eigen::MatrixXd extract_patches(const Eigen::ArrayXXd& source, const PatchGrid& grid) {
  if (source.rows() != grid.rows() || source.cols() != grid.cols()) {
    throw ValidationError("source shape does not match the patch grid");
  }
  const int d = grid.patch_side();
  Eigen::MatrixXd out(d * d, grid.count());
  for (Eigen::Index i = 0; i < grid.count(); ++i) {
    const auto [r, c] = grid.origin(i);
    Eigen::Map<Eigen::MatrixXd>(out.col(i).data(), d, d) = source.block(r, c, d, d).matrix();
  }
  return out;
}

Eigen::ArrayXXd assemble_patches(const Eigen::MatrixXd& patches, const PatchGrid& grid) {
  const int d = grid.patch_side();
  if (patches.rows() != d * d || patches.cols() != grid.count()) {
    throw ValidationError("patch matrix is " + std::to_string(patches.rows()) + "x" +
                          std::to_string(patches.cols()) + ", grid needs " +
                          std::to_string(d * d) + "x" + std::to_string(grid.count()));
  }
  Eigen::ArrayXXd sum = Eigen::ArrayXXd::Zero(grid.rows(), grid.cols());
  for (Eigen::Index i = 0; i < grid.count(); ++i) {
    const auto [r, c] = grid.origin(i);
    sum.block(r, c, d, d) += Eigen::Map<const Eigen::ArrayXXd>(patches.col(i).data(), d, d);
  }
  return sum / grid.coverage();
}

}  // namespace sinodiff

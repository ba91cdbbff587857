#pragma once

#include <vector>

#include <Eigen/Core>

namespace sinodiff {

/// Overlapped d x d windows over a rows x cols array. Offsets along each
/// axis are 0, stride, 2 stride, ...; when the last window would not reach
/// the edge an extra window is clamped flush to it.
class PatchGrid {
 public:
  PatchGrid(Eigen::Index rows, Eigen::Index cols, int patch_side, int stride);

  int patch_side() const { return side_; }
  int stride() const { return stride_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const std::vector<Eigen::Index>& row_offsets() const { return row_offsets_; }
  const std::vector<Eigen::Index>& col_offsets() const { return col_offsets_; }
  Eigen::Index count() const {
    return static_cast<Eigen::Index>(row_offsets_.size() * col_offsets_.size());
  }
  /// Top-left corner of patch i (row-offset major).
  std::pair<Eigen::Index, Eigen::Index> origin(Eigen::Index i) const;

  /// How many windows cover each pixel.
  Eigen::ArrayXXd coverage() const;

 private:
  Eigen::Index rows_, cols_;
  int side_, stride_;
  std::vector<Eigen::Index> row_offsets_, col_offsets_;
};

/// One column per patch, each patch flattened column-major.
Eigen::MatrixXd extract_patches(const Eigen::ArrayXXd& source, const PatchGrid& grid);

/// Per-pixel average of every covering patch.
Eigen::ArrayXXd assemble_patches(const Eigen::MatrixXd& patches, const PatchGrid& grid);

/// Noisy patches, their clean conditions and the view-mask patches, all on
/// the same grid.
struct PatchSet {
  Eigen::MatrixXd patches;
  Eigen::MatrixXd conditions;
  Eigen::MatrixXd masks;
};

}  // namespace sinodiff

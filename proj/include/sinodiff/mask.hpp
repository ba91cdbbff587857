#pragma once

#include <vector>

#include "sinodiff/geometry.hpp"

namespace sinodiff {

/// Which projection views were acquired. Row i of the broadcast matrix is
/// all ones when view i is sampled and all zeros otherwise.
class ViewMask {
 public:
  explicit ViewMask(std::vector<bool> sampled);

  /// Every `n_full / n_kept`-th view starting at view 0 (rounded down for
  /// non-divisible counts).
  static ViewMask uniform(int n_full, int n_kept);
  static ViewMask from_indices(int n_full, const std::vector<int>& indices);
  static ViewMask all(int n_full) { return ViewMask(std::vector<bool>(n_full, true)); }

  int size() const { return static_cast<int>(sampled_.size()); }
  int count() const;
  bool operator[](int i) const { return sampled_[i]; }
  std::vector<int> indices() const;
  /// n_views x n_detectors matrix of 0/1.
  Eigen::ArrayXXd matrix(int n_detectors) const;

 private:
  std::vector<bool> sampled_;
};

/// Keep only the sampled rows, in order.
Sinogram apply_mask(const Sinogram& full, const ViewMask& mask);

/// Inverse placement: sampled rows carry `down`, discarded rows are zero.
Sinogram embed_mask(const Sinogram& down, const ViewMask& mask);

/// FBP of a down-sampled sinogram: zero-fill the missing views and rescale
/// by n_full / n_kept so amplitudes match a full scan.
Image fbp_sparse(const Sinogram& down, const ViewMask& mask, const FanBeamGeometry& geometry);

/// Measured rows kept verbatim, discarded rows re-projected from the sparse
/// FBP image.
Sinogram pseudo_full_sinogram(const Sinogram& measured, const ViewMask& mask,
                              const FanBeamGeometry& geometry);

}  // namespace sinodiff

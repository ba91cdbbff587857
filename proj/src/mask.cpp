#include "sinodiff/mask.hpp"

#include <algorithm>
#include <string>

#include "sinodiff/error.hpp"
#include "sinodiff/projector.hpp"

namespace sinodiff {

ViewMask::ViewMask(std::vector<bool> sampled) : sampled_(std::move(sampled)) {
  if (std::none_of(sampled_.begin(), sampled_.end(), [](bool b) { return b; })) {
    throw ValidationError("view mask must sample at least one view");
  }
}

ViewMask ViewMask::uniform(int n_full, int n_kept) {
  if (n_kept < 1 || n_kept > n_full) {
    throw ValidationError("kept view count " + std::to_string(n_kept) + " must lie in [1, " +
                          std::to_string(n_full) + "]");
  }
  std::vector<bool> sampled(n_full, false);
  for (long i = 0; i < n_kept; ++i) sampled[i * n_full / n_kept] = true;
  return ViewMask(std::move(sampled));
}

ViewMask ViewMask::from_indices(int n_full, const std::vector<int>& indices) {
  std::vector<bool> sampled(n_full, false);
  for (int i : indices) {
    if (i < 0 || i >= n_full) {
      throw ValidationError("view index " + std::to_string(i) + " out of range");
    }
    if (sampled[i]) throw ValidationError("view index " + std::to_string(i) + " repeated");
    sampled[i] = true;
  }
  return ViewMask(std::move(sampled));
}

int ViewMask::count() const {
  return static_cast<int>(std::count(sampled_.begin(), sampled_.end(), true));
}

std::vector<int> ViewMask::indices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (sampled_[i]) out.push_back(i);
  }
  return out;
}

Eigen::ArrayXXd ViewMask::matrix(int n_detectors) const {
  Eigen::ArrayXXd m(size(), n_detectors);
  for (int i = 0; i < size(); ++i) m.row(i).setConstant(sampled_[i] ? 1.0 : 0.0);
  return m;
}

Sinogram apply_mask(const Sinogram& full, const ViewMask& mask) {
  if (full.views() != mask.size()) {
    throw ValidationError("mask length " + std::to_string(mask.size()) +
                          " does not match sinogram views " + std::to_string(full.views()));
  }
  const auto idx = mask.indices();
  Sinogram out{Eigen::ArrayXXd(static_cast<Eigen::Index>(idx.size()), full.detectors())};
  for (std::size_t r = 0; r < idx.size(); ++r) out.values.row(r) = full.values.row(idx[r]);
  return out;
}

Sinogram embed_mask(const Sinogram& down, const ViewMask& mask) {
  if (down.views() != mask.count()) {
    throw ValidationError("down-sampled sinogram has " + std::to_string(down.views()) +
                          " views, mask samples " + std::to_string(mask.count()));
  }
  const auto idx = mask.indices();
  Sinogram out{Eigen::ArrayXXd::Zero(mask.size(), down.detectors())};
  for (std::size_t r = 0; r < idx.size(); ++r) out.values.row(idx[r]) = down.values.row(r);
  return out;
}

Image fbp_sparse(const Sinogram& down, const ViewMask& mask, const FanBeamGeometry& geometry) {
  Sinogram filled = embed_mask(down, mask);
  filled.values *= static_cast<double>(mask.size()) / mask.count();
  return fbp(filled, geometry);
}

Sinogram pseudo_full_sinogram(const Sinogram& measured, const ViewMask& mask,
                              const FanBeamGeometry& geometry) {
  Sinogram out = embed_mask(measured, mask);
  if (mask.count() == mask.size()) return out;
  const Sinogram reprojected = project(fbp_sparse(measured, mask, geometry), geometry);
  for (int i = 0; i < mask.size(); ++i) {
    if (!mask[i]) out.values.row(i) = reprojected.values.row(i);
  }
  return out;
}

}  // namespace sinodiff

#pragma once

#include <cstdint>

#include "sinodiff/geometry.hpp"
#include "sinodiff/mask.hpp"
#include "sinodiff/samplers.hpp"
#include "sinodiff/score.hpp"

namespace sinodiff {

enum class SolverFamily {
  /// Probability-flow ODE with the NFE-budgeted DPM-Solver schedule.
  Ode,
  /// Reverse SDE, one Euler-Maruyama step per evaluation.
  Sde,
};

struct SamplerSettings {
  int nfe = 100;
  SolverFamily family = SolverFamily::Ode;
  TimeSpacing spacing = TimeSpacing::UniformT;
  ConditioningParams conditioning;
  int patch_side = 16;
  int stride = 8;
  std::uint64_t seed = 0;
  int workers = 1;
  /// After the last step at t_min, blend in the undiffused condition (the
  /// diffusion of the condition to t = 0).
  bool final_conditioning = true;

  void validate() const;
};

struct Reconstruction {
  Sinogram pseudo_full;
  Sinogram sinogram;
  Image image;
  int nfe_per_patch = 0;
  Eigen::Index patch_count = 0;
};

/// Patch-wise conditional sampling of a full sinogram from sparse views,
/// followed by FBP:
///   1. pseudo-full sinogram (measured rows + re-projected sparse FBP),
///   2. overlapped patches of it and of the view mask,
///   3. per patch, from N(0, I): at each step diffuse the condition to the
///      current time, blend it in, then advance the sampler,
///   4. average the patches back together and reconstruct.
/// Each patch owns an RNG stream keyed by (seed, patch index) and patches
/// are batched in fixed chunks, so the output does not depend on `workers`.
Reconstruction reconstruct(const Sinogram& measured, const ViewMask& mask,
                           const FanBeamGeometry& geometry, const ScoreEvaluator& evaluator,
                           const SamplerSettings& settings);

/// Stream seed for one patch.
std::uint64_t patch_seed(std::uint64_t seed, std::uint64_t patch_index);

}  // namespace sinodiff

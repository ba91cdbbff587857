#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sinodiff/denoiser.hpp"
#include "sinodiff/geometry.hpp"

namespace sinodiff {

enum class LossWeighting {
  /// g(t)^2 / b(t)^2 on the noise-prediction error: the score-matching loss
  /// weighted by g^2, rewritten in noise space.
  Likelihood,
  /// Plain noise-prediction error.
  Uniform,
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int iterations = 2000;
  int batch_size = 32;
  DenoiserArchitecture architecture;
  std::uint64_t seed = 0;
  LossWeighting weighting = LossWeighting::Likelihood;

  void validate() const;
};

struct TrainResult {
  PatchDenoiser model;
  std::vector<double> loss_trace;  // one entry per iteration
};

/// Sinograms of `count` random ellipse phantoms (seeds seed, seed + 1, ...).
std::vector<Sinogram> phantom_training_set(const FanBeamGeometry& geometry, int count,
                                           std::uint64_t seed);

/// Dataset mean and standard deviation of every sinogram value.
Normalization dataset_normalization(const std::vector<Sinogram>& dataset);

/// Per-sample loss weight for time t.
double loss_weight(LossWeighting weighting, const Schedule<double>& schedule, double t);

/// Adam with the usual moment constants.
class Adam {
 public:
  explicit Adam(Eigen::Index n, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

 private:
  Eigen::VectorXd m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

/// One sample of each iteration: sinogram drawn uniformly, patch position
/// drawn uniformly, t ~ U[t_min, 1], noise ~ N(0, I). The optional callback
/// sees (iteration, loss).
TrainResult train(const std::vector<Sinogram>& dataset, const TrainConfig& config,
                  const Schedule<double>& schedule,
                  const std::function<void(int, double)>& progress = {});

/// Mean of the trailing `window` entries ending at `iteration` (inclusive, 1-based).
double smoothed_loss(const std::vector<double>& trace, int iteration, int window = 100);

}  // namespace sinodiff

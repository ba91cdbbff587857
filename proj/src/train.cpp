#include "sinodiff/train.hpp"

#include <cmath>
#include <random>

#include "sinodiff/error.hpp"
#include "sinodiff/phantom.hpp"
#include "sinodiff/projector.hpp"

namespace sinodiff {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (iterations < 1) throw ValidationError("iterations must be positive");
  if (batch_size < 1) throw ValidationError("batch_size must be positive");
  architecture.validate();
}

std::vector<Sinogram> phantom_training_set(const FanBeamGeometry& geometry, int count,
                                           std::uint64_t seed) {
  if (count < 1) throw ValidationError("training set needs at least one phantom");
  std::vector<Sinogram> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    out.push_back(project(random_ellipses(geometry.image_size, geometry.pixel_size, seed + i),
                          geometry));
  }
  return out;
}

Normalization dataset_normalization(const std::vector<Sinogram>& dataset) {
  double sum = 0.0;
  double count = 0.0;
  for (const auto& s : dataset) {
    sum += s.values.sum();
    count += static_cast<double>(s.values.size());
  }
  const double mean = sum / count;
  double sq = 0.0;
  for (const auto& s : dataset) sq += (s.values - mean).square().sum();
  const double std = std::sqrt(sq / count);
  return {mean, std > 0.0 ? std : 1.0};
}

double loss_weight(LossWeighting weighting, const Schedule<double>& schedule, double t) {
  if (weighting == LossWeighting::Uniform) return 1.0;
  const double b = schedule.sigma(t);
  return schedule.diffusion_sq(t) / (b * b);
}

Adam::Adam(Eigen::Index n, double learning_rate, double beta1, double beta2, double epsilon)
    : m_(Eigen::VectorXd::Zero(n)),
      v_(Eigen::VectorXd::Zero(n)),
      lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

TrainResult train(const std::vector<Sinogram>& dataset, const TrainConfig& config,
                  const Schedule<double>& schedule,
                  const std::function<void(int, double)>& progress) {
  if (dataset.empty()) throw ValidationError("training dataset is empty");
  config.validate();
  const int d = config.architecture.patch_side;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!dataset[i].values.allFinite()) {
      throw NumericError("training sinogram " + std::to_string(i) + " contains non-finite values");
    }
  }
  for (const auto& s : dataset) {
    if (s.views() < d || s.detectors() < d) {
      throw ValidationError("patch side " + std::to_string(d) + " exceeds a " +
                            std::to_string(s.views()) + "x" + std::to_string(s.detectors()) +
                            " sinogram");
    }
  }

  const Normalization norm = dataset_normalization(dataset);
  PatchDenoiser model(config.architecture, schedule, norm);
  model.initialize(config.seed);

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;

  const int batch = config.batch_size;
  const int inputs = config.architecture.inputs();
  Eigen::MatrixXd y(inputs, batch);
  Eigen::MatrixXd noise(inputs, batch);
  Eigen::VectorXd t(batch);
  Eigen::VectorXd w(batch);

  Eigen::VectorXd flat = model.params().flatten();
  Adam adam(flat.size(), config.learning_rate);
  DenoiserParams grad = DenoiserParams::zeros(config.architecture);
  std::vector<double> trace;
  trace.reserve(config.iterations);

  const double t_min = schedule.t_min();
  for (int it = 0; it < config.iterations; ++it) {
    for (int j = 0; j < batch; ++j) {
      const auto& sino = dataset[static_cast<std::size_t>(unit(rng) * dataset.size()) % dataset.size()];
      const auto r0 = static_cast<Eigen::Index>(unit(rng) * (sino.views() - d + 1));
      const auto c0 = static_cast<Eigen::Index>(unit(rng) * (sino.detectors() - d + 1));
      t(j) = t_min + (1.0 - t_min) * unit(rng);
      const double a = schedule.alpha(t(j));
      const double b = schedule.sigma(t(j));
      for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) {
          const int i = c * d + r;
          const double clean = (sino.values(r0 + r, c0 + c) - norm.offset) / norm.scale;
          noise(i, j) = normal(rng);
          y(i, j) = a * clean + b * noise(i, j);
        }
      }
      w(j) = loss_weight(config.weighting, schedule, t(j));
    }
    const double value = model.loss(y, t, noise, w, &grad);
    if (!std::isfinite(value)) {
      throw NumericError("training loss became non-finite at iteration " + std::to_string(it + 1));
    }
    trace.push_back(value);
    adam.step(flat, grad.flatten());
    model.params().unflatten(flat);
    if (progress) progress(it + 1, value);
  }
  return {std::move(model), std::move(trace)};
}

double smoothed_loss(const std::vector<double>& trace, int iteration, int window) {
  if (iteration < 1 || iteration > static_cast<int>(trace.size())) {
    throw ValidationError("smoothed_loss: iteration out of range");
  }
  const int start = std::max(0, iteration - window);
  double sum = 0.0;
  for (int i = start; i < iteration; ++i) sum += trace[i];
  return sum / (iteration - start);
}

}  // namespace sinodiff

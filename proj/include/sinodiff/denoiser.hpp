#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "sinodiff/score.hpp"
#include "sinodiff/tensor_io.hpp"

namespace sinodiff {

struct DenoiserArchitecture {
  int patch_side = 16;
  int hidden = 64;
  int time_features = 32;

  int inputs() const { return patch_side * patch_side; }
  void validate() const;
};

void to_json(nlohmann::json& j, const DenoiserArchitecture& a);
void from_json(const nlohmann::json& j, DenoiserArchitecture& a);

/// Weights of the two-hidden-layer network
///   h1 = silu(W1 y + U1 e(t) + b1)
///   h2 = silu(W2 h1 + b2)
///   D  = W3 h2 + b3
/// with e(t) a sinusoidal embedding of 1000 t. D estimates the clean patch;
/// the noise prediction is eps = (y - a(t) D) / b(t). The hidden layers are
/// narrower than the patch, so D lives on a learned low-dimensional set and
/// the network cannot simply echo the noise back.
struct DenoiserParams {
  Eigen::MatrixXd w1, u1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  static DenoiserParams zeros(const DenoiserArchitecture& arch);
  Eigen::Index size() const;
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);
  bool all_finite() const;
};

/// Sinusoidal features of 1000 t, one column per time.
Eigen::MatrixXd time_embedding(const Eigen::VectorXd& t, int features);

/// Small trainable patch denoiser. Works on normalized patches; the
/// normalization is carried alongside the weights so callers can map raw
/// sinogram values into the model's space.
class PatchDenoiser final : public ScoreEvaluator {
 public:
  PatchDenoiser(DenoiserArchitecture arch, Schedule<double> schedule, Normalization norm = {});

  /// Scaled-normal initialization from `seed`.
  void initialize(std::uint64_t seed);

  Eigen::MatrixXd eps(const Eigen::MatrixXd& y, double t) const override;
  /// Per-column times.
  Eigen::MatrixXd eps(const Eigen::MatrixXd& y, const Eigen::VectorXd& t) const;
  Eigen::MatrixXd score(const Eigen::MatrixXd& y, double t) const override;
  /// Clean-patch estimate D(y, t), per-column times.
  Eigen::MatrixXd denoise(const Eigen::MatrixXd& y, const Eigen::VectorXd& t) const;

  const Schedule<double>& schedule() const override { return schedule_; }
  std::optional<Normalization> normalization() const override { return norm_; }
  int patch_side() const override { return arch_.patch_side; }

  const DenoiserArchitecture& architecture() const { return arch_; }
  const DenoiserParams& params() const { return params_; }
  DenoiserParams& params() { return params_; }
  Eigen::Index parameter_count() const { return params_.size(); }

  /// Weighted mean-squared noise-prediction loss over a batch,
  ///   (1/n) sum_j w_j * mean_i (eps_theta(y_j, t_j)_i - eps_j,i)^2,
  /// and its gradient with respect to every parameter when `grad` is set.
  double loss(const Eigen::MatrixXd& y, const Eigen::VectorXd& t, const Eigen::MatrixXd& target,
              const Eigen::VectorXd& weights, DenoiserParams* grad = nullptr) const;

 private:
  DenoiserArchitecture arch_;
  Schedule<double> schedule_;
  Normalization norm_;
  DenoiserParams params_;
};

/// Writes weights to `path` (PDCT multi-tensor, float64) and the
/// architecture descriptor to descriptor_path(path).
void save_weights(const PatchDenoiser& model, const std::filesystem::path& path);
PatchDenoiser load_weights(const std::filesystem::path& path);
std::filesystem::path descriptor_path(const std::filesystem::path& weights);

}  // namespace sinodiff

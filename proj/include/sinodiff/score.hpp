#pragma once

#include <optional>

#include <Eigen/Core>

#include "sinodiff/schedule.hpp"

namespace sinodiff {

/// Affine map between raw sinogram values and the model's working space:
/// normalized = (raw - offset) / scale.
struct Normalization {
  double offset = 0.0;
  double scale = 1.0;
};

/// Maps a batch of flattened patches (one per column) at time t to the
/// score grad_y log p_t(y). Implementations must be deterministic and safe
/// to call concurrently.
class ScoreEvaluator {
 public:
  virtual ~ScoreEvaluator() = default;

  virtual Eigen::MatrixXd score(const Eigen::MatrixXd& y, double t) const = 0;
  /// Noise prediction; defaults to -b(t) * score.
  virtual Eigen::MatrixXd eps(const Eigen::MatrixXd& y, double t) const;

  virtual const Schedule<double>& schedule() const = 0;
  /// Data scaling the model was trained under, if any.
  virtual std::optional<Normalization> normalization() const { return std::nullopt; }
  /// Required patch side, or 0 when any size works.
  virtual int patch_side() const { return 0; }
};

/// score = -eps / b(t).
template <typename Derived>
Eigen::MatrixXd score_from_eps(const Eigen::MatrixBase<Derived>& eps, double t,
                               const Schedule<double>& schedule) {
  schedule.check_range(t);
  return -eps / schedule.sigma(t);
}

/// eps = -b(t) * score.
template <typename Derived>
Eigen::MatrixXd eps_from_score(const Eigen::MatrixBase<Derived>& score, double t,
                               const Schedule<double>& schedule) {
  schedule.check_range(t);
  return -schedule.sigma(t) * score;
}

/// Exact score of Gaussian data N(mean, std^2 I) pushed through the
/// perturbation kernel: -(y - a mean) / (a^2 std^2 + b^2).
class AnalyticGaussianScore final : public ScoreEvaluator {
 public:
  AnalyticGaussianScore(Schedule<double> schedule, double mean, double std);
  /// Per-pixel mean (length = rows of the batches evaluated).
  AnalyticGaussianScore(Schedule<double> schedule, Eigen::VectorXd mean, double std);

  Eigen::MatrixXd score(const Eigen::MatrixXd& y, double t) const override;
  const Schedule<double>& schedule() const override { return schedule_; }

  /// Log density of the time-t marginal for one column; used by tests.
  double log_density(const Eigen::VectorXd& y, double t) const;

 private:
  Schedule<double> schedule_;
  std::optional<double> scalar_mean_;
  Eigen::VectorXd mean_;
  double std_;
};

/// Closed-form score without the evaluator wrapper. Valid on [0, 1].
template <typename Derived>
Eigen::ArrayXXd analytic_score(const Eigen::DenseBase<Derived>& y, double t, double mean,
                               double std, const Schedule<double>& schedule) {
  if (!(std > 0.0)) throw ValidationError("analytic score requires std > 0");
  const double a = schedule.alpha(t);
  const double b = schedule.sigma(t);
  return -(y.derived().array() - a * mean) / (a * a * std * std + b * b);
}

}  // namespace sinodiff

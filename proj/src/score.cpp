#include "sinodiff/score.hpp"

#include <cmath>
#include <numbers>

namespace sinodiff {

Eigen::MatrixXd ScoreEvaluator::eps(const Eigen::MatrixXd& y, double t) const {
  return eps_from_score(score(y, t), t, schedule());
}

AnalyticGaussianScore::AnalyticGaussianScore(Schedule<double> schedule, double mean, double std)
    : schedule_(schedule), scalar_mean_(mean), std_(std) {
  if (!(std > 0.0)) throw ValidationError("analytic score requires std > 0");
}

AnalyticGaussianScore::AnalyticGaussianScore(Schedule<double> schedule, Eigen::VectorXd mean,
                                             double std)
    : schedule_(schedule), mean_(std::move(mean)), std_(std) {
  if (!(std > 0.0)) throw ValidationError("analytic score requires std > 0");
}

Eigen::MatrixXd AnalyticGaussianScore::score(const Eigen::MatrixXd& y, double t) const {
  const double a = schedule_.alpha(t);
  const double b = schedule_.sigma(t);
  const double var = a * a * std_ * std_ + b * b;
  if (scalar_mean_) return -(y.array() - a * *scalar_mean_) / var;
  if (mean_.size() != y.rows()) {
    throw ValidationError("analytic score mean has " + std::to_string(mean_.size()) +
                          " entries, batch rows are " + std::to_string(y.rows()));
  }
  return -((y.colwise() - a * mean_).array() / var);
}

double AnalyticGaussianScore::log_density(const Eigen::VectorXd& y, double t) const {
  const double a = schedule_.alpha(t);
  const double b = schedule_.sigma(t);
  const double var = a * a * std_ * std_ + b * b;
  const Eigen::VectorXd centered =
      scalar_mean_ ? Eigen::VectorXd(y.array() - a * *scalar_mean_) : Eigen::VectorXd(y - a * mean_);
  return -0.5 * centered.squaredNorm() / var -
         0.5 * y.size() * std::log(2.0 * std::numbers::pi * var);
}

}  // namespace sinodiff

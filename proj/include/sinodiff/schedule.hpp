#pragma once

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "sinodiff/error.hpp"

namespace sinodiff {

/// Variance-preserving diffusion schedule over continuous t in [0, 1].
///
///   beta(t) = 1000 (beta_1 + t (beta_T - beta_1))
///   B(t)    = int_0^t beta = 1000 (beta_1 t + (beta_T - beta_1) t^2 / 2)
///   a(t)    = exp(-B/2),  b(t) = sqrt(1 - exp(-B)),  lambda(t) = log(a / b)
///
/// a(t) is the signal coefficient (eta_t) and b(t) the noise level
/// (sigma_t). Times below t_min are rejected wherever b(t) divides.
template <typename Scalar = double>
class Schedule {
 public:
  Schedule(Scalar beta_1 = Scalar(1e-4), Scalar beta_T = Scalar(0.02), Scalar t_min = Scalar(1e-3))
      : beta_1_(beta_1), beta_T_(beta_T), t_min_(t_min) {
    if (!(beta_1 > 0) || !(beta_T > beta_1)) {
      throw ValidationError("schedule requires 0 < beta_1 < beta_T");
    }
    if (!(t_min > 0) || !(t_min < 1)) throw ValidationError("schedule requires 0 < t_min < 1");
  }

  Scalar beta_1() const { return beta_1_; }
  Scalar beta_T() const { return beta_T_; }
  Scalar t_min() const { return t_min_; }
  static constexpr Scalar t_max() { return Scalar(1); }

  Scalar beta(Scalar t) const {
    check_unit(t);
    return Scalar(1000) * (beta_1_ + t * (beta_T_ - beta_1_));
  }

  Scalar beta_integral(Scalar t) const {
    check_unit(t);
    return Scalar(1000) * (beta_1_ * t + (beta_T_ - beta_1_) * t * t / Scalar(2));
  }

  Scalar alpha(Scalar t) const { return std::exp(-beta_integral(t) / Scalar(2)); }
  Scalar sigma(Scalar t) const { return std::sqrt(-std::expm1(-beta_integral(t))); }

  /// Drift and squared diffusion of the forward SDE: f = -beta/2, g^2 = beta.
  Scalar drift(Scalar t) const { return -beta(t) / Scalar(2); }
  Scalar diffusion_sq(Scalar t) const { return beta(t); }

  Scalar log_snr(Scalar t) const {
    check_range(t);
    return -std::log(std::expm1(beta_integral(t))) / Scalar(2);
  }

  Scalar lambda_max() const { return log_snr(t_min_); }
  Scalar lambda_min() const { return log_snr(Scalar(1)); }

  /// Closed-form inverse of log_snr: B = log(1 + e^{-2 lambda}), then the
  /// positive root of the quadratic B(t).
  Scalar inverse_log_snr(Scalar lambda) const {
    const Scalar lo = lambda_min();
    const Scalar hi = lambda_max();
    const Scalar slack = Scalar(1e-12) * (Scalar(1) + std::abs(lo) + std::abs(hi));
    if (!(lambda >= lo - slack && lambda <= hi + slack)) {
      throw ValidationError("log-SNR " + std::to_string(static_cast<double>(lambda)) +
                            " outside [" + std::to_string(static_cast<double>(lo)) + ", " +
                            std::to_string(static_cast<double>(hi)) + "]");
    }
    const Scalar big_b = std::log1p(std::exp(Scalar(-2) * lambda)) / Scalar(1000);
    const Scalar slope = beta_T_ - beta_1_;
    return Scalar(2) * big_b / (beta_1_ + std::sqrt(beta_1_ * beta_1_ + Scalar(2) * slope * big_b));
  }

  /// a(t) y0 + b(t) noise.
  template <typename A, typename B>
  auto perturb(const Eigen::DenseBase<A>& y0, const Eigen::DenseBase<B>& noise, Scalar t) const {
    if (y0.rows() != noise.rows() || y0.cols() != noise.cols()) {
      throw ValidationError("perturb: shape mismatch between data and noise");
    }
    return (alpha(t) * y0.derived().array() + sigma(t) * noise.derived().array()).eval();
  }

  void check_range(Scalar t) const {
    if (!(t >= t_min_ && t <= Scalar(1))) {
      throw ValidationError("time " + std::to_string(static_cast<double>(t)) + " outside [" +
                            std::to_string(static_cast<double>(t_min_)) + ", 1]");
    }
  }

 private:
  static void check_unit(Scalar t) {
    if (!(t >= 0 && t <= Scalar(1))) {
      throw ValidationError("time " + std::to_string(static_cast<double>(t)) + " outside [0, 1]");
    }
  }

  Scalar beta_1_;
  Scalar beta_T_;
  Scalar t_min_;
};

}  // namespace sinodiff

#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sinodiff/error.hpp"
#include "sinodiff/schedule.hpp"

namespace sinodiff {

/// Inpainting weights: `gamma` on measured-view pixels, `eta_c` elsewhere.
struct ConditioningParams {
  double gamma = 1.0;
  double eta_c = 0.1;

  void validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in [0, 1]");
    if (!(eta_c >= 0.0 && eta_c <= 1.0)) throw ValidationError("eta_c must lie in [0, 1]");
  }
};

template <typename Derived>
void fill_standard_normal(Eigen::DenseBase<Derived>& out, std::mt19937_64& rng) {
  std::normal_distribution<typename Derived::Scalar> normal;
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = normal(rng);
}

/// Blend the diffused condition into the current state:
///   m * (gamma z + (1 - gamma) y) + (1 - m) * (eta_c z + (1 - eta_c) y).
template <typename DY, typename DZ, typename DM>
typename DY::PlainObject condition_patch(const Eigen::DenseBase<DY>& y, const Eigen::DenseBase<DZ>& z,
                                         const Eigen::DenseBase<DM>& m,
                                         const ConditioningParams& params) {
  if (y.rows() != z.rows() || y.cols() != z.cols() || y.rows() != m.rows() ||
      y.cols() != m.cols()) {
    throw ValidationError("condition_patch: shape mismatch");
  }
  params.validate();
  typename DY::PlainObject out(y.rows(), y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const auto mv = m(i, j);
      if (mv != 0 && mv != 1) throw ValidationError("condition_patch: mask must be binary");
      const double w = mv == 1 ? params.gamma : params.eta_c;
      out(i, j) = w == 1.0 ? z(i, j) : w * z(i, j) + (1.0 - w) * y(i, j);
    }
  }
  return out;
}

/// a(t) z + b(t) xi with xi drawn from `rng`.
template <typename Derived>
typename Derived::PlainObject diffuse_condition(const Eigen::DenseBase<Derived>& z, double t,
                                                const Schedule<double>& schedule,
                                                std::mt19937_64& rng) {
  typename Derived::PlainObject noise(z.rows(), z.cols());
  fill_standard_normal(noise, rng);
  return schedule.perturb(z, noise, t);
}

/// One reverse-time Euler-Maruyama step of the VP SDE with dt < 0:
///   y - (beta/2 y + beta s(y, t)) dt + sqrt(beta |dt|) xi.
template <typename Derived, typename ScoreFn, typename DN>
typename Derived::PlainObject euler_maruyama_step(const Schedule<double>& schedule,
                                                  const Eigen::MatrixBase<Derived>& y, double t,
                                                  double dt, ScoreFn&& score,
                                                  const Eigen::MatrixBase<DN>& noise) {
  if (!(dt < 0.0)) throw ValidationError("euler_maruyama_step requires dt < 0");
  schedule.check_range(t);
  if (t + dt < schedule.t_min() - 1e-12) {
    throw ValidationError("euler_maruyama_step leaves the schedule range");
  }
  const double beta = schedule.beta(t);
  typename Derived::PlainObject s = score(y.derived(), t);
  return y - (0.5 * beta * y + beta * s) * dt + std::sqrt(beta * -dt) * noise;
}

template <typename Derived, typename ScoreFn>
typename Derived::PlainObject euler_maruyama_step(const Schedule<double>& schedule,
                                                  const Eigen::MatrixBase<Derived>& y, double t,
                                                  double dt, ScoreFn&& score, std::mt19937_64& rng) {
  typename Derived::PlainObject noise(y.rows(), y.cols());
  fill_standard_normal(noise, rng);
  return euler_maruyama_step(schedule, y, t, dt, score, noise);
}

namespace detail {
inline void check_step(const Schedule<double>& schedule, double t_prev, double t_next) {
  schedule.check_range(t_prev);
  schedule.check_range(t_next);
  if (!(t_next < t_prev)) {
    throw ValidationError("solver step needs t_next < t_prev (got " + std::to_string(t_prev) +
                          " -> " + std::to_string(t_next) + ")");
  }
}
}  // namespace detail

/// First-order exponential-integrator step of the probability-flow ODE in
/// half-log-SNR lambda. One noise-prediction evaluation.
template <typename Derived, typename EpsFn>
typename Derived::PlainObject dpm_solver_1_step(const Schedule<double>& schedule,
                                                const Eigen::MatrixBase<Derived>& y,
                                                double t_prev, double t_next, EpsFn&& eps) {
  detail::check_step(schedule, t_prev, t_next);
  const double h = schedule.log_snr(t_next) - schedule.log_snr(t_prev);
  const typename Derived::PlainObject e0 = eps(y.derived(), t_prev);
  return (schedule.alpha(t_next) / schedule.alpha(t_prev)) * y -
         (schedule.sigma(t_next) * std::expm1(h)) * e0;
}

/// Second-order step with the midpoint in lambda. Two evaluations.
template <typename Derived, typename EpsFn>
typename Derived::PlainObject dpm_solver_2_step(const Schedule<double>& schedule,
                                                const Eigen::MatrixBase<Derived>& y,
                                                double t_prev, double t_next, EpsFn&& eps) {
  detail::check_step(schedule, t_prev, t_next);
  const double lam_prev = schedule.log_snr(t_prev);
  const double h = schedule.log_snr(t_next) - lam_prev;
  const double s = schedule.inverse_log_snr(lam_prev + 0.5 * h);
  const double a_prev = schedule.alpha(t_prev);

  const typename Derived::PlainObject e0 = eps(y.derived(), t_prev);
  const typename Derived::PlainObject u =
      (schedule.alpha(s) / a_prev) * y - (schedule.sigma(s) * std::expm1(0.5 * h)) * e0;
  const typename Derived::PlainObject e1 = eps(u, s);
  return (schedule.alpha(t_next) / a_prev) * y - (schedule.sigma(t_next) * std::expm1(h)) * e1;
}

/// Third-order step with intermediate nodes at lambda fractions 1/3, 2/3.
/// Three evaluations.
template <typename Derived, typename EpsFn>
typename Derived::PlainObject dpm_solver_3_step(const Schedule<double>& schedule,
                                                const Eigen::MatrixBase<Derived>& y,
                                                double t_prev, double t_next, EpsFn&& eps) {
  detail::check_step(schedule, t_prev, t_next);
  constexpr double r1 = 1.0 / 3.0;
  constexpr double r2 = 2.0 / 3.0;
  const double lam_prev = schedule.log_snr(t_prev);
  const double h = schedule.log_snr(t_next) - lam_prev;
  const double s1 = schedule.inverse_log_snr(lam_prev + r1 * h);
  const double s2 = schedule.inverse_log_snr(lam_prev + r2 * h);
  const double a_prev = schedule.alpha(t_prev);

  const typename Derived::PlainObject e0 = eps(y.derived(), t_prev);
  const typename Derived::PlainObject u1 =
      (schedule.alpha(s1) / a_prev) * y - (schedule.sigma(s1) * std::expm1(r1 * h)) * e0;
  const typename Derived::PlainObject d1 = eps(u1, s1) - e0;
  const double phi2 = std::expm1(r2 * h) / (r2 * h) - 1.0;
  const typename Derived::PlainObject u2 = (schedule.alpha(s2) / a_prev) * y -
                                           (schedule.sigma(s2) * std::expm1(r2 * h)) * e0 -
                                           (schedule.sigma(s2) * r2 / r1 * phi2) * d1;
  const typename Derived::PlainObject d2 = eps(u2, s2) - e0;
  const double phi = std::expm1(h) / h - 1.0;
  return (schedule.alpha(t_next) / a_prev) * y - (schedule.sigma(t_next) * std::expm1(h)) * e0 -
         (schedule.sigma(t_next) / r2 * phi) * d2;
}

template <typename Derived, typename EpsFn>
typename Derived::PlainObject dpm_solver_step(int order, const Schedule<double>& schedule,
                                              const Eigen::MatrixBase<Derived>& y, double t_prev,
                                              double t_next, EpsFn&& eps) {
  switch (order) {
    case 1: return dpm_solver_1_step(schedule, y, t_prev, t_next, eps);
    case 2: return dpm_solver_2_step(schedule, y, t_prev, t_next, eps);
    case 3: return dpm_solver_3_step(schedule, y, t_prev, t_next, eps);
    default: throw ValidationError("solver order must be 1, 2 or 3");
  }
}

enum class TimeSpacing { UniformT, UniformLambda };

/// `steps + 1` strictly decreasing times from 1 to t_min.
std::vector<double> time_grid(int steps, const Schedule<double>& schedule,
                              TimeSpacing spacing = TimeSpacing::UniformT);

struct SolverStep {
  int order;
  double t_prev;
  double t_next;
};

/// Splits an evaluation budget J into floor(J/3) + 1 solver steps: order 3
/// while at least 4 evaluations remain, then order 2 followed by order 1
/// for a remainder of 3, order 2 for 2 and order 1 for 1. Spends exactly J.
std::vector<SolverStep> nfe_schedule(int budget, const Schedule<double>& schedule,
                                     TimeSpacing spacing = TimeSpacing::UniformT);

/// Total evaluations of a schedule.
int nfe_cost(const std::vector<SolverStep>& steps);

}  // namespace sinodiff

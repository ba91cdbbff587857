#include <doctest.h>

#include <cmath>
#include <random>

#include "sinodiff/error.hpp"
#include "sinodiff/schedule.hpp"

using namespace sinodiff;

TEST_CASE("beta endpoints and midpoint") {
  Schedule<double> s;
  CHECK(s.beta(0.0) == doctest::Approx(0.1));
  CHECK(s.beta(1.0) == doctest::Approx(20.0));
  CHECK(s.beta(0.5) == doctest::Approx(10.05));
  CHECK_THROWS_AS(s.beta(1.5), ValidationError);
  CHECK_THROWS_AS(s.beta(-0.1), ValidationError);
}

TEST_CASE("beta integral closed form") {
  Schedule<double> s;
  CHECK(s.beta_integral(0.0) == 0.0);
  CHECK(s.beta_integral(1.0) == doctest::Approx(10.05).epsilon(1e-12));
  CHECK(s.beta_integral(0.5) == doctest::Approx(2.5375).epsilon(1e-12));
}

TEST_CASE("coefficients") {
  Schedule<double> s;
  CHECK(s.alpha(0.0) == 1.0);
  CHECK(s.sigma(0.0) == 0.0);
  // exp(-5.025) and 1 - exp(-10.05)
  CHECK(s.alpha(1.0) == doctest::Approx(0.0065715865).epsilon(1e-8));
  CHECK(s.sigma(1.0) * s.sigma(1.0) == doctest::Approx(0.9999568143).epsilon(1e-9));
  CHECK(s.alpha(0.5) == doctest::Approx(0.2811828808).epsilon(1e-9));
  CHECK(s.sigma(0.5) == doctest::Approx(0.9596542021).epsilon(1e-9));
}

TEST_CASE("a^2 + b^2 = 1 and monotonicity") {
  Schedule<double> s;
  double prev_a = 2.0, prev_b = -1.0, prev_l = INFINITY;
  for (int i = 0; i <= 1000; ++i) {
    const double t = s.t_min() + (1.0 - s.t_min()) * i / 1000.0;
    const double a = s.alpha(t), b = s.sigma(t);
    CHECK(std::abs(a * a + b * b - 1.0) <= 1e-12);
    CHECK(a < prev_a);
    CHECK(b > prev_b);
    CHECK(s.log_snr(t) < prev_l);
    prev_a = a;
    prev_b = b;
    prev_l = s.log_snr(t);
  }
}

TEST_CASE("log-SNR range and inverse") {
  Schedule<double> s;
  CHECK_THROWS_AS(s.log_snr(1e-4), ValidationError);
  for (double t : {0.001, 0.01, 0.2, 0.5, 0.9, 1.0}) {
    CHECK(s.inverse_log_snr(s.log_snr(t)) == doctest::Approx(t).epsilon(1e-9));
    CHECK(s.log_snr(t) == doctest::Approx(std::log(s.alpha(t) / s.sigma(t))).epsilon(1e-12));
  }
  CHECK(s.inverse_log_snr(-1.0) > s.inverse_log_snr(1.0));
  CHECK_THROWS_AS(s.inverse_log_snr(s.lambda_max() + 1.0), ValidationError);
  CHECK_THROWS_AS(s.inverse_log_snr(s.lambda_min() - 1.0), ValidationError);
}

TEST_CASE("drift and diffusion match the kernel coefficients") {
  // f = d log a / dt and g^2 = d b^2/dt - 2 f b^2
  Schedule<double> s;
  const double h = 1e-6;
  for (double t : {0.05, 0.3, 0.7}) {
    const double dloga = (std::log(s.alpha(t + h)) - std::log(s.alpha(t - h))) / (2 * h);
    const double db2 = (std::pow(s.sigma(t + h), 2) - std::pow(s.sigma(t - h), 2)) / (2 * h);
    const double b2 = std::pow(s.sigma(t), 2);
    CHECK(s.drift(t) == doctest::Approx(dloga).epsilon(1e-6));
    CHECK(s.diffusion_sq(t) == doctest::Approx(db2 - 2 * dloga * b2).epsilon(1e-6));
  }
}

TEST_CASE("perturb") {
  Schedule<double> s;
  Eigen::ArrayXXd y0 = Eigen::ArrayXXd::Random(4, 5);
  Eigen::ArrayXXd zero = Eigen::ArrayXXd::Zero(4, 5);
  CHECK((s.perturb(y0, Eigen::ArrayXXd::Random(4, 5), 0.0) == y0).all());
  CHECK((s.perturb(y0, zero, 0.4) - s.alpha(0.4) * y0).abs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(s.perturb(y0, Eigen::ArrayXXd::Zero(3, 5), 0.4), ValidationError);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Eigen::ArrayXd a(100000), n(100000);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a(i) = normal(rng);
    n(i) = normal(rng);
  }
  for (double t : {0.1, 0.5, 1.0}) {
    Eigen::ArrayXd y = s.perturb(a, n, t);
    const double var = (y - y.mean()).square().mean();
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("custom schedule validation") {
  CHECK_THROWS_AS(Schedule<double>(0.02, 0.01), ValidationError);
  CHECK_THROWS_AS(Schedule<double>(1e-4, 0.02, 0.0), ValidationError);
  Schedule<float> f;
  CHECK(f.alpha(0.5f) == doctest::Approx(0.28118f).epsilon(1e-5));
}

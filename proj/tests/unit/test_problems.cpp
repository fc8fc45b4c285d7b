#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "critbatch/errors.hpp"
#include "critbatch/problems.hpp"
#include "critbatch/rng.hpp"

using namespace critbatch;
using Catch::Approx;

namespace {

std::vector<double> random_theta(int d, std::uint64_t seed, std::uint64_t i, double scale = 2.0) {
  std::vector<double> theta(d);
  for (int j = 0; j < d; ++j) {
    theta[j] = scale * gauss(hash4(seed, i, static_cast<std::uint64_t>(j), 0, 99),
                             hash4(seed, i, static_cast<std::uint64_t>(j), 1, 99));
  }
  return theta;
}

double brute_force_variance(const ProblemSpec& p, const std::vector<double>& theta) {
  std::vector<double> g(p.d), gi(p.d);
  full_value_grad(p, theta, g);
  double total = 0.0;
  for (int i = 0; i < p.n; ++i) {
    component_gradient(p, i, theta, gi);
    for (int j = 0; j < p.d; ++j) total += (gi[j] - g[j]) * (gi[j] - g[j]);
  }
  return total / p.n;
}

}  // namespace

TEST_CASE("single-component quadratic has zero variance and exact constants") {
  const ProblemSpec p =
      make_quadratic_sine(1, std::vector<double>{1.0}, std::vector<double>{0.3}, 0.0);
  CHECK(p.n == 1);
  CHECK(p.sigma2 == 0.0);
  CHECK(p.L == 1.0);
  CHECK(p.f_star == 0.0);
  std::vector<double> g(1);
  CHECK(full_value_grad(p, std::vector<double>{1.3}, g) == Approx(0.5).epsilon(1e-15));
  CHECK(g[0] == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("two opposite centers give sigma2 = 1 exactly") {
  const ProblemSpec p =
      make_quadratic_sine(1, std::vector<double>{1.0}, std::vector<double>{-1.0, 1.0}, 0.0);
  CHECK(p.sigma2 == Approx(1.0).epsilon(1e-15));
  CHECK(p.f_star == Approx(0.5).epsilon(1e-15));  // (1/(2n)) sum (c_i - cbar)' A (c_i - cbar)
  std::vector<double> g(1);
  CHECK(full_value_grad(p, std::vector<double>{0.0}, g) == Approx(0.5).epsilon(1e-15));
  CHECK(g[0] == 0.0);
}

TEST_CASE("stored sigma2 equals the brute-force component variance at any theta") {
  const ProblemSpec p = make_quadratic_sine(21, 100, 20,
                                            std::vector<double>(20, 0.7), 0.0);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto theta = random_theta(p.d, 500, i);
    REQUIRE(brute_force_variance(p, theta) == Approx(p.sigma2).epsilon(1e-10));
  }
}

TEST_CASE("constructor rejects invalid parameters") {
  CHECK_THROWS_AS(make_quadratic_sine(1, 4, 2, std::vector<double>{1.0, 0.0}, 0.0),
                  InvalidProblemError);
  CHECK_THROWS_AS(make_quadratic_sine(1, 4, 2, std::vector<double>{1.0, -0.5}, 0.0),
                  InvalidProblemError);
  CHECK_THROWS_AS(make_quadratic_sine(1, 4, 2, std::vector<double>{1.0}, 0.0),
                  InvalidProblemError);
  CHECK_THROWS_AS(make_quadratic_sine(1, 4, 2, std::vector<double>{1.0, 1.0}, -0.1),
                  InvalidProblemError);
  CHECK_THROWS_AS(make_quadratic_sine(1, 0, 2, std::vector<double>{1.0, 1.0}, 0.0),
                  InvalidProblemError);
}

TEST_CASE("smoothness, lower bound and initial gap hold on sampled points") {
  const ProblemSpec quad = make_quadratic_sine(3, 25, 6,
                                               std::vector<double>{0.1, 0.2, 0.4, 0.6, 0.8, 1.0},
                                               0.3);
  const ProblemSpec logi = make_logistic(9, 60, 5, 0.05);
  for (const ProblemSpec& p : {quad, logi}) {
    std::vector<double> gx(p.d), gy(p.d);
    int smooth_bad = 0, lower_bad = 0;
    const int pairs = 10000;
    for (int i = 0; i < pairs; ++i) {
      const auto x = random_theta(p.d, 600, 2 * i);
      const auto y = random_theta(p.d, 600, 2 * i + 1);
      const double fx = full_value_grad(p, x, gx);
      full_value_grad(p, y, gy);
      double grad_gap = 0.0, point_gap = 0.0;
      for (int j = 0; j < p.d; ++j) {
        grad_gap += (gx[j] - gy[j]) * (gx[j] - gy[j]);
        point_gap += (x[j] - y[j]) * (x[j] - y[j]);
      }
      if (std::sqrt(grad_gap) > p.L * std::sqrt(point_gap) * (1.0 + 1e-12)) ++smooth_bad;
      if (fx < p.f_star) ++lower_bad;
    }
    REQUIRE(smooth_bad == 0);
    REQUIRE(lower_bad == 0);
    REQUIRE(full_value(p, p.theta0) - p.f_star == Approx(p.delta0));
    REQUIRE(p.delta0 > 0.0);
  }
}

TEST_CASE("analytic gradients agree with central finite differences") {
  const ProblemSpec quad = make_quadratic_sine(4, 12, 5,
                                               std::vector<double>{0.2, 0.4, 0.6, 0.8, 1.0},
                                               0.25);
  const ProblemSpec logi = make_logistic(10, 40, 4, 0.1);
  for (const ProblemSpec& p : {quad, logi}) {
    std::vector<double> g(p.d);
    for (int i = 0; i < 100; ++i) {
      auto theta = random_theta(p.d, 700, static_cast<std::uint64_t>(i));
      full_value_grad(p, theta, g);
      double norm = 0.0;
      for (const double v : theta) norm += v * v;
      const double h = 1e-6 * (1.0 + std::sqrt(norm));
      for (int j = 0; j < p.d; ++j) {
        const double saved = theta[j];
        theta[j] = saved + h;
        const double fp = full_value(p, theta);
        theta[j] = saved - h;
        const double fm = full_value(p, theta);
        theta[j] = saved;
        const double fd = (fp - fm) / (2.0 * h);
        const double scale = std::max(std::fabs(g[j]), 1e-8);
        REQUIRE(std::fabs(fd - g[j]) / scale < 1e-5);
      }
    }
  }
}

TEST_CASE("gradient vanishes at the center mean when eps_nc = 0") {
  const ProblemSpec p = make_quadratic_sine(5, 9, 3, std::vector<double>{0.5, 0.7, 1.0}, 0.0);
  const auto& q = std::get<QuadraticSineParams>(p.params);
  std::vector<double> g(p.d);
  full_value_grad(p, q.center_mean, g);
  for (const double v : g) CHECK(v == 0.0);
}

TEST_CASE("logistic constants and the deterministic solve") {
  const ProblemSpec p = make_logistic(11, 200, 10, 0.1);
  const auto& q = std::get<LogisticParams>(p.params);
  // Gram trace bound
  double trace = 0.0;
  for (const double x : q.features) trace += x * x;
  CHECK(p.L == Approx(trace / (4.0 * p.n) + 0.1).epsilon(1e-14));
  CHECK(q.solve_grad_norm <= 1e-12);
  // a second solve from a different start lands on the same optimum
  CHECK(logistic_fstar_check(p, 12345) == Approx(p.f_star).margin(1e-10));
  CHECK(logistic_fstar_check(p, 999) == Approx(p.f_star).margin(1e-10));

  // value at the origin is log 2 regardless of labels
  CHECK(full_value(p, std::vector<double>(p.d, 0.0)) == Approx(std::log(2.0)).epsilon(1e-14));

  // single component: zero variance
  CHECK(make_logistic(2, 1, 3, 0.1).sigma2 == 0.0);

  // probe bound actually dominates the component variance near theta0
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto theta = p.theta0;
    const auto shift = random_theta(p.d, 800, i, 0.4);
    for (int j = 0; j < p.d; ++j) theta[j] += shift[j];
    REQUIRE(brute_force_variance(p, theta) <= p.sigma2);
  }
}

TEST_CASE("all-zero features with lambda = 0 are rejected") {
  const std::vector<double> features(8 * 2, 0.0);
  const std::vector<double> labels{1, -1, 1, -1, 1, -1, 1, -1};
  CHECK_THROWS_AS(make_logistic(1, features, labels, 2, 0.0), InvalidProblemError);
}

TEST_CASE("degenerate labels produce a warning, not an error") {
  std::vector<double> features{0.5, 1.0, 0.3, 0.7};  // n=2, d=2
  std::vector<double> labels{1.0, 1.0};
  const ProblemSpec p = make_logistic(1, features, labels, 2, 0.1);
  REQUIRE_FALSE(p.warnings.empty());
  CHECK(p.warnings.front().find("labels") != std::string::npos);
}

TEST_CASE("minibatch gradient equals the full gradient when sigma2 = 0") {
  const ProblemSpec p =
      make_quadratic_sine(1, std::vector<double>{0.8}, std::vector<double>{0.4}, 0.0);
  std::vector<double> full(1), batch(1);
  const std::vector<double> theta{2.0};
  full_value_grad(p, theta, full);
  for (const int b : {1, 7, 64}) {
    minibatch_gradient(p, OracleMode::AdditiveNoise, theta, b, SampleStream{1, 0, 0}, batch);
    CHECK(batch[0] == full[0]);
  }
  minibatch_gradient(p, OracleMode::FiniteSum, theta, 1, SampleStream{1, 0, 0}, batch);
  CHECK(batch[0] == full[0]);
}

TEST_CASE("finite-sum batches larger than n are rejected") {
  const ProblemSpec p = make_quadratic_sine(2, 8, 3, std::vector<double>{1.0, 1.0, 1.0}, 0.0);
  std::vector<double> out(3);
  CHECK_THROWS_AS(minibatch_gradient(p, OracleMode::FiniteSum, p.theta0, 9, SampleStream{1, 0, 0},
                                     out),
                  InvalidProblemError);
  CHECK_NOTHROW(minibatch_gradient(p, OracleMode::AdditiveNoise, p.theta0, 9,
                                   SampleStream{1, 0, 0}, out));
}

TEST_CASE("minibatch estimator is unbiased and contracts variance as sigma2/b") {
  const ProblemSpec p = make_quadratic_sine(31, 100, 5, std::vector<double>(5, 0.9), 0.0);
  const auto theta = random_theta(p.d, 900, 0);
  std::vector<double> full(p.d), batch(p.d);
  full_value_grad(p, theta, full);
  const int draws = 100000;

  for (const OracleMode mode : {OracleMode::FiniteSum, OracleMode::AdditiveNoise}) {
    for (const int b : {1, 4, 16, 64}) {
      std::vector<double> mean(p.d, 0.0);
      double dev2 = 0.0;
      for (int t = 0; t < draws; ++t) {
        minibatch_gradient(p, mode, theta, b, SampleStream{77, static_cast<std::uint64_t>(t), 0},
                           batch);
        double draw_dev = 0.0;
        for (int j = 0; j < p.d; ++j) {
          mean[j] += batch[j];
          draw_dev += (batch[j] - full[j]) * (batch[j] - full[j]);
        }
        dev2 += draw_dev;
      }
      double mean_err = 0.0;
      for (int j = 0; j < p.d; ++j) {
        const double diff = mean[j] / draws - full[j];
        mean_err += diff * diff;
      }
      // Monte-Carlo unbiasedness: ||mean - grad f|| within 3 standard errors
      REQUIRE(std::sqrt(mean_err) <= 3.0 * std::sqrt(p.sigma2 / (b * static_cast<double>(draws))));
      // variance contraction with 3-standard-error slack
      const double empirical = dev2 / draws;
      REQUIRE(empirical <= p.sigma2 / b * (1.0 + 3.0 * std::sqrt(2.0 / draws)));
    }
  }
}

TEST_CASE("problem construction and batch draws are bitwise deterministic") {
  const ProblemSpec a = make_quadratic_sine(99, 30, 7, std::vector<double>(7, 0.5), 0.1);
  const ProblemSpec b = make_quadratic_sine(99, 30, 7, std::vector<double>(7, 0.5), 0.1);
  CHECK(std::get<QuadraticSineParams>(a.params).centers ==
        std::get<QuadraticSineParams>(b.params).centers);
  CHECK(a.theta0 == b.theta0);
  CHECK(a.sigma2 == b.sigma2);

  std::vector<double> g1(7), g2(7);
  minibatch_gradient(a, OracleMode::FiniteSum, a.theta0, 5, SampleStream{4, 2, 13}, g1);
  minibatch_gradient(b, OracleMode::FiniteSum, b.theta0, 5, SampleStream{4, 2, 13}, g2);
  CHECK(g1 == g2);
  minibatch_gradient(a, OracleMode::AdditiveNoise, a.theta0, 5, SampleStream{4, 2, 13}, g1);
  minibatch_gradient(b, OracleMode::AdditiveNoise, b.theta0, 5, SampleStream{4, 2, 13}, g2);
  CHECK(g1 == g2);
}

TEST_CASE("dimension mismatches are rejected") {
  const ProblemSpec p = make_quadratic_sine(1, 4, 3, std::vector<double>{1.0, 1.0, 1.0}, 0.0);
  std::vector<double> g(3);
  CHECK_THROWS_AS(full_value_grad(p, std::vector<double>{1.0, 2.0}, g), InvalidProblemError);
  CHECK_THROWS_AS(with_theta0(p, std::vector<double>{1.0}), InvalidProblemError);
}

TEST_CASE("with_theta0 recomputes the initial gap exactly") {
  const ProblemSpec p = make_quadratic_sine(6, 5, 2, std::vector<double>{0.5, 1.0}, 0.0);
  const ProblemSpec moved = with_theta0(p, std::vector<double>{10.0, -3.0});
  CHECK(moved.delta0 ==
        Approx(full_value(moved, std::vector<double>{10.0, -3.0}) - moved.f_star));
  CHECK(moved.delta0 != p.delta0);
}

TEST_CASE("problem record carries the self-describing fields") {
  const ProblemSpec p = make_quadratic_sine(8, 5, 2, std::vector<double>{0.5, 1.0}, 0.0);
  const std::string record = problem_record_json(p);
  for (const char* key :
       {"\"kind\":\"quadratic-sine\"", "\"seed\":8", "\"n\":5", "\"d\":2", "\"L\":",
        "\"sigma2\":", "\"f_star\":", "\"delta0\":"}) {
    INFO(record);
    CHECK(record.find(key) != std::string::npos);
  }
}

#pragma once

// A deliberately plain re-implementation of the SGD loop, written against the
// documented counter-RNG contract only (rng.hpp) and none of the engine code.
// Trajectories must match engine::run_sgd bit for bit.

#include <cmath>
#include <cstdint>
#include <vector>

#include "critbatch/problems.hpp"
#include "critbatch/rng.hpp"
#include "critbatch/schedules.hpp"

namespace testsupport {

struct ReferenceTrace {
  std::vector<double> grad_norm_sq;
  std::vector<double> theta;  // final iterate
};

inline ReferenceTrace reference_sgd(const critbatch::ProblemSpec& p, critbatch::OracleMode mode,
                                    const critbatch::ScheduleSpec& s, int b, long long k_max,
                                    std::uint64_t seed, std::uint64_t trial) {
  using namespace critbatch;
  ReferenceTrace trace;
  std::vector<double> theta = p.theta0;
  std::vector<double> grad(p.d), batch(p.d), comp(p.d);
  for (long long k = 0; k < k_max; ++k) {
    full_value_grad(p, theta, grad);
    double gn2 = 0.0;
    for (int j = 0; j < p.d; ++j) gn2 += grad[j] * grad[j];
    trace.grad_norm_sq.push_back(gn2);

    const double lr = learning_rate(s, k);
    if (mode == OracleMode::FiniteSum) {
      if (p.kind == ProblemKind::QuadraticSine) {
        // follow the documented accumulation: sum sampled centers, then
        // g = A(theta - mean center) + eps_nc cos(theta)
        const auto& q = std::get<QuadraticSineParams>(p.params);
        std::vector<double> csum(p.d, 0.0);
        for (int i = 0; i < b; ++i) {
          const std::uint64_t idx =
              uniform_index(hash4(seed, trial, static_cast<std::uint64_t>(k),
                                  static_cast<std::uint64_t>(i), 1),
                            static_cast<std::uint64_t>(p.n));
          for (int j = 0; j < p.d; ++j) csum[j] += q.centers[idx * p.d + j];
        }
        for (int j = 0; j < p.d; ++j) {
          batch[j] = q.spectrum[j] * (theta[j] - csum[j] / b);
          if (q.eps_nc != 0.0) batch[j] += q.eps_nc * std::cos(theta[j]);
        }
      } else {
        const auto& q = std::get<LogisticParams>(p.params);
        for (int j = 0; j < p.d; ++j) batch[j] = 0.0;
        for (int i = 0; i < b; ++i) {
          const std::uint64_t idx =
              uniform_index(hash4(seed, trial, static_cast<std::uint64_t>(k),
                                  static_cast<std::uint64_t>(i), 1),
                            static_cast<std::uint64_t>(p.n));
          const double* x = &q.features[idx * p.d];
          double m = 0.0;
          for (int j = 0; j < p.d; ++j) m += x[j] * theta[j];
          m *= q.labels[idx];
          double sig;
          if (m > 0.0) {
            const double e = std::exp(-m);
            sig = e / (1.0 + e);
          } else {
            sig = 1.0 / (1.0 + std::exp(m));
          }
          const double w = -q.labels[idx] * sig;
          for (int j = 0; j < p.d; ++j) batch[j] += w * x[j];
        }
        for (int j = 0; j < p.d; ++j) batch[j] = batch[j] / b + q.lambda * theta[j];
      }
    } else {
      full_value_grad(p, theta, batch);
      if (p.sigma2 > 0.0) {
        const double scale = std::sqrt(p.sigma2 / (static_cast<double>(b) * p.d));
        for (int j = 0; j < p.d; ++j) {
          const double z =
              gauss(hash4(seed, trial, static_cast<std::uint64_t>(k),
                          2 * static_cast<std::uint64_t>(j), 2),
                    hash4(seed, trial, static_cast<std::uint64_t>(k),
                          2 * static_cast<std::uint64_t>(j) + 1, 2));
          batch[j] += scale * z;
        }
      }
    }
    for (int j = 0; j < p.d; ++j) theta[j] -= lr * batch[j];
  }
  trace.theta = theta;
  return trace;
}

}  // namespace testsupport

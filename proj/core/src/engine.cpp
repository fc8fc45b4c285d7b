#include "critbatch/engine.hpp"

#include <cmath>

#include "critbatch/errors.hpp"

namespace critbatch {

RunRecord run_sgd(const ProblemSpec& problem, OracleMode mode, const ScheduleSpec& schedule,
                  int b, long long k_max, std::uint64_t seed, std::uint64_t trial,
                  bool keep_theta) {
  validate_schedule(schedule, problem.L);
  if (k_max < 1) throw Error("run_sgd: k_max must be >= 1");
  if (b < 1) throw Error("run_sgd: batch size must be >= 1");
  if (mode == OracleMode::FiniteSum && b > problem.n) {
    throw InvalidProblemError("run_sgd: finite-sum oracle requires b <= n");
  }

  RunRecord rec;
  rec.seed = seed;
  rec.trial = trial;
  rec.schedule = schedule;
  rec.mode = mode;
  rec.b = b;
  rec.grad_norm_sq.reserve(k_max);
  rec.f_value.reserve(k_max);
  rec.alpha.reserve(k_max);

  std::vector<double> theta = problem.theta0;
  std::vector<double> grad(problem.d), batch(problem.d);

  for (long long k = 0; k < k_max; ++k) {
    const double f = full_value_grad(problem, theta, grad);
    double gn2 = 0.0;
    for (int j = 0; j < problem.d; ++j) gn2 += grad[j] * grad[j];
    if (!std::isfinite(f) || !std::isfinite(gn2)) {
      rec.diverged = true;
      rec.diverged_at = k;
      break;
    }
    const double lr = learning_rate(schedule, k);
    rec.grad_norm_sq.push_back(gn2);
    rec.f_value.push_back(f);
    rec.alpha.push_back(lr);

    minibatch_gradient(problem, mode, theta, b, SampleStream{seed, trial, static_cast<std::uint64_t>(k)},
                       batch);
    for (int j = 0; j < problem.d; ++j) theta[j] -= lr * batch[j];
  }
  if (keep_theta) rec.theta_final = std::move(theta);
  return rec;
}

CurveAccumulator::CurveAccumulator(std::size_t length)
    : length_(length), sum_(length, 0.0L), sum_sq_(length, 0.0L) {}

void CurveAccumulator::add(const RunRecord& record) {
  if (record.diverged) {
    ++divergences_;
    return;
  }
  if (record.grad_norm_sq.size() != length_) {
    throw Error("aggregate: records have mismatched lengths");
  }
  for (std::size_t k = 0; k < length_; ++k) {
    const long double v = record.grad_norm_sq[k];
    sum_[k] += v;
    sum_sq_[k] += v * v;
  }
  ++seeds_;
}

AggregateCurve CurveAccumulator::finish() const {
  if (seeds_ == 0) throw Error("aggregate: no usable (non-diverged) records");
  AggregateCurve curve;
  curve.seeds = seeds_;
  curve.divergences = divergences_;
  curve.mean.resize(length_);
  curve.std_error.resize(length_);
  curve.running_min.resize(length_);
  const long double s = seeds_;
  double run_min = 0.0;
  for (std::size_t k = 0; k < length_; ++k) {
    const long double mean = sum_[k] / s;
    curve.mean[k] = static_cast<double>(mean);
    if (seeds_ > 1) {
      long double var = (sum_sq_[k] - s * mean * mean) / (s - 1.0L);
      if (var < 0.0L) var = 0.0L;
      curve.std_error[k] = static_cast<double>(std::sqrt(static_cast<double>(var / s)));
    } else {
      curve.std_error[k] = 0.0;
    }
    run_min = k == 0 ? curve.mean[0] : std::min(run_min, curve.mean[k]);
    curve.running_min[k] = run_min;
  }
  return curve;
}

AggregateCurve aggregate_min_curve(std::span<const RunRecord> records) {
  if (records.empty()) throw Error("aggregate: no records");
  std::size_t length = 0;
  const RunRecord* ref = nullptr;
  for (const RunRecord& r : records) {
    if (r.diverged) continue;
    if (ref == nullptr) {
      ref = &r;
      length = r.grad_norm_sq.size();
      continue;
    }
    const bool same_schedule = r.schedule.variant == ref->schedule.variant &&
                               r.schedule.alpha == ref->schedule.alpha &&
                               r.schedule.a == ref->schedule.a && r.schedule.T == ref->schedule.T;
    if (!same_schedule || r.b != ref->b || r.mode != ref->mode) {
      throw Error("aggregate: records mix different (schedule, b, oracle) configurations");
    }
  }
  if (ref == nullptr) throw Error("aggregate: no usable (non-diverged) records");
  CurveAccumulator acc(length);
  for (const RunRecord& r : records) acc.add(r);
  return acc.finish();
}

std::optional<long long> iterations_to_epsilon(const AggregateCurve& curve, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("iterations_to_epsilon: epsilon must be positive");
  const double target = epsilon * epsilon;
  for (std::size_t k = 0; k < curve.mean.size(); ++k) {
    if (curve.mean[k] <= target) return static_cast<long long>(k) + 1;
  }
  return std::nullopt;
}

std::optional<long long> iterations_to_epsilon(const RunRecord& record, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("iterations_to_epsilon: epsilon must be positive");
  const double target = epsilon * epsilon;
  for (std::size_t k = 0; k < record.grad_norm_sq.size(); ++k) {
    if (record.grad_norm_sq[k] <= target) return static_cast<long long>(k) + 1;
  }
  return std::nullopt;
}

}  // namespace critbatch

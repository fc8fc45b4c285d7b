#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "critbatch/problems.hpp"
#include "critbatch/schedules.hpp"

namespace critbatch {

/// One SGD trajectory: theta_{k+1} = theta_k - alpha_k * grad f_{B_k}(theta_k),
/// instrumented with the exact full gradient at every step. Entry k describes
/// theta_k (before update k); the cumulative SFO count after step k is b*(k+1).
struct RunRecord {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  ScheduleSpec schedule;
  OracleMode mode = OracleMode::FiniteSum;
  int b = 1;
  std::vector<double> grad_norm_sq;  // ||grad f(theta_k)||^2
  std::vector<double> f_value;       // f(theta_k)
  std::vector<double> alpha;         // alpha_k
  bool diverged = false;
  long long diverged_at = -1;  // offending iteration when diverged
  std::vector<double> theta_final;  // retained only when requested

  long long steps() const { return static_cast<long long>(grad_norm_sq.size()); }
  long long sfo_at(long long k) const { return static_cast<long long>(b) * (k + 1); }
};

/// Runs Algorithm 1 for k_max steps. Fully deterministic given (seed, trial):
/// batch draws use the counter streams documented in rng.hpp, the batch
/// gradient is accumulated in sample order and divided by b, and the update
/// subtracts alpha_k * g[j] coordinate by coordinate.
RunRecord run_sgd(const ProblemSpec& problem, OracleMode mode, const ScheduleSpec& schedule,
                  int b, long long k_max, std::uint64_t seed, std::uint64_t trial = 0,
                  bool keep_theta = false);

/// Cross-seed mean of ||grad f(theta_k)||^2 with its standard error and the
/// running minimum of the mean (the empirical stand-in for
/// min_{k' <= k} E||grad f(theta_k')||^2).
struct AggregateCurve {
  std::vector<double> mean;
  std::vector<double> std_error;
  std::vector<double> running_min;
  int seeds = 0;        // records that entered the mean
  int divergences = 0;  // records excluded as diverged
};

/// Streaming builder for AggregateCurve; adds records in a fixed order so the
/// reduction is deterministic. Diverged records are counted and skipped.
class CurveAccumulator {
 public:
  explicit CurveAccumulator(std::size_t length);
  void add(const RunRecord& record);
  AggregateCurve finish() const;

 private:
  std::size_t length_;
  std::vector<long double> sum_;
  std::vector<long double> sum_sq_;
  int seeds_ = 0;
  int divergences_ = 0;
};

/// Pointwise mean across seeds plus running minimum. All records must share
/// (schedule, b, mode) and the same length.
AggregateCurve aggregate_min_curve(std::span<const RunRecord> records);

/// Smallest K such that min over k in [0:K-1] of the mean curve is <= eps^2,
/// or nullopt if the curve never gets there.
std::optional<long long> iterations_to_epsilon(const AggregateCurve& curve, double epsilon);

/// First crossing of a single trajectory's own curve; used for dispersion
/// diagnostics in sweep cells.
std::optional<long long> iterations_to_epsilon(const RunRecord& record, double epsilon);

}  // namespace critbatch

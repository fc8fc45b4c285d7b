#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "critbatch/engine.hpp"
#include "critbatch/problems.hpp"
#include "critbatch/schedules.hpp"
#include "critbatch/theory.hpp"

namespace critbatch {

struct SweepConfig {
  ProblemSpec problem;
  OracleMode mode = OracleMode::AdditiveNoise;
  std::vector<ScheduleSpec> schedules;
  std::vector<int> batch_grid;  // strictly increasing
  double epsilon = 0.1;
  int seeds_per_cell = 32;
  long long k_max = 100000;
  int jobs = 0;  // 0 = hardware concurrency
  std::uint64_t master_seed = 0;
};

/// One (schedule, b) cell. K is the first crossing of the cross-seed mean
/// curve (empty when never reached); N = K * b. Theory overlays are present
/// wherever b lies in the closed-form domain.
struct SweepCell {
  int schedule_index = 0;
  ScheduleSpec schedule;
  int b = 1;
  std::optional<long long> K;
  std::optional<long long> N;
  std::optional<double> K_theory;
  std::optional<double> N_theory;
  int divergences = 0;
  int seeds = 0;
  /// Standard error across per-seed first crossings (dispersion diagnostic);
  /// empty when fewer than two seeds reached epsilon on their own.
  std::optional<double> se_K;

  bool operator==(const SweepCell&) const = default;
};

struct ScheduleTheory {
  ScheduleSpec schedule;
  CriticalBatch b_star;
  bool operator==(const ScheduleTheory&) const = default;
};

struct SweepResult {
  std::uint64_t master_seed = 0;
  int seeds_per_cell = 0;
  long long k_max = 0;
  double epsilon = 0.0;
  OracleMode mode = OracleMode::AdditiveNoise;
  std::string problem_record;  // self-describing JSON record
  std::uint64_t config_hash = 0;
  std::vector<ScheduleTheory> theory;
  std::vector<SweepCell> cells;
  /// Set when every cell failed to reach epsilon.
  std::string guidance;

  bool operator==(const SweepResult&) const = default;
};

/// Runs seeds_per_cell trajectories for every (schedule, b) cell, aggregates
/// the mean gradient-norm curve per cell and reads off the first epsilon
/// crossing. Deterministic for a given master seed at any parallelism width:
/// trial t of every cell uses counter streams keyed by (master_seed, t), and
/// cells reduce their trials in trial order.
SweepResult run_sweep(const SweepConfig& config);

/// Batch size minimizing measured N for one schedule; not-reached cells are
/// excluded, ties break toward the smaller b. Throws when nothing reached.
int empirical_critical_batch(const SweepResult& result, int schedule_index);

/// Checks the closed-form gradient bound at (K, b) against the empirical
/// min-curve over S seeded trials: pass iff empirical <= bound + 3 SE.
struct BoundReport {
  double empirical = 0.0;
  double bound = 0.0;
  double std_error = 0.0;
  long long K = 0;
  int b = 1;
  int divergences = 0;
  bool valid = true;  // false when a majority of trials diverged
  bool pass = false;
};
BoundReport validate_bound(const ProblemSpec& problem, OracleMode mode,
                           const ScheduleSpec& schedule, int b, long long K, int S,
                           std::uint64_t master_seed, int jobs = 0);

/// Checks the telescoped descent inequality
///   sum_{k<K} alpha_k (1 - L alpha_k / 2) E||grad f(theta_k)||^2
///     <= (f(theta0) - f_star) + (L sigma2 / (2b)) sum_{k<K} alpha_k^2
/// with 3-SE slack (zero slack when sigma2 = 0).
struct Lemma1Report {
  double lhs = 0.0;
  double rhs = 0.0;
  double std_error = 0.0;
  long long K = 0;
  int b = 1;
  int divergences = 0;
  bool valid = true;
  bool pass = false;
};
Lemma1Report validate_lemma1(const ProblemSpec& problem, OracleMode mode,
                             const ScheduleSpec& schedule, int b, long long K, int S,
                             std::uint64_t master_seed, int jobs = 0);

/// CSV schema (ASCII, LF-terminated, byte-stable for equal inputs):
///   schedule,variant_a,T,alpha,b,epsilon,seeds,K_measured,N_measured,
///   K_theory,N_theory,divergences,se_K
/// K_measured is empty for not-reached cells.
std::string export_csv(const SweepResult& result);
std::string export_json(const SweepResult& result);

/// Writes the chosen format; throws IoError with the path on failure.
void export_results(const SweepResult& result, const std::string& path,
                    const std::string& format);

/// Rebuilds a SweepResult from its JSON export (full round trip).
SweepResult import_json(const std::string& text);
/// Rebuilds cells + epsilon from a CSV export (metadata is not in the CSV).
SweepResult import_csv(const std::string& text);

/// Runs fn(0..n-1) on `jobs` threads (0 = hardware); rethrows the first
/// worker exception.
void parallel_for(int jobs, std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace critbatch

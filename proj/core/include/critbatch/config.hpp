#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "critbatch/problems.hpp"
#include "critbatch/schedules.hpp"

namespace critbatch {

struct SweepParams {
  std::vector<int> batch_grid;  // default: powers of two 2^0..2^10
  int seeds_per_cell = 32;
  long long k_max = 100000;
};

struct ValidateParams {
  std::vector<long long> iterations{100, 1000};
  std::vector<int> batches{1, 16, 256};
  int seeds = 1000;
};

struct TheoryParams {
  int b_grid_points = 64;
  double b_grid_span = 32.0;  // grid spans pole*(1+2%) .. pole*span (or b*/span .. b**span)
  std::vector<double> epsilon_grid{1e-2, 1e-3, 1e-4};
};

/// A fully validated run configuration: problem constructed, schedules
/// checked against 2/L, defaults applied.
struct FullConfig {
  std::uint64_t master_seed = 0;
  int jobs = 0;
  double epsilon = 0.1;
  OracleMode mode = OracleMode::AdditiveNoise;
  ProblemSpec problem;
  std::vector<ScheduleSpec> schedules;
  SweepParams sweep;
  ValidateParams validate;
  TheoryParams theory;
};

/// Parses the strict JSON config documented in the README. Unknown keys are
/// errors naming the key; alpha >= 2/L is rejected citing the cap.
FullConfig parse_config(const std::string& path);
FullConfig parse_config_text(const std::string& text);

/// Echo of the derived values (L, sigma2, 2/L cap, per-schedule constants)
/// so users can audit what the closed-form layer consumed.
std::string config_echo(const FullConfig& config);

}  // namespace critbatch

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace critbatch {

enum class ProblemKind { QuadraticSine, Logistic };

/// How stochastic gradients are produced:
///   FiniteSum     — draw component indices i.i.d. uniformly with replacement
///                   and return component gradients (b <= n required).
///   AdditiveNoise — return the full gradient plus isotropic Gaussian noise
///                   scaled so that E||G - grad f||^2 equals sigma2 exactly.
enum class OracleMode { FiniteSum, AdditiveNoise };

struct QuadraticSineParams {
  std::vector<double> spectrum;     // diag(A), length d, all > 0
  std::vector<double> centers;     // n x d, row-major
  std::vector<double> center_mean; // length d
  double quad_floor = 0.0;         // value of the averaged quadratic at its minimizer
  double eps_nc = 0.0;
};

struct LogisticParams {
  std::vector<double> features;  // n x d, row-major
  std::vector<double> labels;    // +-1
  double lambda = 0.0;
  std::vector<double> theta_hat;   // minimizer from the deterministic solve
  double solve_grad_norm = 0.0;    // ||grad f(theta_hat)||
  std::uint64_t probe_seed = 0;    // variance probe record
  int probe_points = 0;
  double probe_radius = 0.0;
  double variance_safety = 0.0;
};

/// A finite-sum objective f = (1/n) sum_i f_i with analytically known
/// smoothness constant L, variance bound sigma2, lower bound f_star and
/// initial gap delta0 = f(theta0) - f_star. Immutable after construction and
/// safe to share across threads.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::QuadraticSine;
  std::uint64_t seed = 0;
  int n = 0;
  int d = 0;
  double L = 0.0;
  double sigma2 = 0.0;
  double f_star = 0.0;
  double delta0 = 0.0;
  std::vector<double> theta0;
  std::variant<QuadraticSineParams, LogisticParams> params;
  std::vector<std::string> warnings;
};

/// f_i(x) = 1/2 (x - c_i)' A (x - c_i) + eps_nc * sum_j sin(x_j) with shared
/// diagonal A = diag(spectrum) and seeded standard-normal centers c_i.
/// sigma2 = (1/n) sum_i ||A (cbar - c_i)||^2 exactly (the component-gradient
/// deviation is independent of x).
ProblemSpec make_quadratic_sine(std::uint64_t seed, int n, int d,
                                std::span<const double> spectrum, double eps_nc);

/// Same objective with caller-provided centers (n = centers.size() / d).
ProblemSpec make_quadratic_sine(std::uint64_t seed, std::span<const double> spectrum,
                                std::vector<double> centers, double eps_nc);

/// l2-regularized logistic loss on seeded synthetic data. L is the Gram trace
/// bound (1/(4n)) sum ||x_i||^2 + lambda; f_star comes from a deterministic
/// Newton solve to ||grad f|| <= 1e-12; sigma2 from probe maximization over
/// 256 points in a ball of radius 2||theta0|| around theta0, times 1.5.
ProblemSpec make_logistic(std::uint64_t seed, int n, int d, double lambda);

/// Same objective on caller-provided data (features is n x d row-major,
/// labels are +-1).
ProblemSpec make_logistic(std::uint64_t seed, std::vector<double> features,
                          std::vector<double> labels, int d, double lambda);

/// Re-runs the f_star solve from a seeded random start; the returned value
/// must agree with the stored f_star to solver precision.
double logistic_fstar_check(const ProblemSpec& p, std::uint64_t solver_seed);

/// Copy of `p` with a new initial point; recomputes delta0 exactly.
ProblemSpec with_theta0(const ProblemSpec& p, std::vector<double> theta0);

/// Exact analytic value and gradient of f. Returns f(theta).
double full_value_grad(const ProblemSpec& p, std::span<const double> theta,
                       std::span<double> grad);
double full_value(const ProblemSpec& p, std::span<const double> theta);

/// Gradient of the single component f_i.
void component_gradient(const ProblemSpec& p, int i, std::span<const double> theta,
                        std::span<double> grad);

/// Identifies the (trial, step) slot of the counter RNG for one batch draw.
struct SampleStream {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::uint64_t step = 0;
};

/// Mini-batch estimator (1/b) sum_i G_xi(theta) over b independent samples.
/// Deterministic given the stream; throws if b > n in finite-sum mode.
void minibatch_gradient(const ProblemSpec& p, OracleMode mode, std::span<const double> theta,
                        int b, const SampleStream& stream, std::span<double> out);

/// Self-describing record (kind, seed, n, d, L, sigma2, f_star, delta0) used
/// in result files.
std::string problem_record_json(const ProblemSpec& p);

}  // namespace critbatch

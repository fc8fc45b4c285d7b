#pragma once

#include <span>
#include <string>

#include "critbatch/problems.hpp"
#include "critbatch/schedules.hpp"

namespace critbatch {

/// The four constants of the gradient-norm bound for a (problem, schedule)
/// pair, plus the inputs they were built from:
///   C1 = 2 delta / ((2 - L alpha) alpha)      (= D1)
///   C2 = L sigma2 alpha / (2 - L alpha)
///   D2 = T alpha^2 L sigma2 / (2 - L alpha)
/// with delta = f(theta0) - f_star.
struct TheoryConstants {
  double C1 = 0.0;
  double C2 = 0.0;
  double D1 = 0.0;
  double D2 = 0.0;
  double delta = 0.0;
  double L = 0.0;
  double sigma2 = 0.0;
  double alpha = 0.0;
  long long T = 1;
};

TheoryConstants theory_constants(const ProblemSpec& problem, const ScheduleSpec& schedule);
TheoryConstants theory_constants_raw(double delta, double L, double sigma2, double alpha,
                                     long long T);

/// Upper bound on min_{k < K} E||grad f(theta_k)||^2:
///   constant : C1/K + C2/b
///   decay1   : D1/K^a + D2 / ((1-2a) K^a b)
///   decay2   : D1/sqrt(K) + (1/sqrt(K) + 1) D2/b
///   decay3   : D1/K^(1-a) + 2a D2 / ((2a-1) K^(1-a) b)
double gradient_bound(const TheoryConstants& c, const ScheduleSpec& s, double K, double b);

/// Left edge of the valid b-domain at precision eps: C2/eps^2 (constant),
/// D2/eps^2 (decay2), 0 otherwise.
double batch_domain_pole(const TheoryConstants& c, const ScheduleSpec& s, double epsilon);

/// Real-valued iterations K(b) needed for the bound to reach eps^2. Throws
/// TheoryDomainError (carrying the pole) outside the domain; decay2 also
/// requires D1 > eps^2.
double iterations_needed(const TheoryConstants& c, const ScheduleSpec& s, double epsilon,
                         double b);

/// SFO complexity N(b) = K(b) * b.
double sfo_needed(const TheoryConstants& c, const ScheduleSpec& s, double epsilon, double b);

enum class CriticalBatchFlavor {
  StationaryPoint,        // N'(b*) = 0
  BoundaryApproximation,  // decay2 pseudo-critical D2/eps^2
  None,                   // sigma2 = 0: no variance term, any b >= 1 is optimal
};

struct CriticalBatch {
  double b_star = 0.0;
  CriticalBatchFlavor flavor = CriticalBatchFlavor::None;
  bool operator==(const CriticalBatch&) const = default;
};

/// 2 C2/eps^2 (constant), (1-a) D2 / (a (1-2a) D1) (decay1),
/// 2 a^2 D2 / ((1-a)(2a-1) D1) (decay3); decay2 reports D2/eps^2 flagged as a
/// boundary approximation.
CriticalBatch critical_batch(const TheoryConstants& c, const ScheduleSpec& s, double epsilon);

/// The batch size where N'(b) actually vanishes for decay2:
///   b+ = D2 (3 D1 + eps^2 + sqrt(9 D1^2 + 10 D1 eps^2 + eps^4)) / (2 D1 eps^2).
/// N decreases on (D2/eps^2, b+) and increases beyond, so the pseudo-critical
/// value above underestimates the true SFO minimizer by roughly 3x.
double decay2_stationary_batch(const TheoryConstants& c, double epsilon);

struct Derivatives {
  double first = 0.0;
  double second = 0.0;
};

/// Closed-form K'(b), K''(b) and N'(b), N''(b) per regime.
Derivatives k_derivatives(const TheoryConstants& c, const ScheduleSpec& s, double epsilon,
                          double b);
Derivatives n_derivatives(const TheoryConstants& c, const ScheduleSpec& s, double epsilon,
                          double b);

struct ExponentFit {
  double k_slope = 0.0;
  double n_slope = 0.0;
};

/// Least-squares slopes of log K(b*(eps)) and log N(b*(eps)) against
/// log(1/eps). decay2 evaluates at b = (D2+1)/eps^2. Expected slopes:
/// (2, 4) constant, (2/a, 2/a) decay1, (4, 6) decay2, (2/(1-a), 2/(1-a))
/// decay3.
ExponentFit complexity_exponents(const TheoryConstants& c, const ScheduleSpec& s,
                                 std::span<const double> epsilon_grid);

double expected_k_slope(const ScheduleSpec& s);
double expected_n_slope(const ScheduleSpec& s);

}  // namespace critbatch

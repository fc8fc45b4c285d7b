#pragma once

// Independent long-double evaluation of the iteration count K(b) and the SFO
// cost N(b) = K(b) b, written directly from the four closed-form displays.
// Serves as the finite-difference oracle for the derivative layer: evaluating
// in extended precision keeps the FD noise floor well below the comparison
// tolerances.

#include <cmath>

#include "critbatch/schedules.hpp"
#include "critbatch/theory.hpp"

namespace testsupport {

inline long double iterations_oracle(const critbatch::TheoryConstants& c,
                                     const critbatch::ScheduleSpec& s, long double eps,
                                     long double b) {
  using critbatch::DecayRegime;
  using critbatch::ScheduleVariant;
  const long double e2 = eps * eps;
  const long double C1 = c.C1, C2 = c.C2, D1 = c.D1, D2 = c.D2;
  if (s.variant == ScheduleVariant::Constant) {
    return C1 * b / (e2 * b - C2);
  }
  const long double a = s.a.value();
  switch (s.regime()) {
    case DecayRegime::Decay1:
      return std::pow((D1 + D2 / ((1.0L - 2.0L * a) * b)) / e2, 1.0L / a);
    case DecayRegime::Decay2: {
      const long double root = (D1 * b + D2) / (e2 * b - D2);
      return root * root;
    }
    case DecayRegime::Decay3:
      return std::pow((D1 + 2.0L * a * D2 / ((2.0L * a - 1.0L) * b)) / e2, 1.0L / (1.0L - a));
  }
  return 0.0L;
}

inline long double sfo_oracle(const critbatch::TheoryConstants& c,
                              const critbatch::ScheduleSpec& s, long double eps, long double b) {
  return iterations_oracle(c, s, eps, b) * b;
}

}  // namespace testsupport

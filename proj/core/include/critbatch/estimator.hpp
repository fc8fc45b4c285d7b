#pragma once

#include "critbatch/schedules.hpp"

namespace critbatch {

/// The constant ratio r = D2/D1 inferred from one measured critical batch
/// size under a decay exponent. Re-predicting the source regime from r gives
/// the measured value back.
struct RatioEstimate {
  Rational a;
  DecayRegime regime = DecayRegime::Decay1;
  double b_star_measured = 0.0;
  double ratio = 0.0;  // D2 / D1
};

/// Inverts the critical-batch formula:
///   decay1: r = b* a (1-2a) / (1-a)
///   decay3: r = b* (1-a)(2a-1) / (2 a^2)
/// Throws NotInvertibleError for a = 1/2 or a mismatched regime interval.
RatioEstimate infer_ratio(Rational a, DecayRegime regime, double b_star_measured);

struct BstarPrediction {
  double b_star = 0.0;
  int pow2_lower = 0;  // largest e with 2^e <= b_star
  int pow2_upper = 0;  // smallest e with 2^e >= b_star
};

/// Critical-batch formula at (a_target, r), with the nearest powers of two.
BstarPrediction predict_bstar(double ratio, Rational a_target, DecayRegime regime_target);
BstarPrediction predict_bstar(const RatioEstimate& estimate, Rational a_target,
                              DecayRegime regime_target);

/// b*/r for the regime: (1-a)/(a(1-2a)) for decay1, 2a^2/((1-a)(2a-1)) for
/// decay3.
double critical_batch_multiplier(Rational a, DecayRegime regime);

}  // namespace critbatch

#include "critbatch/estimator.hpp"

#include <cmath>

#include "critbatch/errors.hpp"

namespace critbatch {

namespace {

void check_regime_interval(const Rational& a, DecayRegime regime) {
  const Rational norm = Rational::of(a.num, a.den);
  if (!(norm.num > 0 && norm.num < norm.den)) {
    throw NotInvertibleError("decay exponent a must lie in (0, 1)");
  }
  const long long twice = 2 * norm.num;
  switch (regime) {
    case DecayRegime::Decay1:
      if (!(twice < norm.den)) {
        throw NotInvertibleError("a = " + std::to_string(norm.num) + "/" +
                                 std::to_string(norm.den) + " is not in (0, 1/2)");
      }
      return;
    case DecayRegime::Decay2:
      throw NotInvertibleError(
          "a = 1/2 has no stationary critical batch; its pseudo-critical value depends on "
          "epsilon, not on D2/D1");
    case DecayRegime::Decay3:
      if (!(twice > norm.den)) {
        throw NotInvertibleError("a = " + std::to_string(norm.num) + "/" +
                                 std::to_string(norm.den) + " is not in (1/2, 1)");
      }
      return;
  }
}

}  // namespace

double critical_batch_multiplier(Rational a, DecayRegime regime) {
  check_regime_interval(a, regime);
  const double av = Rational::of(a.num, a.den).value();
  if (regime == DecayRegime::Decay1) {
    return (1.0 - av) / (av * (1.0 - 2.0 * av));
  }
  return 2.0 * av * av / ((1.0 - av) * (2.0 * av - 1.0));
}

RatioEstimate infer_ratio(Rational a, DecayRegime regime, double b_star_measured) {
  if (!(b_star_measured > 0.0)) {
    throw NotInvertibleError("measured critical batch size must be positive");
  }
  RatioEstimate est;
  est.a = Rational::of(a.num, a.den);
  est.regime = regime;
  est.b_star_measured = b_star_measured;
  est.ratio = b_star_measured / critical_batch_multiplier(a, regime);
  return est;
}

BstarPrediction predict_bstar(double ratio, Rational a_target, DecayRegime regime_target) {
  if (!(ratio > 0.0)) throw NotInvertibleError("D2/D1 ratio must be positive");
  BstarPrediction pred;
  pred.b_star = critical_batch_multiplier(a_target, regime_target) * ratio;
  pred.pow2_lower = static_cast<int>(std::floor(std::log2(pred.b_star)));
  // guard against log2 landing a hair off an exact power
  if (std::exp2(pred.pow2_lower + 1) <= pred.b_star) ++pred.pow2_lower;
  if (std::exp2(pred.pow2_lower) > pred.b_star) --pred.pow2_lower;
  pred.pow2_upper =
      std::exp2(pred.pow2_lower) == pred.b_star ? pred.pow2_lower : pred.pow2_lower + 1;
  return pred;
}

BstarPrediction predict_bstar(const RatioEstimate& estimate, Rational a_target,
                              DecayRegime regime_target) {
  return predict_bstar(estimate.ratio, a_target, regime_target);
}

}  // namespace critbatch

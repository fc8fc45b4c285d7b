#pragma once

#include <cstdint>
#include <string>

namespace critbatch {

/// Exact rational, used for the decay exponent `a` so the three decay regimes
/// (a < 1/2, a = 1/2, a > 1/2) are told apart without floating-point equality.
struct Rational {
  long long num = 0;
  long long den = 1;

  static Rational of(long long num, long long den);  // normalizes, den > 0
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

/// Parses "p/q" or a plain integer string.
Rational parse_rational(const std::string& text);

enum class ScheduleVariant { Constant, Decay };

enum class DecayRegime { Decay1, Decay2, Decay3 };

/// A learning-rate rule: either alpha_k = alpha, or the stepwise decay
/// alpha_k = alpha / (floor(k/T) + 1)^a.
struct ScheduleSpec {
  ScheduleVariant variant = ScheduleVariant::Constant;
  double alpha = 0.0;
  Rational a;        // decay only, in (0, 1)
  long long T = 1;   // decay only, >= 1

  DecayRegime regime() const;  // decay only
  std::string name() const;    // "constant" | "decay1" | "decay2" | "decay3"
  bool operator==(const ScheduleSpec&) const = default;
};

/// Constructors validate their arguments (alpha > 0, a in (0,1), T >= 1).
ScheduleSpec constant_schedule(double alpha);
ScheduleSpec decay_schedule(double alpha, Rational a, long long T);

double learning_rate(const ScheduleSpec& s, long long k);

/// Throws ScheduleViolation unless alpha < 2/L (the base rate already caps
/// every decayed rate, so k0 = 0).
void validate_schedule(const ScheduleSpec& s, double L);

/// Exact partial sum of alpha_k^2 for k = 0..K-1.
double sum_squared_rates(const ScheduleSpec& s, long long K);

/// Closed-form upper bound on the partial sum for decay schedules:
///   a < 1/2 :  T alpha^2 K^(1-2a) / (1-2a)
///   a = 1/2 :  T alpha^2 (1 + log K)
///   a > 1/2 :  2a T alpha^2 / (2a-1)
/// Throws on constant schedules (no such bound applies).
double sum_squared_rates_bound(const ScheduleSpec& s, long long K);

}  // namespace critbatch

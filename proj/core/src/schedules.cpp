#include "critbatch/schedules.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "critbatch/errors.hpp"

namespace critbatch {

Rational Rational::of(long long num, long long den) {
  if (den == 0) throw Error("rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) {
      return Rational::of(std::stoll(text), 1);
    }
    return Rational::of(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
  } catch (const std::logic_error&) {
    throw Error("rational: cannot parse '" + text + "' (expected p or p/q)");
  }
}

DecayRegime ScheduleSpec::regime() const {
  if (variant != ScheduleVariant::Decay) throw Error("regime(): constant schedule has no decay regime");
  // exact comparison of a with 1/2: 2*num vs den
  if (2 * a.num < a.den) return DecayRegime::Decay1;
  if (2 * a.num == a.den) return DecayRegime::Decay2;
  return DecayRegime::Decay3;
}

std::string ScheduleSpec::name() const {
  if (variant == ScheduleVariant::Constant) return "constant";
  switch (regime()) {
    case DecayRegime::Decay1: return "decay1";
    case DecayRegime::Decay2: return "decay2";
    case DecayRegime::Decay3: return "decay3";
  }
  return "decay";
}

ScheduleSpec constant_schedule(double alpha) {
  if (!(alpha > 0.0)) throw Error("schedule: alpha must be positive");
  ScheduleSpec s;
  s.variant = ScheduleVariant::Constant;
  s.alpha = alpha;
  return s;
}

ScheduleSpec decay_schedule(double alpha, Rational a, long long T) {
  if (!(alpha > 0.0)) throw Error("schedule: alpha must be positive");
  a = Rational::of(a.num, a.den);
  if (!(a.num > 0 && a.num < a.den)) throw Error("schedule: decay exponent a must lie in (0, 1)");
  if (T < 1) throw Error("schedule: decay period T must be >= 1");
  ScheduleSpec s;
  s.variant = ScheduleVariant::Decay;
  s.alpha = alpha;
  s.a = a;
  s.T = T;
  return s;
}

double learning_rate(const ScheduleSpec& s, long long k) {
  if (s.variant == ScheduleVariant::Constant) return s.alpha;
  const double step = static_cast<double>(k / s.T + 1);
  return s.alpha * std::pow(step, -s.a.value());
}

void validate_schedule(const ScheduleSpec& s, double L) {
  if (!(L > 0.0)) throw Error("validate_schedule: L must be positive");
  const double cap = 2.0 / L;
  if (!(s.alpha < cap)) {
    throw ScheduleViolation("schedule violates alpha < 2/L: alpha = " + std::to_string(s.alpha) +
                                ", 2/L = " + std::to_string(cap),
                            s.alpha, cap);
  }
}

double sum_squared_rates(const ScheduleSpec& s, long long K) {
  if (K < 1) throw Error("sum_squared_rates: K must be >= 1");
  if (s.variant == ScheduleVariant::Constant) {
    return static_cast<double>(K) * s.alpha * s.alpha;
  }
  const double a2 = 2.0 * s.a.value();
  const double alpha2 = s.alpha * s.alpha;
  double sum = 0.0;
  // alpha_k is constant on blocks of T iterations; sum block by block.
  for (long long start = 0, j = 0; start < K; start += s.T, ++j) {
    const long long len = std::min(s.T, K - start);
    sum += static_cast<double>(len) * alpha2 * std::pow(static_cast<double>(j + 1), -a2);
  }
  return sum;
}

double sum_squared_rates_bound(const ScheduleSpec& s, long long K) {
  if (K < 1) throw Error("sum_squared_rates_bound: K must be >= 1");
  if (s.variant == ScheduleVariant::Constant) {
    throw Error("sum_squared_rates_bound: no closed-form bound for constant schedules");
  }
  const double a = s.a.value();
  const double Ta2 = static_cast<double>(s.T) * s.alpha * s.alpha;
  const double Kd = static_cast<double>(K);
  switch (s.regime()) {
    case DecayRegime::Decay1:
      return Ta2 * std::pow(Kd, 1.0 - 2.0 * a) / (1.0 - 2.0 * a);
    case DecayRegime::Decay2:
      return Ta2 * (1.0 + std::log(Kd));
    case DecayRegime::Decay3:
      return 2.0 * a * Ta2 / (2.0 * a - 1.0);
  }
  throw Error("unreachable");
}

}  // namespace critbatch

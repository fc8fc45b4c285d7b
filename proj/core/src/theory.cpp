#include "critbatch/theory.hpp"

#include <cmath>

#include "critbatch/errors.hpp"

namespace critbatch {

namespace {

void require_valid(const TheoryConstants& c) {
  if (!(c.alpha > 0.0) || !(c.alpha < 2.0 / c.L)) {
    throw ScheduleViolation("theory constants require alpha in (0, 2/L)", c.alpha, 2.0 / c.L);
  }
}

double require_in_domain(const TheoryConstants& c, const ScheduleSpec& s, double epsilon,
                         double b) {
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  if (!(b > 0.0)) throw TheoryDomainError("batch size must be positive", 0.0);
  const double pole = batch_domain_pole(c, s, epsilon);
  if (b <= pole) {
    throw TheoryDomainError("b = " + std::to_string(b) + " is at or below the domain pole " +
                                std::to_string(pole),
                            pole);
  }
  if (s.variant == ScheduleVariant::Decay && s.regime() == DecayRegime::Decay2 &&
      !(c.D1 > epsilon * epsilon)) {
    throw TheoryDomainError("decay2 requires D1 > eps^2", pole);
  }
  return pole;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

TheoryConstants theory_constants_raw(double delta, double L, double sigma2, double alpha,
                                     long long T) {
  if (!(delta > 0.0)) throw Error("theory constants require delta > 0");
  if (!(L > 0.0)) throw Error("theory constants require L > 0");
  if (!(sigma2 >= 0.0)) throw Error("theory constants require sigma2 >= 0");
  if (T < 1) throw Error("theory constants require T >= 1");
  TheoryConstants c;
  c.delta = delta;
  c.L = L;
  c.sigma2 = sigma2;
  c.alpha = alpha;
  c.T = T;
  require_valid(c);
  const double gap = 2.0 - L * alpha;
  c.C1 = 2.0 * delta / (gap * alpha);
  c.C2 = L * sigma2 * alpha / gap;
  c.D1 = c.C1;
  c.D2 = static_cast<double>(T) * alpha * alpha * L * sigma2 / gap;
  return c;
}

TheoryConstants theory_constants(const ProblemSpec& problem, const ScheduleSpec& schedule) {
  validate_schedule(schedule, problem.L);
  const long long T = schedule.variant == ScheduleVariant::Decay ? schedule.T : 1;
  return theory_constants_raw(problem.delta0, problem.L, problem.sigma2, schedule.alpha, T);
}

double gradient_bound(const TheoryConstants& c, const ScheduleSpec& s, double K, double b) {
  if (!(K >= 1.0)) throw Error("gradient_bound: K must be >= 1");
  if (!(b >= 1.0)) throw Error("gradient_bound: b must be >= 1");
  if (s.variant == ScheduleVariant::Constant) {
    return c.C1 / K + c.C2 / b;
  }
  const double a = s.a.value();
  switch (s.regime()) {
    case DecayRegime::Decay1:
      return c.D1 / std::pow(K, a) + c.D2 / ((1.0 - 2.0 * a) * std::pow(K, a) * b);
    case DecayRegime::Decay2:
      return c.D1 / std::sqrt(K) + (1.0 / std::sqrt(K) + 1.0) * c.D2 / b;
    case DecayRegime::Decay3:
      return c.D1 / std::pow(K, 1.0 - a) +
             2.0 * a * c.D2 / ((2.0 * a - 1.0) * std::pow(K, 1.0 - a) * b);
  }
  throw Error("unreachable");
}

double batch_domain_pole(const TheoryConstants& c, const ScheduleSpec& s, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  if (s.variant == ScheduleVariant::Constant) return c.C2 / (epsilon * epsilon);
  if (s.regime() == DecayRegime::Decay2) return c.D2 / (epsilon * epsilon);
  return 0.0;
}

double iterations_needed(const TheoryConstants& c, const ScheduleSpec& s, double epsilon,
                         double b) {
  require_in_domain(c, s, epsilon, b);
  const double e2 = epsilon * epsilon;
  if (s.variant == ScheduleVariant::Constant) {
    return c.C1 * b / (e2 * b - c.C2);
  }
  const double a = s.a.value();
  switch (s.regime()) {
    case DecayRegime::Decay1:
      return std::pow((c.D1 + c.D2 / ((1.0 - 2.0 * a) * b)) / e2, 1.0 / a);
    case DecayRegime::Decay2: {
      const double root = (c.D1 * b + c.D2) / (e2 * b - c.D2);
      return root * root;
    }
    case DecayRegime::Decay3:
      return std::pow((c.D1 + 2.0 * a * c.D2 / ((2.0 * a - 1.0) * b)) / e2, 1.0 / (1.0 - a));
  }
  throw Error("unreachable");
}

double sfo_needed(const TheoryConstants& c, const ScheduleSpec& s, double epsilon, double b) {
  return iterations_needed(c, s, epsilon, b) * b;
}

CriticalBatch critical_batch(const TheoryConstants& c, const ScheduleSpec& s, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  if (c.sigma2 == 0.0) {
    // No variance term: N grows linearly in b, so the smallest batch wins.
    return CriticalBatch{1.0, CriticalBatchFlavor::None};
  }
  const double e2 = epsilon * epsilon;
  if (s.variant == ScheduleVariant::Constant) {
    return CriticalBatch{2.0 * c.C2 / e2, CriticalBatchFlavor::StationaryPoint};
  }
  const double a = s.a.value();
  switch (s.regime()) {
    case DecayRegime::Decay1:
      return CriticalBatch{(1.0 - a) * c.D2 / (a * (1.0 - 2.0 * a) * c.D1),
                           CriticalBatchFlavor::StationaryPoint};
    case DecayRegime::Decay2:
      return CriticalBatch{c.D2 / e2, CriticalBatchFlavor::BoundaryApproximation};
    case DecayRegime::Decay3:
      return CriticalBatch{2.0 * a * a * c.D2 / ((1.0 - a) * (2.0 * a - 1.0) * c.D1),
                           CriticalBatchFlavor::StationaryPoint};
  }
  throw Error("unreachable");
}

double decay2_stationary_batch(const TheoryConstants& c, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  if (!(c.sigma2 > 0.0)) throw Error("decay2_stationary_batch requires sigma2 > 0");
  const double e2 = epsilon * epsilon;
  const double disc = 9.0 * c.D1 * c.D1 + 10.0 * c.D1 * e2 + e2 * e2;
  return c.D2 * (3.0 * c.D1 + e2 + std::sqrt(disc)) / (2.0 * c.D1 * e2);
}

Derivatives k_derivatives(const TheoryConstants& c, const ScheduleSpec& s, double epsilon,
                          double b) {
  require_in_domain(c, s, epsilon, b);
  const double e2 = epsilon * epsilon;
  Derivatives d;
  if (s.variant == ScheduleVariant::Constant) {
    const double q = e2 * b - c.C2;
    d.first = -c.C1 * c.C2 / (q * q);
    d.second = 2.0 * e2 * c.C1 * c.C2 / (q * q * q);
    return d;
  }
  const double a = s.a.value();
  switch (s.regime()) {
    case DecayRegime::Decay1: {
      const double cc = c.D2 / (1.0 - 2.0 * a);
      const double E = (c.D1 + cc / b) / e2;
      const double m = (1.0 - a) / a;
      d.first = -cc / (a * e2 * b * b) * std::pow(E, m);
      d.second = 2.0 * cc / (a * e2 * b * b * b) * std::pow(E, m) +
                 (1.0 - a) * cc * cc / (a * a * e2 * e2 * b * b * b * b) * std::pow(E, m - 1.0);
      return d;
    }
    case DecayRegime::Decay2: {
      const double P = c.D1 * b + c.D2;
      const double Q = e2 * b - c.D2;
      const double w = c.D2 * (c.D1 + e2);
      d.first = -2.0 * w * P / (Q * Q * Q);
      d.second = 2.0 * w * (2.0 * c.D1 * e2 * b + c.D1 * c.D2 + 3.0 * c.D2 * e2) / (Q * Q * Q * Q);
      return d;
    }
    case DecayRegime::Decay3: {
      const double g = 2.0 * a * c.D2 / (2.0 * a - 1.0);
      const double E = (c.D1 + g / b) / e2;
      const double m = a / (1.0 - a);
      d.first = -g / ((1.0 - a) * e2 * b * b) * std::pow(E, m);
      d.second = 2.0 * g / ((1.0 - a) * e2 * b * b * b) * std::pow(E, m) +
                 a * g * g / ((1.0 - a) * (1.0 - a) * e2 * e2 * b * b * b * b) *
                     std::pow(E, m - 1.0);
      return d;
    }
  }
  throw Error("unreachable");
}

Derivatives n_derivatives(const TheoryConstants& c, const ScheduleSpec& s, double epsilon,
                          double b) {
  require_in_domain(c, s, epsilon, b);
  const double e2 = epsilon * epsilon;
  Derivatives d;
  if (s.variant == ScheduleVariant::Constant) {
    const double q = e2 * b - c.C2;
    d.first = c.C1 * b * (e2 * b - 2.0 * c.C2) / (q * q);
    d.second = 2.0 * c.C1 * c.C2 * c.C2 / (q * q * q);
    return d;
  }
  const double a = s.a.value();
  switch (s.regime()) {
    case DecayRegime::Decay1: {
      const double cc = c.D2 / (1.0 - 2.0 * a);
      const double E = (c.D1 + cc / b) / e2;
      const double m = (1.0 - a) / a;
      d.first = std::pow(E, m) * (E - cc / (a * e2 * b));
      d.second = (1.0 - a) * cc * cc / (a * a * e2 * e2 * b * b * b) * std::pow(E, m - 1.0);
      return d;
    }
    case DecayRegime::Decay2: {
      const double P = c.D1 * b + c.D2;
      const double Q = e2 * b - c.D2;
      const double w = c.D2 * (c.D1 + e2);
      d.first = P * (c.D1 * e2 * b * b - (3.0 * c.D1 + e2) * c.D2 * b - c.D2 * c.D2) / (Q * Q * Q);
      d.second = 2.0 * w * (3.0 * c.D1 * c.D2 * b + c.D2 * e2 * b + 2.0 * c.D2 * c.D2) /
                 (Q * Q * Q * Q);
      return d;
    }
    case DecayRegime::Decay3: {
      const double g = 2.0 * a * c.D2 / (2.0 * a - 1.0);
      const double E = (c.D1 + g / b) / e2;
      const double m = a / (1.0 - a);
      d.first = std::pow(E, m) * (E - g / ((1.0 - a) * e2 * b));
      d.second = a * g * g / ((1.0 - a) * (1.0 - a) * e2 * e2 * b * b * b) * std::pow(E, m - 1.0);
      return d;
    }
  }
  throw Error("unreachable");
}

ExponentFit complexity_exponents(const TheoryConstants& c, const ScheduleSpec& s,
                                 std::span<const double> epsilon_grid) {
  if (epsilon_grid.size() < 3) {
    throw Error("complexity_exponents: need at least 3 epsilon values");
  }
  if (!(c.sigma2 > 0.0)) {
    throw TheoryDomainError("complexity_exponents: sigma2 = 0 has no critical batch", 0.0);
  }
  const bool decay2 =
      s.variant == ScheduleVariant::Decay && s.regime() == DecayRegime::Decay2;
  std::vector<double> x, logk, logn;
  double prev = 0.0;
  for (std::size_t i = 0; i < epsilon_grid.size(); ++i) {
    const double eps = epsilon_grid[i];
    if (!(eps > 0.0)) throw Error("complexity_exponents: epsilon values must be positive");
    if (i > 0 && !(eps < prev)) throw Error("complexity_exponents: epsilon grid must decrease");
    prev = eps;
    if (decay2 && !(eps * eps < c.D1)) {
      throw Error("complexity_exponents: decay2 requires epsilon < sqrt(D1)");
    }
    double bstar;
    if (decay2) {
      bstar = (c.D2 + 1.0) / (eps * eps);
    } else {
      bstar = critical_batch(c, s, eps).b_star;
    }
    const double K = iterations_needed(c, s, eps, bstar);
    x.push_back(std::log(1.0 / eps));
    logk.push_back(std::log(K));
    logn.push_back(std::log(K * bstar));
  }
  ExponentFit fit;
  fit.k_slope = least_squares_slope(x, logk);
  fit.n_slope = least_squares_slope(x, logn);
  return fit;
}

double expected_k_slope(const ScheduleSpec& s) {
  if (s.variant == ScheduleVariant::Constant) return 2.0;
  switch (s.regime()) {
    case DecayRegime::Decay1: return 2.0 / s.a.value();
    case DecayRegime::Decay2: return 4.0;
    case DecayRegime::Decay3: return 2.0 / (1.0 - s.a.value());
  }
  throw Error("unreachable");
}

double expected_n_slope(const ScheduleSpec& s) {
  if (s.variant == ScheduleVariant::Constant) return 4.0;
  switch (s.regime()) {
    case DecayRegime::Decay1: return 2.0 / s.a.value();
    case DecayRegime::Decay2: return 6.0;
    case DecayRegime::Decay3: return 2.0 / (1.0 - s.a.value());
  }
  throw Error("unreachable");
}

}  // namespace critbatch

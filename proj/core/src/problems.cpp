#include "critbatch/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

#include "critbatch/errors.hpp"
#include "critbatch/rng.hpp"

namespace critbatch {

namespace {

constexpr std::uint64_t kTagComponent = 1;
constexpr std::uint64_t kTagNoise = 2;
constexpr std::uint64_t kTagCenters = 3;
constexpr std::uint64_t kTagTheta0 = 4;
constexpr std::uint64_t kTagFeatures = 5;
constexpr std::uint64_t kTagLabels = 6;
constexpr std::uint64_t kTagProbe = 7;

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * y[j];
  return s;
}

double norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void check_theta(const ProblemSpec& p, std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != p.d) {
    throw InvalidProblemError("theta has length " + std::to_string(theta.size()) +
                              ", problem dimension is " + std::to_string(p.d));
  }
}

double gauss_at(std::uint64_t seed, std::uint64_t w0, std::uint64_t w1, std::uint64_t tag) {
  return gauss(hash4(seed, w0, w1, 0, tag), hash4(seed, w0, w1, 1, tag));
}

std::vector<double> default_theta0(std::uint64_t seed, int d) {
  std::vector<double> t(d);
  for (int j = 0; j < d; ++j) t[j] = gauss_at(seed, static_cast<std::uint64_t>(j), 0, kTagTheta0);
  return t;
}

// log(1 + exp(-m)) without overflow.
double softplus_neg(double m) {
  if (m < 0.0) return -m + std::log1p(std::exp(m));
  return std::log1p(std::exp(-m));
}

// sigma(-m) = 1 / (1 + exp(m))
double sigmoid_neg(double m) {
  if (m > 0.0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

double logistic_value(const LogisticParams& q, int n, int d, std::span<const double> theta) {
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double m = q.labels[i] * dot({&q.features[static_cast<std::size_t>(i) * d],
                                        static_cast<std::size_t>(d)}, theta);
    loss += softplus_neg(m);
  }
  loss /= n;
  return loss + 0.5 * q.lambda * dot(theta, theta);
}

double logistic_value_grad(const LogisticParams& q, int n, int d, std::span<const double> theta,
                           std::span<double> grad) {
  double loss = 0.0;
  std::fill(grad.begin(), grad.end(), 0.0);
  for (int i = 0; i < n; ++i) {
    const double* x = &q.features[static_cast<std::size_t>(i) * d];
    const double y = q.labels[i];
    const double m = y * dot({x, static_cast<std::size_t>(d)}, theta);
    loss += softplus_neg(m);
    const double w = -y * sigmoid_neg(m);
    for (int j = 0; j < d; ++j) grad[j] += w * x[j];
  }
  loss /= n;
  for (int j = 0; j < d; ++j) grad[j] = grad[j] / n + q.lambda * theta[j];
  return loss + 0.5 * q.lambda * dot(theta, theta);
}

// Solves the SPD system H p = rhs in place via Cholesky. H is row-major d x d.
void cholesky_solve(std::vector<double>& H, std::vector<double>& rhs, int d) {
  for (int c = 0; c < d; ++c) {
    double diag = H[static_cast<std::size_t>(c) * d + c];
    for (int k = 0; k < c; ++k) {
      const double l = H[static_cast<std::size_t>(c) * d + k];
      diag -= l * l;
    }
    if (!(diag > 0.0)) throw Error("logistic solve: Hessian not positive definite");
    diag = std::sqrt(diag);
    H[static_cast<std::size_t>(c) * d + c] = diag;
    for (int r = c + 1; r < d; ++r) {
      double v = H[static_cast<std::size_t>(r) * d + c];
      for (int k = 0; k < c; ++k) {
        v -= H[static_cast<std::size_t>(r) * d + k] * H[static_cast<std::size_t>(c) * d + k];
      }
      H[static_cast<std::size_t>(r) * d + c] = v / diag;
    }
  }
  for (int r = 0; r < d; ++r) {
    double v = rhs[r];
    for (int k = 0; k < r; ++k) v -= H[static_cast<std::size_t>(r) * d + k] * rhs[k];
    rhs[r] = v / H[static_cast<std::size_t>(r) * d + r];
  }
  for (int r = d - 1; r >= 0; --r) {
    double v = rhs[r];
    for (int k = r + 1; k < d; ++k) v -= H[static_cast<std::size_t>(k) * d + r] * rhs[k];
    rhs[r] = v / H[static_cast<std::size_t>(r) * d + r];
  }
}

// Damped Newton on the regularized logistic loss. Returns the iterate with
// ||grad f|| <= tol (or the best found after max_iter steps).
std::vector<double> newton_minimize(const LogisticParams& q, int n, int d,
                                    std::vector<double> theta, double tol, int max_iter) {
  std::vector<double> grad(d), step(d), hess;
  std::vector<double> trial(d);
  double f = logistic_value_grad(q, n, d, theta, grad);
  for (int it = 0; it < max_iter; ++it) {
    if (norm(grad) <= tol) break;
    hess.assign(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < n; ++i) {
      const double* x = &q.features[static_cast<std::size_t>(i) * d];
      const double m = q.labels[i] * dot({x, static_cast<std::size_t>(d)}, theta);
      const double s = sigmoid_neg(m);
      const double w = s * (1.0 - s) / n;
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c <= r; ++c) hess[static_cast<std::size_t>(r) * d + c] += w * x[r] * x[c];
      }
    }
    const double ridge = q.lambda > 0.0 ? q.lambda : 1e-12;
    for (int j = 0; j < d; ++j) hess[static_cast<std::size_t>(j) * d + j] += ridge;
    for (int r = 0; r < d; ++r) {
      for (int c = r + 1; c < d; ++c) {
        hess[static_cast<std::size_t>(r) * d + c] = hess[static_cast<std::size_t>(c) * d + r];
      }
    }
    step = grad;
    cholesky_solve(hess, step, d);
    double t = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      for (int j = 0; j < d; ++j) trial[j] = theta[j] - t * step[j];
      const double ft = logistic_value(q, n, d, trial);
      if (ft <= f) {
        theta = trial;
        f = ft;
        break;
      }
      t *= 0.5;
    }
    f = logistic_value_grad(q, n, d, theta, grad);
  }
  return theta;
}

double component_variance(const ProblemSpec& p, std::span<const double> theta) {
  std::vector<double> g(p.d), gi(p.d);
  full_value_grad(p, theta, g);
  double v = 0.0;
  for (int i = 0; i < p.n; ++i) {
    component_gradient(p, i, theta, gi);
    double s = 0.0;
    for (int j = 0; j < p.d; ++j) {
      const double diff = gi[j] - g[j];
      s += diff * diff;
    }
    v += s;
  }
  return v / p.n;
}

ProblemSpec finish_quadratic(std::uint64_t seed, int n, int d, std::vector<double> spectrum,
                             std::vector<double> centers, double eps_nc) {
  for (double lam : spectrum) {
    if (!(lam > 0.0)) throw InvalidProblemError("quadratic-sine: spectrum entries must be positive");
  }
  if (!(eps_nc >= 0.0)) throw InvalidProblemError("quadratic-sine: eps_nc must be nonnegative");

  QuadraticSineParams q;
  q.spectrum = std::move(spectrum);
  q.centers = std::move(centers);
  q.eps_nc = eps_nc;
  q.center_mean.assign(d, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) q.center_mean[j] += q.centers[static_cast<std::size_t>(i) * d + j];
  }
  for (int j = 0; j < d; ++j) q.center_mean[j] /= n;

  double sigma2 = 0.0;   // (1/n) sum_i ||A (cbar - c_i)||^2
  double floor_v = 0.0;  // (1/(2n)) sum_i (c_i - cbar)' A (c_i - cbar)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      const double dc = q.center_mean[j] - q.centers[static_cast<std::size_t>(i) * d + j];
      sigma2 += q.spectrum[j] * q.spectrum[j] * dc * dc;
      floor_v += 0.5 * q.spectrum[j] * dc * dc;
    }
  }
  sigma2 /= n;
  floor_v /= n;

  ProblemSpec p;
  p.kind = ProblemKind::QuadraticSine;
  p.seed = seed;
  p.n = n;
  p.d = d;
  p.L = *std::max_element(q.spectrum.begin(), q.spectrum.end()) + eps_nc;
  p.sigma2 = sigma2;
  q.quad_floor = floor_v;
  p.f_star = floor_v - eps_nc * d;
  p.theta0 = default_theta0(seed, d);
  p.params = std::move(q);
  p.delta0 = full_value(p, p.theta0) - p.f_star;
  return p;
}

}  // namespace

ProblemSpec make_quadratic_sine(std::uint64_t seed, int n, int d,
                                std::span<const double> spectrum, double eps_nc) {
  if (n < 1 || d < 1) throw InvalidProblemError("quadratic-sine: n and d must be positive");
  if (static_cast<int>(spectrum.size()) != d) {
    throw InvalidProblemError("quadratic-sine: spectrum must have d entries");
  }
  std::vector<double> centers(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      centers[static_cast<std::size_t>(i) * d + j] =
          gauss_at(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j), kTagCenters);
    }
  }
  return finish_quadratic(seed, n, d, {spectrum.begin(), spectrum.end()}, std::move(centers),
                          eps_nc);
}

ProblemSpec make_quadratic_sine(std::uint64_t seed, std::span<const double> spectrum,
                                std::vector<double> centers, double eps_nc) {
  const int d = static_cast<int>(spectrum.size());
  if (d < 1) throw InvalidProblemError("quadratic-sine: spectrum must be nonempty");
  if (centers.empty() || centers.size() % static_cast<std::size_t>(d) != 0) {
    throw InvalidProblemError("quadratic-sine: centers must be a nonempty multiple of d values");
  }
  const int n = static_cast<int>(centers.size() / static_cast<std::size_t>(d));
  return finish_quadratic(seed, n, d, {spectrum.begin(), spectrum.end()}, std::move(centers),
                          eps_nc);
}

namespace {

ProblemSpec finish_logistic(std::uint64_t seed, int n, int d, LogisticParams q);

}  // namespace

ProblemSpec make_logistic(std::uint64_t seed, int n, int d, double lambda) {
  if (n < 1 || d < 1) throw InvalidProblemError("logistic: n and d must be positive");
  if (!(lambda >= 0.0)) throw InvalidProblemError("logistic: lambda must be nonnegative");

  LogisticParams q;
  q.lambda = lambda;
  q.features.resize(static_cast<std::size_t>(n) * d);
  q.labels.resize(n);
  std::vector<double> w(d);
  for (int j = 0; j < d; ++j) w[j] = gauss_at(seed, static_cast<std::uint64_t>(j), 0, kTagLabels);
  for (int i = 0; i < n; ++i) {
    double margin = 0.0;
    for (int j = 0; j < d; ++j) {
      const double x =
          gauss_at(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j), kTagFeatures);
      q.features[static_cast<std::size_t>(i) * d + j] = x;
      margin += x * w[j];
    }
    margin += 0.5 * gauss_at(seed, static_cast<std::uint64_t>(i), 1, kTagLabels);
    q.labels[i] = margin >= 0.0 ? 1.0 : -1.0;
  }
  return finish_logistic(seed, n, d, std::move(q));
}

ProblemSpec make_logistic(std::uint64_t seed, std::vector<double> features,
                          std::vector<double> labels, int d, double lambda) {
  if (d < 1) throw InvalidProblemError("logistic: d must be positive");
  if (!(lambda >= 0.0)) throw InvalidProblemError("logistic: lambda must be nonnegative");
  const int n = static_cast<int>(labels.size());
  if (n < 1 || features.size() != static_cast<std::size_t>(n) * d) {
    throw InvalidProblemError("logistic: features must hold n x d values");
  }
  for (const double y : labels) {
    if (y != 1.0 && y != -1.0) throw InvalidProblemError("logistic: labels must be +-1");
  }
  LogisticParams q;
  q.lambda = lambda;
  q.features = std::move(features);
  q.labels = std::move(labels);
  return finish_logistic(seed, n, d, std::move(q));
}

namespace {

ProblemSpec finish_logistic(std::uint64_t seed, int n, int d, LogisticParams q) {
  const double lambda = q.lambda;
  double gram_trace = 0.0;
  for (const double x : q.features) gram_trace += x * x;
  const double L = gram_trace / (4.0 * n) + lambda;
  if (!(L > 0.0)) {
    throw InvalidProblemError("logistic: smoothness constant is zero (alpha < 2/L undefined)");
  }

  ProblemSpec p;
  p.kind = ProblemKind::Logistic;
  p.seed = seed;
  p.n = n;
  p.d = d;
  p.L = L;

  const bool all_equal =
      std::all_of(q.labels.begin(), q.labels.end(), [&](double y) { return y == q.labels[0]; });
  if (all_equal && n > 1) p.warnings.push_back("degenerate data: all labels equal");

  q.theta_hat = newton_minimize(q, n, d, std::vector<double>(d, 0.0), 1e-12, 200);
  std::vector<double> grad(d);
  const double f_hat = logistic_value_grad(q, n, d, q.theta_hat, grad);
  q.solve_grad_norm = norm(grad);
  double f_star;
  if (lambda > 0.0) {
    // strong convexity certificate: f* >= f(theta_hat) - ||grad||^2 / (2 lambda)
    f_star = f_hat - q.solve_grad_norm * q.solve_grad_norm / (2.0 * lambda);
  } else {
    f_star = f_hat - 1e-10;
    p.warnings.push_back("lambda = 0: f_star lower bound is heuristic");
  }

  p.theta0 = default_theta0(seed, d);
  p.f_star = f_star;

  // sigma2 by probe maximization: 256 points in the ball of radius
  // 2*||theta0|| around theta0, then a 1.5x safety factor.
  q.probe_seed = seed;
  q.probe_points = 256;
  q.probe_radius = 2.0 * norm(p.theta0);
  q.variance_safety = 1.5;
  if (q.probe_radius == 0.0) {
    q.probe_radius = 1.0;
    p.warnings.push_back("theta0 is zero: probe radius defaulted to 1");
  }
  p.params = std::move(q);

  double max_var = 0.0;
  {
    const auto& qq = std::get<LogisticParams>(p.params);
    std::vector<double> dir(d), point(d);
    for (int t = 0; t < qq.probe_points; ++t) {
      double nrm2 = 0.0;
      for (int j = 0; j < d; ++j) {
        dir[j] = gauss_at(seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(j),
                          kTagProbe);
        nrm2 += dir[j] * dir[j];
      }
      const double u = u01(hash4(seed, static_cast<std::uint64_t>(t), 0, 2, kTagProbe));
      const double r = qq.probe_radius * std::pow(u, 1.0 / d) / std::sqrt(std::max(nrm2, 1e-300));
      for (int j = 0; j < d; ++j) point[j] = p.theta0[j] + r * dir[j];
      max_var = std::max(max_var, component_variance(p, point));
    }
    max_var = std::max(max_var, component_variance(p, p.theta0));
  }
  p.sigma2 = max_var * std::get<LogisticParams>(p.params).variance_safety;
  p.delta0 = full_value(p, p.theta0) - p.f_star;
  return p;
}

}  // namespace

double logistic_fstar_check(const ProblemSpec& p, std::uint64_t solver_seed) {
  if (p.kind != ProblemKind::Logistic) {
    throw InvalidProblemError("logistic_fstar_check: not a logistic problem");
  }
  const auto& q = std::get<LogisticParams>(p.params);
  std::vector<double> start(p.d);
  for (int j = 0; j < p.d; ++j) {
    start[j] = gauss_at(solver_seed, static_cast<std::uint64_t>(j), 2, kTagTheta0);
  }
  const std::vector<double> theta_hat = newton_minimize(q, p.n, p.d, std::move(start), 1e-12, 200);
  std::vector<double> grad(p.d);
  const double f_hat = logistic_value_grad(q, p.n, p.d, theta_hat, grad);
  const double gn = norm(grad);
  if (q.lambda > 0.0) return f_hat - gn * gn / (2.0 * q.lambda);
  return f_hat - 1e-10;
}

ProblemSpec with_theta0(const ProblemSpec& p, std::vector<double> theta0) {
  if (static_cast<int>(theta0.size()) != p.d) {
    throw InvalidProblemError("with_theta0: dimension mismatch");
  }
  ProblemSpec out = p;
  out.theta0 = std::move(theta0);
  out.delta0 = full_value(out, out.theta0) - out.f_star;
  return out;
}

double full_value_grad(const ProblemSpec& p, std::span<const double> theta,
                       std::span<double> grad) {
  check_theta(p, theta);
  if (static_cast<int>(grad.size()) != p.d) {
    throw InvalidProblemError("gradient buffer has wrong length");
  }
  if (p.kind == ProblemKind::QuadraticSine) {
    const auto& q = std::get<QuadraticSineParams>(p.params);
    double f = q.quad_floor;
    for (int j = 0; j < p.d; ++j) {
      const double dx = theta[j] - q.center_mean[j];
      f += 0.5 * q.spectrum[j] * dx * dx;
      grad[j] = q.spectrum[j] * dx;
      if (q.eps_nc != 0.0) {
        f += q.eps_nc * std::sin(theta[j]);
        grad[j] += q.eps_nc * std::cos(theta[j]);
      }
    }
    return f;
  }
  const auto& q = std::get<LogisticParams>(p.params);
  return logistic_value_grad(q, p.n, p.d, theta, grad);
}

double full_value(const ProblemSpec& p, std::span<const double> theta) {
  check_theta(p, theta);
  if (p.kind == ProblemKind::QuadraticSine) {
    const auto& q = std::get<QuadraticSineParams>(p.params);
    double f = q.quad_floor;
    for (int j = 0; j < p.d; ++j) {
      const double dx = theta[j] - q.center_mean[j];
      f += 0.5 * q.spectrum[j] * dx * dx;
      if (q.eps_nc != 0.0) f += q.eps_nc * std::sin(theta[j]);
    }
    return f;
  }
  return logistic_value(std::get<LogisticParams>(p.params), p.n, p.d, theta);
}

void component_gradient(const ProblemSpec& p, int i, std::span<const double> theta,
                        std::span<double> grad) {
  check_theta(p, theta);
  if (i < 0 || i >= p.n) throw InvalidProblemError("component index out of range");
  if (p.kind == ProblemKind::QuadraticSine) {
    const auto& q = std::get<QuadraticSineParams>(p.params);
    const double* c = &q.centers[static_cast<std::size_t>(i) * p.d];
    for (int j = 0; j < p.d; ++j) {
      grad[j] = q.spectrum[j] * (theta[j] - c[j]);
      if (q.eps_nc != 0.0) grad[j] += q.eps_nc * std::cos(theta[j]);
    }
    return;
  }
  const auto& q = std::get<LogisticParams>(p.params);
  const double* x = &q.features[static_cast<std::size_t>(i) * p.d];
  const double y = q.labels[i];
  const double m = y * dot({x, static_cast<std::size_t>(p.d)}, theta);
  const double w = -y * sigmoid_neg(m);
  for (int j = 0; j < p.d; ++j) grad[j] = w * x[j] + q.lambda * theta[j];
}

void minibatch_gradient(const ProblemSpec& p, OracleMode mode, std::span<const double> theta,
                        int b, const SampleStream& stream, std::span<double> out) {
  check_theta(p, theta);
  if (b < 1) throw InvalidProblemError("batch size must be >= 1");
  if (mode == OracleMode::FiniteSum) {
    if (b > p.n) {
      throw InvalidProblemError("finite-sum oracle requires b <= n (b = " + std::to_string(b) +
                                ", n = " + std::to_string(p.n) + ")");
    }
    if (p.kind == ProblemKind::QuadraticSine) {
      const auto& q = std::get<QuadraticSineParams>(p.params);
      // batch gradient = A(theta - mean of sampled centers) + eps_nc cos(theta)
      std::fill(out.begin(), out.end(), 0.0);
      for (int i = 0; i < b; ++i) {
        const std::uint64_t idx = uniform_index(
            hash4(stream.seed, stream.trial, stream.step, static_cast<std::uint64_t>(i),
                  kTagComponent),
            static_cast<std::uint64_t>(p.n));
        const double* c = &q.centers[static_cast<std::size_t>(idx) * p.d];
        for (int j = 0; j < p.d; ++j) out[j] += c[j];
      }
      for (int j = 0; j < p.d; ++j) {
        out[j] = q.spectrum[j] * (theta[j] - out[j] / b);
        if (q.eps_nc != 0.0) out[j] += q.eps_nc * std::cos(theta[j]);
      }
      return;
    }
    const auto& q = std::get<LogisticParams>(p.params);
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 0; i < b; ++i) {
      const std::uint64_t idx = uniform_index(
          hash4(stream.seed, stream.trial, stream.step, static_cast<std::uint64_t>(i),
                kTagComponent),
          static_cast<std::uint64_t>(p.n));
      const double* x = &q.features[static_cast<std::size_t>(idx) * p.d];
      const double y = q.labels[idx];
      const double m = y * dot({x, static_cast<std::size_t>(p.d)}, theta);
      const double w = -y * sigmoid_neg(m);
      for (int j = 0; j < p.d; ++j) out[j] += w * x[j];
    }
    for (int j = 0; j < p.d; ++j) out[j] = out[j] / b + q.lambda * theta[j];
    return;
  }
  // Additive noise: the average of b i.i.d. N(0, (sigma2/d) I) perturbations
  // is realized as one draw with per-coordinate variance sigma2 / (b d).
  full_value_grad(p, theta, out);
  if (p.sigma2 > 0.0) {
    const double scale = std::sqrt(p.sigma2 / (static_cast<double>(b) * p.d));
    for (int j = 0; j < p.d; ++j) {
      const double z = gauss(hash4(stream.seed, stream.trial, stream.step,
                                   2 * static_cast<std::uint64_t>(j), kTagNoise),
                             hash4(stream.seed, stream.trial, stream.step,
                                   2 * static_cast<std::uint64_t>(j) + 1, kTagNoise));
      out[j] += scale * z;
    }
  }
}

std::string problem_record_json(const ProblemSpec& p) {
  nlohmann::ordered_json record;
  record["kind"] = p.kind == ProblemKind::QuadraticSine ? "quadratic-sine" : "logistic";
  record["seed"] = p.seed;
  record["n"] = p.n;
  record["d"] = p.d;
  record["L"] = p.L;
  record["sigma2"] = p.sigma2;
  record["f_star"] = p.f_star;
  record["delta0"] = p.delta0;
  if (!p.warnings.empty()) record["warnings"] = p.warnings;
  return record.dump();
}

}  // namespace critbatch

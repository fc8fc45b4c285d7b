#include "critbatch/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "critbatch/errors.hpp"
#include "critbatch/theory.hpp"
#include "internal_format.hpp"

namespace critbatch {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + context);
    }
  }
}

template <typename T>
T get_as(const json& obj, const std::string& key, const std::string& context,
         const char* type_name) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "' in " + context + " must be " + type_name);
  }
}

Rational rational_from(const json& value, const std::string& context) {
  if (value.is_string()) return parse_rational(value.get<std::string>());
  if (value.is_array() && value.size() == 2 && value[0].is_number_integer() &&
      value[1].is_number_integer()) {
    return Rational::of(value[0].get<long long>(), value[1].get<long long>());
  }
  throw ConfigError("key 'a' in " + context + " must be a rational: \"p/q\" or [p, q]");
}

std::vector<double> geometric_spectrum(double lo, double hi, int d) {
  if (!(lo > 0.0) || !(hi >= lo)) {
    throw ConfigError("spectrum.geometric requires 0 < min <= max");
  }
  std::vector<double> s(d);
  if (d == 1) {
    s[0] = hi;
    return s;
  }
  const double ratio = std::log(hi / lo) / (d - 1);
  for (int j = 0; j < d; ++j) s[j] = lo * std::exp(ratio * j);
  s[d - 1] = hi;
  return s;
}

ProblemSpec parse_problem(const json& pj) {
  check_keys(pj,
             {"kind", "seed", "n", "d", "spectrum", "eps_nc", "centers", "lambda", "theta0",
              "theta0_scale"},
             "problem");
  const std::string kind = get_as<std::string>(pj, "kind", "problem", "a string");
  const std::uint64_t seed =
      pj.contains("seed") ? get_as<std::uint64_t>(pj, "seed", "problem", "an integer") : 1;
  const int n = pj.contains("n") ? get_as<int>(pj, "n", "problem", "an integer") : 1000;
  const int d = pj.contains("d") ? get_as<int>(pj, "d", "problem", "an integer") : 20;

  ProblemSpec problem;
  if (kind == "quadratic-sine") {
    if (pj.contains("lambda")) {
      throw ConfigError("key 'lambda' in problem applies to the logistic kind only");
    }
    const double eps_nc =
        pj.contains("eps_nc") ? get_as<double>(pj, "eps_nc", "problem", "a number") : 0.0;
    std::vector<double> spectrum;
    if (!pj.contains("spectrum")) {
      spectrum = geometric_spectrum(0.05, 1.0, d);
    } else if (pj.at("spectrum").is_array()) {
      spectrum = get_as<std::vector<double>>(pj, "spectrum", "problem", "an array of numbers");
      if (static_cast<int>(spectrum.size()) != d) {
        throw ConfigError("problem.spectrum must have exactly d entries");
      }
    } else if (pj.at("spectrum").is_object()) {
      const json& sj = pj.at("spectrum");
      check_keys(sj, {"geometric"}, "problem.spectrum");
      const json& gj = sj.at("geometric");
      check_keys(gj, {"min", "max"}, "problem.spectrum.geometric");
      spectrum = geometric_spectrum(get_as<double>(gj, "min", "spectrum.geometric", "a number"),
                                    get_as<double>(gj, "max", "spectrum.geometric", "a number"),
                                    d);
    } else {
      throw ConfigError("problem.spectrum must be an array or {\"geometric\": {...}}");
    }
    if (pj.contains("centers")) {
      auto centers =
          get_as<std::vector<double>>(pj, "centers", "problem", "an array of numbers");
      problem = make_quadratic_sine(seed, spectrum, std::move(centers), eps_nc);
    } else {
      problem = make_quadratic_sine(seed, n, d, spectrum, eps_nc);
    }
  } else if (kind == "logistic") {
    for (const char* key : {"spectrum", "eps_nc", "centers"}) {
      if (pj.contains(key)) {
        throw ConfigError(std::string("key '") + key +
                          "' in problem applies to the quadratic-sine kind only");
      }
    }
    const double lambda =
        pj.contains("lambda") ? get_as<double>(pj, "lambda", "problem", "a number") : 0.1;
    problem = make_logistic(seed, n, d, lambda);
  } else {
    throw ConfigError("problem.kind must be 'quadratic-sine' or 'logistic'");
  }

  if (pj.contains("theta0") && pj.contains("theta0_scale")) {
    throw ConfigError("problem.theta0 and problem.theta0_scale are mutually exclusive");
  }
  if (pj.contains("theta0")) {
    problem = with_theta0(
        problem, get_as<std::vector<double>>(pj, "theta0", "problem", "an array of numbers"));
  } else if (pj.contains("theta0_scale")) {
    const double scale = get_as<double>(pj, "theta0_scale", "problem", "a number");
    std::vector<double> theta0 = problem.theta0;
    for (double& v : theta0) v *= scale;
    problem = with_theta0(problem, std::move(theta0));
  }
  return problem;
}

ScheduleSpec parse_schedule(const json& sj, double L, std::size_t index) {
  const std::string context = "schedules[" + std::to_string(index) + "]";
  check_keys(sj, {"variant", "alpha", "a", "T"}, context);
  const std::string variant = get_as<std::string>(sj, "variant", context, "a string");
  const double alpha = get_as<double>(sj, "alpha", context, "a number");
  ScheduleSpec schedule;
  if (variant == "constant") {
    if (sj.contains("a") || sj.contains("T")) {
      throw ConfigError("constant schedule in " + context + " takes no 'a' or 'T'");
    }
    schedule = constant_schedule(alpha);
  } else if (variant == "decay") {
    if (!sj.contains("a")) throw ConfigError(context + " (decay) requires 'a'");
    const Rational a = rational_from(sj.at("a"), context);
    const long long T =
        sj.contains("T") ? get_as<long long>(sj, "T", context, "an integer") : 1;
    schedule = decay_schedule(alpha, a, T);
  } else {
    throw ConfigError(context + ".variant must be 'constant' or 'decay'");
  }
  try {
    validate_schedule(schedule, L);
  } catch (const ScheduleViolation& v) {
    throw ConfigError(context + ": alpha = " + detail::fmt(alpha) +
                      " violates the 2/L cap (2/L = " + detail::fmt(v.cap) + ")");
  }
  return schedule;
}

std::vector<ScheduleSpec> default_schedules(double L) {
  const double alpha = 1.0 / L;
  return {
      constant_schedule(alpha),
      decay_schedule(alpha, Rational::of(1, 4), 10),
      decay_schedule(alpha, Rational::of(1, 2), 10),
      decay_schedule(alpha, Rational::of(3, 4), 10),
  };
}

std::vector<int> default_batch_grid() {
  std::vector<int> grid;
  for (int e = 0; e <= 10; ++e) grid.push_back(1 << e);
  return grid;
}

FullConfig parse_config_json(const json& root) {
  check_keys(root,
             {"seed", "jobs", "epsilon", "oracle", "problem", "schedules", "sweep", "validate",
              "theory"},
             "config");
  FullConfig config;
  if (root.contains("seed")) {
    config.master_seed = get_as<std::uint64_t>(root, "seed", "config", "an integer");
  }
  if (root.contains("jobs")) config.jobs = get_as<int>(root, "jobs", "config", "an integer");
  if (root.contains("epsilon")) {
    config.epsilon = get_as<double>(root, "epsilon", "config", "a number");
    if (!(config.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  }
  if (root.contains("oracle")) {
    const std::string mode = get_as<std::string>(root, "oracle", "config", "a string");
    if (mode == "finite-sum") {
      config.mode = OracleMode::FiniteSum;
    } else if (mode == "additive-noise") {
      config.mode = OracleMode::AdditiveNoise;
    } else {
      throw ConfigError("oracle must be 'finite-sum' or 'additive-noise'");
    }
  }
  if (!root.contains("problem")) throw ConfigError("config requires a 'problem' section");
  config.problem = parse_problem(root.at("problem"));

  if (root.contains("schedules")) {
    const json& list = root.at("schedules");
    if (!list.is_array() || list.empty()) {
      throw ConfigError("schedules must be a nonempty array");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      config.schedules.push_back(parse_schedule(list[i], config.problem.L, i));
    }
  } else {
    config.schedules = default_schedules(config.problem.L);
  }

  config.sweep.batch_grid = default_batch_grid();
  if (root.contains("sweep")) {
    const json& sj = root.at("sweep");
    check_keys(sj, {"batch_grid", "seeds_per_cell", "k_max"}, "sweep");
    if (sj.contains("batch_grid")) {
      config.sweep.batch_grid =
          get_as<std::vector<int>>(sj, "batch_grid", "sweep", "an array of integers");
    }
    if (sj.contains("seeds_per_cell")) {
      config.sweep.seeds_per_cell = get_as<int>(sj, "seeds_per_cell", "sweep", "an integer");
    }
    if (sj.contains("k_max")) {
      config.sweep.k_max = get_as<long long>(sj, "k_max", "sweep", "an integer");
    }
  }
  if (root.contains("validate")) {
    const json& vj = root.at("validate");
    check_keys(vj, {"iterations", "batches", "seeds"}, "validate");
    if (vj.contains("iterations")) {
      config.validate.iterations =
          get_as<std::vector<long long>>(vj, "iterations", "validate", "an array of integers");
    }
    if (vj.contains("batches")) {
      config.validate.batches =
          get_as<std::vector<int>>(vj, "batches", "validate", "an array of integers");
    }
    if (vj.contains("seeds")) {
      config.validate.seeds = get_as<int>(vj, "seeds", "validate", "an integer");
    }
  }
  if (root.contains("theory")) {
    const json& tj = root.at("theory");
    check_keys(tj, {"b_grid_points", "b_grid_span", "epsilon_grid"}, "theory");
    if (tj.contains("b_grid_points")) {
      config.theory.b_grid_points = get_as<int>(tj, "b_grid_points", "theory", "an integer");
    }
    if (tj.contains("b_grid_span")) {
      config.theory.b_grid_span = get_as<double>(tj, "b_grid_span", "theory", "a number");
    }
    if (tj.contains("epsilon_grid")) {
      config.theory.epsilon_grid =
          get_as<std::vector<double>>(tj, "epsilon_grid", "theory", "an array of numbers");
    }
  }
  return config;
}

}  // namespace

FullConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");
  return parse_config_json(root);
}

FullConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path, path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_echo(const FullConfig& config) {
  using detail::fmt;
  std::string out;
  out += "problem: " + problem_record_json(config.problem) + "\n";
  out += "derived: L = " + fmt(config.problem.L) + ", sigma2 = " + fmt(config.problem.sigma2) +
         ", delta0 = " + fmt(config.problem.delta0) +
         ", 2/L cap = " + fmt(2.0 / config.problem.L) + "\n";
  out += "epsilon: " + fmt(config.epsilon) + "\n";
  for (const ScheduleSpec& s : config.schedules) {
    const TheoryConstants c = theory_constants(config.problem, s);
    out += "schedule " + s.name() + ": alpha = " + fmt(s.alpha);
    if (s.variant == ScheduleVariant::Decay) {
      out += ", a = " + fmt(s.a.num) + "/" + fmt(s.a.den) + ", T = " + fmt(s.T);
    }
    out += "; C1 = " + fmt(c.C1) + ", C2 = " + fmt(c.C2) + ", D1 = " + fmt(c.D1) +
           ", D2 = " + fmt(c.D2);
    out += ", pole(eps) = " + fmt(batch_domain_pole(c, s, config.epsilon)) + "\n";
  }
  return out;
}

}  // namespace critbatch

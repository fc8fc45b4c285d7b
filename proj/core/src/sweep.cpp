#include "critbatch/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "critbatch/errors.hpp"
#include "internal_format.hpp"

namespace critbatch {

namespace {

using detail::fmt;

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string schedule_json(const ScheduleSpec& s) {
  std::string out = "{\"variant\":\"";
  out += s.variant == ScheduleVariant::Constant ? "constant" : "decay";
  out += "\",\"alpha\":" + fmt(s.alpha);
  if (s.variant == ScheduleVariant::Decay) {
    out += ",\"a\":\"" + fmt(s.a.num) + "/" + fmt(s.a.den) + "\"";
    out += ",\"T\":" + fmt(s.T);
  }
  out += '}';
  return out;
}

std::string rational_text(const Rational& r) { return fmt(r.num) + "/" + fmt(r.den); }

std::string mode_name(OracleMode mode) {
  return mode == OracleMode::FiniteSum ? "finite-sum" : "additive-noise";
}

OracleMode mode_from_name(const std::string& name) {
  if (name == "finite-sum") return OracleMode::FiniteSum;
  if (name == "additive-noise") return OracleMode::AdditiveNoise;
  throw Error("unknown oracle mode '" + name + "'");
}

std::string flavor_name(CriticalBatchFlavor f) {
  switch (f) {
    case CriticalBatchFlavor::StationaryPoint: return "stationary-point";
    case CriticalBatchFlavor::BoundaryApproximation: return "boundary-approximation";
    case CriticalBatchFlavor::None: return "none";
  }
  return "none";
}

CriticalBatchFlavor flavor_from_name(const std::string& name) {
  if (name == "stationary-point") return CriticalBatchFlavor::StationaryPoint;
  if (name == "boundary-approximation") return CriticalBatchFlavor::BoundaryApproximation;
  if (name == "none") return CriticalBatchFlavor::None;
  throw Error("unknown critical-batch flavor '" + name + "'");
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error("cannot parse number '" + text + "'");
  }
  return v;
}

long long parse_ll(const std::string& text) {
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error("cannot parse integer '" + text + "'");
  }
  return v;
}

ScheduleSpec schedule_from_row(const std::string& name, const std::string& variant_a,
                               const std::string& T, const std::string& alpha) {
  if (name == "constant") return constant_schedule(parse_double(alpha));
  return decay_schedule(parse_double(alpha), parse_rational(variant_a), parse_ll(T));
}

struct TrialStats {
  // per-seed first crossings of epsilon (for the dispersion column)
  std::vector<long long> crossings;
  int reached = 0;
};

std::optional<double> crossing_std_error(const std::vector<long long>& crossings) {
  if (crossings.size() < 2) return std::nullopt;
  long double mean = 0.0L;
  for (const long long k : crossings) mean += static_cast<long double>(k);
  mean /= static_cast<long double>(crossings.size());
  long double var = 0.0L;
  for (const long long k : crossings) {
    const long double d = static_cast<long double>(k) - mean;
    var += d * d;
  }
  var /= static_cast<long double>(crossings.size() - 1);
  return static_cast<double>(
      std::sqrt(static_cast<double>(var / static_cast<long double>(crossings.size()))));
}

}  // namespace

void parallel_for(int jobs, std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

SweepResult run_sweep(const SweepConfig& config) {
  if (config.schedules.empty()) throw Error("sweep: no schedules");
  if (config.batch_grid.empty()) throw Error("sweep: empty batch grid");
  for (std::size_t i = 0; i + 1 < config.batch_grid.size(); ++i) {
    if (!(config.batch_grid[i] < config.batch_grid[i + 1])) {
      throw Error("sweep: batch grid must be strictly increasing");
    }
  }
  for (const int b : config.batch_grid) {
    if (b < 1) throw Error("sweep: batch sizes must be >= 1");
    if (config.mode == OracleMode::FiniteSum && b > config.problem.n) {
      throw Error("sweep: batch size " + std::to_string(b) +
                  " exceeds n in finite-sum mode");
    }
  }
  if (config.seeds_per_cell < 1) throw Error("sweep: seeds_per_cell must be >= 1");
  if (!(config.epsilon > 0.0)) throw Error("sweep: epsilon must be positive");
  for (const ScheduleSpec& s : config.schedules) validate_schedule(s, config.problem.L);

  SweepResult result;
  result.master_seed = config.master_seed;
  result.seeds_per_cell = config.seeds_per_cell;
  result.k_max = config.k_max;
  result.epsilon = config.epsilon;
  result.mode = config.mode;
  result.problem_record = problem_record_json(config.problem);

  {
    std::string canonical = result.problem_record + "|" + mode_name(config.mode) + "|";
    for (const ScheduleSpec& s : config.schedules) canonical += schedule_json(s) + ",";
    canonical += "|grid:";
    for (const int b : config.batch_grid) canonical += fmt(b) + ",";
    canonical += "|eps:" + fmt(config.epsilon) + "|S:" + fmt(config.seeds_per_cell) +
                 "|kmax:" + fmt(config.k_max) + "|seed:" + fmt(config.master_seed);
    result.config_hash = fnv1a(canonical);
  }

  for (const ScheduleSpec& s : config.schedules) {
    const TheoryConstants c = theory_constants(config.problem, s);
    result.theory.push_back(ScheduleTheory{s, critical_batch(c, s, config.epsilon)});
  }

  const std::size_t n_cells = config.schedules.size() * config.batch_grid.size();
  result.cells.assign(n_cells, SweepCell{});

  parallel_for(config.jobs, n_cells, [&](std::size_t cell_idx) {
    const int si = static_cast<int>(cell_idx / config.batch_grid.size());
    const int bi = static_cast<int>(cell_idx % config.batch_grid.size());
    const ScheduleSpec& schedule = config.schedules[si];
    const int b = config.batch_grid[bi];

    CurveAccumulator acc(static_cast<std::size_t>(config.k_max));
    TrialStats stats;
    int divergences = 0;
    for (int t = 0; t < config.seeds_per_cell; ++t) {
      const RunRecord rec = run_sgd(config.problem, config.mode, schedule, b, config.k_max,
                                    config.master_seed, static_cast<std::uint64_t>(t));
      if (rec.diverged) {
        ++divergences;
      } else if (const auto k = iterations_to_epsilon(rec, config.epsilon)) {
        stats.crossings.push_back(*k);
      }
      acc.add(rec);
    }

    SweepCell cell;
    cell.schedule_index = si;
    cell.schedule = schedule;
    cell.b = b;
    cell.seeds = config.seeds_per_cell;
    cell.divergences = divergences;
    if (divergences < config.seeds_per_cell) {
      const AggregateCurve curve = acc.finish();
      if (const auto k = iterations_to_epsilon(curve, config.epsilon)) {
        cell.K = *k;
        cell.N = *k * static_cast<long long>(b);
      }
    }
    cell.se_K = crossing_std_error(stats.crossings);

    const TheoryConstants c = theory_constants(config.problem, schedule);
    try {
      cell.K_theory = iterations_needed(c, schedule, config.epsilon, static_cast<double>(b));
      cell.N_theory = *cell.K_theory * static_cast<double>(b);
    } catch (const TheoryDomainError&) {
      // b below the pole; no overlay for this cell
    }
    result.cells[cell_idx] = std::move(cell);
  });

  const bool any_reached =
      std::any_of(result.cells.begin(), result.cells.end(),
                  [](const SweepCell& c) { return c.K.has_value(); });
  if (!any_reached) {
    result.guidance =
        "no cell reached epsilon within k_max; raise k_max or loosen epsilon";
  }
  return result;
}

int empirical_critical_batch(const SweepResult& result, int schedule_index) {
  const SweepCell* best = nullptr;
  for (const SweepCell& cell : result.cells) {
    if (cell.schedule_index != schedule_index || !cell.N.has_value()) continue;
    if (best == nullptr || *cell.N < *best->N) best = &cell;
  }
  if (best == nullptr) {
    throw Error("empirical_critical_batch: no cell reached epsilon for schedule " +
                std::to_string(schedule_index));
  }
  return best->b;
}

namespace {

AggregateCurve collect_curve(const ProblemSpec& problem, OracleMode mode,
                             const ScheduleSpec& schedule, int b, long long K, int S,
                             std::uint64_t master_seed, int jobs,
                             std::vector<RunRecord>* keep = nullptr) {
  std::vector<RunRecord> records(S);
  parallel_for(jobs, static_cast<std::size_t>(S), [&](std::size_t t) {
    records[t] =
        run_sgd(problem, mode, schedule, b, K, master_seed, static_cast<std::uint64_t>(t));
  });
  CurveAccumulator acc(static_cast<std::size_t>(K));
  for (const RunRecord& r : records) acc.add(r);
  AggregateCurve curve = acc.finish();
  if (keep != nullptr) *keep = std::move(records);
  return curve;
}

}  // namespace

BoundReport validate_bound(const ProblemSpec& problem, OracleMode mode,
                           const ScheduleSpec& schedule, int b, long long K, int S,
                           std::uint64_t master_seed, int jobs) {
  if (S < 1) throw Error("validate_bound: S must be >= 1");
  BoundReport report;
  report.K = K;
  report.b = b;
  const TheoryConstants c = theory_constants(problem, schedule);
  report.bound = gradient_bound(c, schedule, static_cast<double>(K), static_cast<double>(b));

  const AggregateCurve curve = collect_curve(problem, mode, schedule, b, K, S, master_seed, jobs);
  report.divergences = curve.divergences;
  report.valid = curve.divergences * 2 <= S;

  std::size_t argmin = 0;
  for (std::size_t k = 1; k < curve.mean.size(); ++k) {
    if (curve.mean[k] < curve.mean[argmin]) argmin = k;
  }
  report.empirical = curve.running_min.back();
  report.std_error = curve.std_error[argmin];
  report.pass = report.valid && report.empirical <= report.bound + 3.0 * report.std_error;
  return report;
}

Lemma1Report validate_lemma1(const ProblemSpec& problem, OracleMode mode,
                             const ScheduleSpec& schedule, int b, long long K, int S,
                             std::uint64_t master_seed, int jobs) {
  if (S < 1) throw Error("validate_lemma1: S must be >= 1");
  Lemma1Report report;
  report.K = K;
  report.b = b;

  std::vector<RunRecord> records;
  collect_curve(problem, mode, schedule, b, K, S, master_seed, jobs, &records);

  std::vector<long double> per_trial;
  per_trial.reserve(records.size());
  int divergences = 0;
  for (const RunRecord& rec : records) {
    if (rec.diverged) {
      ++divergences;
      continue;
    }
    long double lhs = 0.0L;
    for (long long k = 0; k < K; ++k) {
      const double a_k = rec.alpha[k];
      lhs += static_cast<long double>(a_k) * (1.0L - problem.L * a_k / 2.0L) *
             rec.grad_norm_sq[k];
    }
    per_trial.push_back(lhs);
  }
  report.divergences = divergences;
  report.valid = divergences * 2 <= S;
  if (per_trial.empty()) {
    report.valid = false;
    report.pass = false;
    return report;
  }

  long double mean = 0.0L;
  for (const long double v : per_trial) mean += v;
  mean /= static_cast<long double>(per_trial.size());
  long double var = 0.0L;
  for (const long double v : per_trial) var += (v - mean) * (v - mean);
  if (per_trial.size() > 1) {
    var /= static_cast<long double>(per_trial.size() - 1);
    report.std_error = static_cast<double>(
        std::sqrt(static_cast<double>(var / static_cast<long double>(per_trial.size()))));
  }
  report.lhs = static_cast<double>(mean);
  report.rhs = problem.delta0 +
               problem.L * problem.sigma2 / (2.0 * b) * sum_squared_rates(schedule, K);
  report.pass = report.valid && report.lhs <= report.rhs + 3.0 * report.std_error;
  return report;
}

std::string export_csv(const SweepResult& result) {
  std::string out =
      "schedule,variant_a,T,alpha,b,epsilon,seeds,K_measured,N_measured,K_theory,N_theory,"
      "divergences,se_K\n";
  for (const SweepCell& cell : result.cells) {
    out += cell.schedule.name();
    out += ',';
    if (cell.schedule.variant == ScheduleVariant::Decay) out += rational_text(cell.schedule.a);
    out += ',';
    if (cell.schedule.variant == ScheduleVariant::Decay) out += fmt(cell.schedule.T);
    out += ',';
    out += fmt(cell.schedule.alpha);
    out += ',' + fmt(cell.b);
    out += ',' + fmt(result.epsilon);
    out += ',' + fmt(cell.seeds);
    out += ',';
    if (cell.K) out += fmt(*cell.K);
    out += ',';
    if (cell.N) out += fmt(*cell.N);
    out += ',';
    if (cell.K_theory) out += fmt(*cell.K_theory);
    out += ',';
    if (cell.N_theory) out += fmt(*cell.N_theory);
    out += ',' + fmt(cell.divergences);
    out += ',';
    if (cell.se_K) out += fmt(*cell.se_K);
    out += '\n';
  }
  return out;
}

std::string export_json(const SweepResult& result) {
  std::string out = "{\"config_hash\":" + fmt(result.config_hash);
  out += ",\"master_seed\":" + fmt(result.master_seed);
  out += ",\"seeds_per_cell\":" + fmt(result.seeds_per_cell);
  out += ",\"k_max\":" + fmt(result.k_max);
  out += ",\"epsilon\":" + fmt(result.epsilon);
  out += ",\"oracle\":\"" + mode_name(result.mode) + "\"";
  out += ",\"problem\":" + result.problem_record;
  out += ",\"theory\":[";
  for (std::size_t i = 0; i < result.theory.size(); ++i) {
    if (i) out += ',';
    const ScheduleTheory& st = result.theory[i];
    out += "{\"schedule\":" + schedule_json(st.schedule);
    out += ",\"b_star\":" + fmt(st.b_star.b_star);
    out += ",\"flavor\":\"" + flavor_name(st.b_star.flavor) + "\"}";
  }
  out += "],\"cells\":[";
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    if (i) out += ',';
    const SweepCell& cell = result.cells[i];
    out += "{\"schedule_index\":" + fmt(cell.schedule_index);
    out += ",\"schedule\":" + schedule_json(cell.schedule);
    out += ",\"b\":" + fmt(cell.b);
    out += ",\"seeds\":" + fmt(cell.seeds);
    out += ",\"K_measured\":" + (cell.K ? fmt(*cell.K) : std::string("null"));
    out += ",\"N_measured\":" + (cell.N ? fmt(*cell.N) : std::string("null"));
    out += ",\"K_theory\":" + (cell.K_theory ? fmt(*cell.K_theory) : std::string("null"));
    out += ",\"N_theory\":" + (cell.N_theory ? fmt(*cell.N_theory) : std::string("null"));
    out += ",\"divergences\":" + fmt(cell.divergences);
    out += ",\"se_K\":" + (cell.se_K ? fmt(*cell.se_K) : std::string("null"));
    out += '}';
  }
  out += ']';
  if (!result.guidance.empty()) out += ",\"guidance\":\"" + result.guidance + "\"";
  out += "}\n";
  return out;
}

void export_results(const SweepResult& result, const std::string& path,
                    const std::string& format) {
  std::string body;
  if (format == "csv") {
    body = export_csv(result);
  } else if (format == "json") {
    body = export_json(result);
  } else {
    throw Error("unknown export format '" + format + "' (expected csv or json)");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path, path);
  out << body;
  out.flush();
  if (!out) throw IoError("failed while writing: " + path, path);
}

SweepResult import_json(const std::string& text) {
  const nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
  SweepResult result;
  result.config_hash = j.at("config_hash").get<std::uint64_t>();
  result.master_seed = j.at("master_seed").get<std::uint64_t>();
  result.seeds_per_cell = j.at("seeds_per_cell").get<int>();
  result.k_max = j.at("k_max").get<long long>();
  result.epsilon = j.at("epsilon").get<double>();
  result.mode = mode_from_name(j.at("oracle").get<std::string>());
  result.problem_record = j.at("problem").dump();
  for (const auto& st : j.at("theory")) {
    ScheduleTheory theory;
    const auto& sj = st.at("schedule");
    if (sj.at("variant").get<std::string>() == "constant") {
      theory.schedule = constant_schedule(sj.at("alpha").get<double>());
    } else {
      theory.schedule = decay_schedule(sj.at("alpha").get<double>(),
                                       parse_rational(sj.at("a").get<std::string>()),
                                       sj.at("T").get<long long>());
    }
    theory.b_star.b_star = st.at("b_star").get<double>();
    theory.b_star.flavor = flavor_from_name(st.at("flavor").get<std::string>());
    result.theory.push_back(theory);
  }
  for (const auto& cj : j.at("cells")) {
    SweepCell cell;
    cell.schedule_index = cj.at("schedule_index").get<int>();
    const auto& sj = cj.at("schedule");
    if (sj.at("variant").get<std::string>() == "constant") {
      cell.schedule = constant_schedule(sj.at("alpha").get<double>());
    } else {
      cell.schedule = decay_schedule(sj.at("alpha").get<double>(),
                                     parse_rational(sj.at("a").get<std::string>()),
                                     sj.at("T").get<long long>());
    }
    cell.b = cj.at("b").get<int>();
    cell.seeds = cj.at("seeds").get<int>();
    if (!cj.at("K_measured").is_null()) cell.K = cj.at("K_measured").get<long long>();
    if (!cj.at("N_measured").is_null()) cell.N = cj.at("N_measured").get<long long>();
    if (!cj.at("K_theory").is_null()) cell.K_theory = cj.at("K_theory").get<double>();
    if (!cj.at("N_theory").is_null()) cell.N_theory = cj.at("N_theory").get<double>();
    cell.divergences = cj.at("divergences").get<int>();
    if (!cj.at("se_K").is_null()) cell.se_K = cj.at("se_K").get<double>();
    result.cells.push_back(cell);
  }
  if (j.contains("guidance")) result.guidance = j.at("guidance").get<std::string>();
  return result;
}

SweepResult import_csv(const std::string& text) {
  SweepResult result;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("import_csv: empty input");
  int index = 0;
  std::vector<ScheduleSpec> seen;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream row(line);
    while (std::getline(row, field, ',')) fields.push_back(field);
    while (fields.size() < 13) fields.emplace_back();
    SweepCell cell;
    cell.schedule = schedule_from_row(fields[0], fields[1], fields[2], fields[3]);
    cell.b = static_cast<int>(parse_ll(fields[4]));
    result.epsilon = parse_double(fields[5]);
    cell.seeds = static_cast<int>(parse_ll(fields[6]));
    if (!fields[7].empty()) cell.K = parse_ll(fields[7]);
    if (!fields[8].empty()) cell.N = parse_ll(fields[8]);
    if (!fields[9].empty()) cell.K_theory = parse_double(fields[9]);
    if (!fields[10].empty()) cell.N_theory = parse_double(fields[10]);
    cell.divergences = static_cast<int>(parse_ll(fields[11]));
    if (!fields[12].empty()) cell.se_K = parse_double(fields[12]);
    const auto it = std::find(seen.begin(), seen.end(), cell.schedule);
    if (it == seen.end()) {
      seen.push_back(cell.schedule);
      cell.schedule_index = index++;
    } else {
      cell.schedule_index = static_cast<int>(it - seen.begin());
    }
    result.cells.push_back(cell);
  }
  result.seeds_per_cell = result.cells.empty() ? 0 : result.cells.front().seeds;
  return result;
}

}  // namespace critbatch

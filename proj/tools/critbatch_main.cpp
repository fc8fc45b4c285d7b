// critbatch: closed-form batch-size complexity curves for mini-batch SGD,
// seeded Monte-Carlo sweeps, bound validation suites and critical-batch
// estimation. See README.md for the config schema and output formats.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "critbatch/config.hpp"
#include "critbatch/engine.hpp"
#include "critbatch/errors.hpp"
#include "critbatch/estimator.hpp"
#include "critbatch/sweep.hpp"
#include "critbatch/theory.hpp"

namespace {

using namespace critbatch;

std::string fmt(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(long long v) { return std::to_string(v); }

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path, path);
  out << body;
  out.flush();
  if (!out) throw IoError("failed while writing: " + path, path);
}

std::string schedule_columns(const ScheduleSpec& s) {
  std::string out = s.name() + ",";
  if (s.variant == ScheduleVariant::Decay) {
    out += fmt(s.a.num) + "/" + fmt(s.a.den);
  }
  out += ",";
  if (s.variant == ScheduleVariant::Decay) out += fmt(s.T);
  out += "," + fmt(s.alpha);
  return out;
}

std::string schedule_json_fields(const ScheduleSpec& s) {
  std::string out = "\"schedule\":\"" + s.name() + "\",\"alpha\":" + fmt(s.alpha);
  if (s.variant == ScheduleVariant::Decay) {
    out += ",\"a\":\"" + fmt(s.a.num) + "/" + fmt(s.a.den) + "\",\"T\":" + fmt(s.T);
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> grid;
  grid.reserve(points);
  const double step = points > 1 ? std::log(hi / lo) / (points - 1) : 0.0;
  for (int i = 0; i < points; ++i) grid.push_back(lo * std::exp(step * i));
  return grid;
}

int cmd_theory(const FullConfig& config, const std::string& out_dir, const std::string& format) {
  std::filesystem::create_directories(out_dir);

  std::string curves_csv =
      "schedule,variant_a,T,alpha,epsilon,b,K,N,K1,K2,N1,N2\n";
  std::string summary_csv =
      "schedule,variant_a,T,alpha,epsilon,pole,b_star,flavor,b_sfo_min,K_at_sfo_min,"
      "N_at_sfo_min\n";
  std::string exponents_csv =
      "schedule,variant_a,T,alpha,K_slope,N_slope,K_slope_expected,N_slope_expected\n";
  std::string curves_json = "[", summary_json = "[", exponents_json = "[";
  bool any_domain = false;
  std::string pole_note;

  for (std::size_t si = 0; si < config.schedules.size(); ++si) {
    const ScheduleSpec& s = config.schedules[si];
    const TheoryConstants c = theory_constants(config.problem, s);
    const double eps = config.epsilon;
    const CriticalBatch crit = critical_batch(c, s, eps);
    const double pole = batch_domain_pole(c, s, eps);

    // audit trail: every table value is reproducible from these constants
    std::cout << "theory[" << s.name() << "]: C1 = " << fmt(c.C1) << ", C2 = " << fmt(c.C2)
              << ", D1 = " << fmt(c.D1) << ", D2 = " << fmt(c.D2) << ", pole = " << fmt(pole)
              << "\n";

    std::vector<double> grid;
    const double span = config.theory.b_grid_span;
    const bool decay2 =
        s.variant == ScheduleVariant::Decay && s.regime() == DecayRegime::Decay2;
    if (decay2 && !(c.D1 > eps * eps)) {
      pole_note = "decay2 domain is empty: D1 = " + fmt(c.D1) +
                  " must exceed eps^2 = " + fmt(eps * eps) + " (pole at b = " + fmt(pole) + ")";
    } else if (c.sigma2 == 0.0) {
      grid = log_grid(1.0, 1024.0, config.theory.b_grid_points);
    } else if (pole > 0.0) {
      grid = log_grid(pole * 1.02, pole * span, config.theory.b_grid_points);
    } else {
      grid = log_grid(crit.b_star / span, crit.b_star * span, config.theory.b_grid_points);
    }

    bool first_row = true;
    for (const double b : grid) {
      const double K = iterations_needed(c, s, eps, b);
      const double N = K * b;
      const Derivatives kd = k_derivatives(c, s, eps, b);
      const Derivatives nd = n_derivatives(c, s, eps, b);
      curves_csv += schedule_columns(s) + "," + fmt(eps) + "," + fmt(b) + "," + fmt(K) + "," +
                    fmt(N) + "," + fmt(kd.first) + "," + fmt(kd.second) + "," + fmt(nd.first) +
                    "," + fmt(nd.second) + "\n";
      if (!(curves_json.size() == 1 && first_row)) curves_json += ",";
      first_row = false;
      curves_json += "{" + schedule_json_fields(s) + ",\"epsilon\":" + fmt(eps) +
                     ",\"b\":" + fmt(b) + ",\"K\":" + fmt(K) + ",\"N\":" + fmt(N) +
                     ",\"K1\":" + fmt(kd.first) + ",\"K2\":" + fmt(kd.second) +
                     ",\"N1\":" + fmt(nd.first) + ",\"N2\":" + fmt(nd.second) + "}";
      any_domain = true;
    }

    summary_csv += schedule_columns(s) + "," + fmt(eps) + "," + fmt(pole) + ",";
    std::string b_star_txt, flavor_txt = "none", b_min_txt, k_min_txt, n_min_txt;
    if (crit.flavor != CriticalBatchFlavor::None && !grid.empty()) {
      b_star_txt = fmt(crit.b_star);
      flavor_txt = crit.flavor == CriticalBatchFlavor::StationaryPoint
                       ? "stationary-point"
                       : "boundary-approximation";
      const double b_min = decay2 ? decay2_stationary_batch(c, eps) : crit.b_star;
      const double k_min = iterations_needed(c, s, eps, b_min);
      b_min_txt = fmt(b_min);
      k_min_txt = fmt(k_min);
      n_min_txt = fmt(k_min * b_min);
    }
    summary_csv += b_star_txt + "," + flavor_txt + "," + b_min_txt + "," + k_min_txt + "," +
                   n_min_txt + "\n";
    if (si) summary_json += ",";
    summary_json += "{" + schedule_json_fields(s) + ",\"epsilon\":" + fmt(eps) +
                    ",\"pole\":" + fmt(pole) +
                    ",\"b_star\":" + (b_star_txt.empty() ? "null" : b_star_txt) +
                    ",\"flavor\":\"" + flavor_txt + "\"" +
                    ",\"b_sfo_min\":" + (b_min_txt.empty() ? "null" : b_min_txt) + "}";

    if (c.sigma2 > 0.0) {
      const ExponentFit fit = complexity_exponents(c, s, config.theory.epsilon_grid);
      exponents_csv += schedule_columns(s) + "," + fmt(fit.k_slope) + "," + fmt(fit.n_slope) +
                       "," + fmt(expected_k_slope(s)) + "," + fmt(expected_n_slope(s)) + "\n";
      if (exponents_json.size() > 1) exponents_json += ",";
      exponents_json += "{" + schedule_json_fields(s) + ",\"K_slope\":" + fmt(fit.k_slope) +
                        ",\"N_slope\":" + fmt(fit.n_slope) +
                        ",\"K_slope_expected\":" + fmt(expected_k_slope(s)) +
                        ",\"N_slope_expected\":" + fmt(expected_n_slope(s)) + "}";
    }
  }
  curves_json += "]\n";
  summary_json += "]\n";
  exponents_json += "]\n";

  if (!any_domain) {
    std::cerr << "error: no schedule has a nonempty b-domain at epsilon = "
              << fmt(config.epsilon) << (pole_note.empty() ? "" : "; " + pole_note) << "\n";
    return 1;
  }
  if (!pole_note.empty()) std::cerr << "warning: " << pole_note << "\n";

  const std::filesystem::path dir(out_dir);
  if (format == "json") {
    write_file((dir / "theory_curves.json").string(), curves_json);
    write_file((dir / "theory_summary.json").string(), summary_json);
    write_file((dir / "theory_exponents.json").string(), exponents_json);
  } else {
    write_file((dir / "theory_curves.csv").string(), curves_csv);
    write_file((dir / "theory_summary.csv").string(), summary_csv);
    write_file((dir / "theory_exponents.csv").string(), exponents_csv);
  }
  std::cout << "theory tables written to " << out_dir << "\n";
  return 0;
}

int cmd_sweep(const FullConfig& config, const std::string& out_path, const std::string& format) {
  SweepConfig sc;
  sc.problem = config.problem;
  sc.mode = config.mode;
  sc.schedules = config.schedules;
  sc.batch_grid = config.sweep.batch_grid;
  sc.epsilon = config.epsilon;
  sc.seeds_per_cell = config.sweep.seeds_per_cell;
  sc.k_max = config.sweep.k_max;
  sc.jobs = config.jobs;
  sc.master_seed = config.master_seed;
  const SweepResult result = run_sweep(sc);
  export_results(result, out_path, format);
  if (!result.guidance.empty()) std::cout << "note: " << result.guidance << "\n";
  std::cout << "sweep results written to " << out_path << "\n";
  return 0;
}

int cmd_validate(const FullConfig& config, const std::string& out_path,
                 const std::string& format) {
  std::string csv =
      "check,schedule,variant_a,T,alpha,b,K,seeds,empirical_or_lhs,bound_or_rhs,std_error,"
      "divergences,pass\n";
  std::string json = "[";
  bool all_pass = true;
  bool first = true;
  for (const ScheduleSpec& s : config.schedules) {
    for (const long long K : config.validate.iterations) {
      for (const int b : config.validate.batches) {
        const BoundReport br = validate_bound(config.problem, config.mode, s, b, K,
                                              config.validate.seeds, config.master_seed,
                                              config.jobs);
        const Lemma1Report lr = validate_lemma1(config.problem, config.mode, s, b, K,
                                                config.validate.seeds, config.master_seed,
                                                config.jobs);
        all_pass = all_pass && br.pass && lr.pass;
        csv += "bound," + schedule_columns(s) + "," + fmt(static_cast<long long>(b)) + "," +
               fmt(K) + "," + fmt(static_cast<long long>(config.validate.seeds)) + "," +
               fmt(br.empirical) + "," + fmt(br.bound) + "," + fmt(br.std_error) + "," +
               fmt(static_cast<long long>(br.divergences)) + "," + (br.pass ? "1" : "0") + "\n";
        csv += "lemma1," + schedule_columns(s) + "," + fmt(static_cast<long long>(b)) + "," +
               fmt(K) + "," + fmt(static_cast<long long>(config.validate.seeds)) + "," +
               fmt(lr.lhs) + "," + fmt(lr.rhs) + "," + fmt(lr.std_error) + "," +
               fmt(static_cast<long long>(lr.divergences)) + "," + (lr.pass ? "1" : "0") + "\n";
        for (int which = 0; which < 2; ++which) {
          if (!first) json += ",";
          first = false;
          const bool bound_row = which == 0;
          json += std::string("{\"check\":\"") + (bound_row ? "bound" : "lemma1") + "\"," +
                  schedule_json_fields(s) + ",\"b\":" + fmt(static_cast<long long>(b)) +
                  ",\"K\":" + fmt(K) +
                  ",\"seeds\":" + fmt(static_cast<long long>(config.validate.seeds)) +
                  (bound_row
                       ? ",\"empirical\":" + fmt(br.empirical) + ",\"bound\":" + fmt(br.bound) +
                             ",\"std_error\":" + fmt(br.std_error) + ",\"pass\":" +
                             (br.pass ? "true" : "false")
                       : ",\"lhs\":" + fmt(lr.lhs) + ",\"rhs\":" + fmt(lr.rhs) +
                             ",\"std_error\":" + fmt(lr.std_error) + ",\"pass\":" +
                             (lr.pass ? "true" : "false")) +
                  "}";
        }
        std::cout << "validate " << s.name() << " K=" << K << " b=" << b
                  << " bound: " << (br.pass ? "pass" : "FAIL")
                  << " lemma1: " << (lr.pass ? "pass" : "FAIL") << "\n";
      }
    }
  }
  json += "]\n";
  if (!out_path.empty()) {
    write_file(out_path, format == "json" ? json : csv);
    std::cout << "validation report written to " << out_path << "\n";
  }
  return all_pass ? 0 : 2;
}

int cmd_estimate(const std::string& source_a, const std::vector<double>& source_bstars,
                 const std::string& target_a, const std::string& out_path) {
  const Rational a_src = parse_rational(source_a);
  const Rational a_tgt = parse_rational(target_a);
  const auto regime_of = [](const Rational& a) {
    if (2 * a.num < a.den) return DecayRegime::Decay1;
    if (2 * a.num > a.den) return DecayRegime::Decay3;
    return DecayRegime::Decay2;
  };
  std::string csv =
      "source_a,source_bstar,ratio,target_a,predicted_bstar,pow2_lower,pow2_upper\n";
  for (const double b : source_bstars) {
    const RatioEstimate est = infer_ratio(a_src, regime_of(a_src), b);
    const BstarPrediction pred = predict_bstar(est, a_tgt, regime_of(a_tgt));
    std::cout << "D2/D1 = " << fmt(est.ratio) << "  predicted b* = " << fmt(pred.b_star)
              << " in [2^" << pred.pow2_lower << ", 2^" << pred.pow2_upper << "]\n";
    csv += source_a + "," + fmt(b) + "," + fmt(est.ratio) + "," + target_a + "," +
           fmt(pred.b_star) + "," + fmt(static_cast<long long>(pred.pow2_lower)) + "," +
           fmt(static_cast<long long>(pred.pow2_upper)) + "\n";
  }
  if (!out_path.empty()) write_file(out_path, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch-size complexity curves, sweeps and validation for mini-batch SGD"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv";
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  int jobs_override = -1;

  const auto add_common = [&](CLI::App* sub, bool out_required) {
    sub->add_option("--config", config_path, "config file (JSON)")->required();
    auto* out = sub->add_option("--out", out_path, "output path");
    if (out_required) out->required();
    sub->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", seed_override, "master seed override")
        ->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--jobs", jobs_override, "worker threads (0 = hardware)");
  };

  auto* theory_cmd = app.add_subcommand("theory", "emit K(b), N(b), derivative and b* tables");
  add_common(theory_cmd, true);
  auto* sweep_cmd = app.add_subcommand("sweep", "run the seeded batch-size sweep");
  add_common(sweep_cmd, true);
  auto* validate_cmd =
      app.add_subcommand("validate", "run the bound and descent-inequality validation suite");
  add_common(validate_cmd, false);

  auto* estimate_cmd =
      app.add_subcommand("estimate", "infer D2/D1 from a measured b* and predict another");
  std::string source_a, target_a;
  std::vector<double> source_bstars;
  estimate_cmd->add_option("--source-a", source_a, "source decay exponent (rational, e.g. 1/4)")
      ->required();
  estimate_cmd->add_option("--source-bstar", source_bstars, "measured critical batch size(s)")
      ->required();
  estimate_cmd->add_option("--target-a", target_a, "target decay exponent (rational)")
      ->required();
  estimate_cmd->add_option("--out", out_path, "optional CSV output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (estimate_cmd->parsed()) {
      return cmd_estimate(source_a, source_bstars, target_a, out_path);
    }
    FullConfig config = parse_config(config_path);
    if (seed_given) config.master_seed = seed_override;
    if (jobs_override >= 0) config.jobs = jobs_override;
    std::cout << config_echo(config);
    if (theory_cmd->parsed()) return cmd_theory(config, out_path, format);
    if (sweep_cmd->parsed()) return cmd_sweep(config, out_path, format);
    if (validate_cmd->parsed()) return cmd_validate(config, out_path, format);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 1;
  } catch (const TheoryDomainError& e) {
    std::cerr << "domain error: " << e.what() << " (pole at b = " << fmt(e.pole) << ")\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

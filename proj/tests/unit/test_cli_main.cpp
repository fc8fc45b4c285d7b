// Exercises the installed CLI binary end to end: exit codes, file outputs and
// determinism of repeated invocations. Takes the binary path as argv[1].

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  if (!ok) {
    ++failures;
    std::cerr << "FAILED: " << what << "\n";
  }
}

int run(const std::string& command) { return std::system(command.c_str()); }

int exit_code(int status) {
#ifdef WEXITSTATUS
  return WEXITSTATUS(status);
#else
  return status;
#endif
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_tests <path-to-critbatch>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "critbatch_cli_tests";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::filesystem::path config = dir / "config.json";
  {
    std::ofstream out(config);
    out << R"({
      "seed": 5,
      "epsilon": 0.3,
      "problem": {"kind": "quadratic-sine", "seed": 2, "n": 12, "d": 4,
                  "spectrum": {"geometric": {"min": 0.25, "max": 1.0}}},
      "schedules": [{"variant": "constant", "alpha": 1.0},
                    {"variant": "decay", "alpha": 1.0, "a": "1/2", "T": 3}],
      "sweep": {"batch_grid": [1, 4, 16], "seeds_per_cell": 4, "k_max": 400},
      "validate": {"iterations": [50], "batches": [2], "seeds": 60}
    })";
  }
  const std::string quiet = " > /dev/null 2>&1";

  // estimate: prints the prediction, exit 0
  check(exit_code(run(cli + " estimate --source-a 1/4 --source-bstar 16 --target-a 3/4" +
                      quiet)) == 0,
        "estimate exits 0");

  // usage errors exit nonzero
  check(exit_code(run(cli + " frobnicate" + quiet)) != 0, "unknown subcommand rejected");
  check(exit_code(run(cli + " sweep --config " + dir.string() + "/missing.json --out " +
                      (dir / "x.csv").string() + quiet)) == 1,
        "missing config exits 1");

  // unwritable output path exits 1
  check(exit_code(run(cli + " sweep --config " + config.string() +
                      " --out /nonexistent-dir/out.csv" + quiet)) == 1,
        "unwritable output exits 1");

  // sweep writes byte-identical files across reruns and parallelism widths
  const auto out1 = dir / "sweep1.csv";
  const auto out2 = dir / "sweep2.csv";
  check(exit_code(run(cli + " sweep --config " + config.string() + " --out " + out1.string() +
                      " --jobs 1" + quiet)) == 0,
        "sweep exits 0");
  check(exit_code(run(cli + " sweep --config " + config.string() + " --out " + out2.string() +
                      " --jobs 4" + quiet)) == 0,
        "parallel sweep exits 0");
  check(!slurp(out1).empty() && slurp(out1) == slurp(out2),
        "sweep output is byte-identical at any parallelism width");

  // validate: green fixture exits 0 and writes a report
  const auto report = dir / "report.csv";
  check(exit_code(run(cli + " validate --config " + config.string() + " --out " +
                      report.string() + quiet)) == 0,
        "validate exits 0 on the exact-variance fixture");
  check(slurp(report).rfind("check,schedule", 0) == 0, "validation report has the schema header");

  // theory writes the three tables
  const auto theory_dir = dir / "theory";
  check(exit_code(run(cli + " theory --config " + config.string() + " --out " +
                      theory_dir.string() + quiet)) == 0,
        "theory exits 0");
  check(std::filesystem::exists(theory_dir / "theory_curves.csv") &&
            std::filesystem::exists(theory_dir / "theory_summary.csv") &&
            std::filesystem::exists(theory_dir / "theory_exponents.csv"),
        "theory tables exist");

  // exact table regeneration: sigma2 = 1, delta = 2, alpha = 1, eps = 1/4 give
  // C1 = 4, C2 = 1, so b* = 2 C2/eps^2 = 32, K(b*) = 2 C1/eps^2 = 128 and
  // N(b*) = 4 C1 C2 / eps^4 = 4096, all exact in binary
  const std::filesystem::path exact_config = dir / "exact.json";
  {
    std::ofstream out(exact_config);
    out << R"({
      "epsilon": 0.25,
      "problem": {"kind": "quadratic-sine", "d": 1, "spectrum": [1.0],
                  "centers": [-1.0, 1.0], "theta0": [2.0]},
      "schedules": [{"variant": "constant", "alpha": 1.0}]
    })";
  }
  const auto exact_dir = dir / "theory_exact";
  check(exit_code(run(cli + " theory --config " + exact_config.string() + " --out " +
                      exact_dir.string() + quiet)) == 0,
        "exact theory run exits 0");
  const std::string summary = slurp(exact_dir / "theory_summary.csv");
  check(summary.find("constant,,,1,0.25,16,32,stationary-point,32,128,4096") !=
            std::string::npos,
        "constant-rate summary row carries b* = 32, K = 128, N = 4096 exactly");
  const std::string exponents = slurp(exact_dir / "theory_exponents.csv");
  const auto row_start = exponents.find("constant,,,1,");
  check(row_start != std::string::npos, "exponents table has the constant row");
  if (row_start != std::string::npos) {
    std::istringstream row(exponents.substr(row_start + 13));
    std::string k_slope, n_slope;
    std::getline(row, k_slope, ',');
    std::getline(row, n_slope, ',');
    check(std::abs(std::stod(k_slope) - 2.0) < 1e-9 &&
              std::abs(std::stod(n_slope) - 4.0) < 1e-9,
          "constant-rate fitted slopes are (2, 4) within 1e-9");
  }

  // an empty b-domain is an error naming the pole: a = 1/2 needs D1 > eps^2
  const std::filesystem::path empty_config = dir / "empty_domain.json";
  {
    std::ofstream out(empty_config);
    out << R"({
      "epsilon": 10.0,
      "problem": {"kind": "quadratic-sine", "d": 1, "spectrum": [1.0],
                  "centers": [-1.0, 1.0], "theta0": [2.0]},
      "schedules": [{"variant": "decay", "alpha": 1.0, "a": "1/2", "T": 2}]
    })";
  }
  check(exit_code(run(cli + " theory --config " + empty_config.string() + " --out " +
                      (dir / "theory_empty").string() + quiet)) == 1,
        "empty b-domain exits 1");

  // --seed override changes outputs deterministically
  const auto out3 = dir / "sweep3.csv";
  check(exit_code(run(cli + " sweep --config " + config.string() + " --out " + out3.string() +
                      " --seed 99" + quiet)) == 0,
        "sweep with seed override exits 0");
  check(slurp(out3) != slurp(out1), "a different master seed changes measured cells");

  if (failures == 0) {
    std::cout << "cli_tests: all checks passed\n";
    return 0;
  }
  std::cout << "cli_tests: " << failures << " checks failed\n";
  return 1;
}

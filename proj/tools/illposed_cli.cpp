// Command-line front end: Monte Carlo benchmarks (`bench`), dictionary
// diagnostics (`diagnose`), single-problem deconvolution (`solve`) and
// dictionary export (`dict`).
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "illposed/illposed.hpp"

namespace {

using namespace illposed;

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    csv::write_file(path, text);
  }
}

struct BenchArgs {
  std::string config_path, out, format = "csv";
  std::string fn;
  int n = 0, reps = 0, threads = -1;
  double snr = 0.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_bench(const BenchArgs& args) {
  ExperimentConfig cfg;
  if (!args.config_path.empty()) {
    try {
      cfg = config_from_file(args.config_path);
    } catch (const io_error& e) {
      throw usage_error(e.what());
    } catch (const nlohmann::json::exception& e) {
      throw usage_error("config '" + args.config_path + "': " + e.what());
    }
  }
  // flags override file values
  if (!args.fn.empty()) cfg.fn = test_function_from_string(args.fn);
  if (args.n > 0) cfg.n = args.n;
  if (args.reps > 0) cfg.replications = args.reps;
  if (args.snr > 0) cfg.snr = args.snr;
  if (args.seed_set) cfg.master_seed = args.seed;
  if (args.threads >= 0) cfg.threads = args.threads;
  if (!args.out.empty()) cfg.out_table = args.out;

  const ExperimentReport report = run_experiment(cfg);
  const TableFormat fmt = (args.format == "markdown") ? TableFormat::Markdown : TableFormat::Csv;
  write_or_print(cfg.out_table, emit_table(report, fmt));
  if (!cfg.out_errors.empty()) csv::write_file(cfg.out_errors, emit_errors(report));
  if (!cfg.out_plot.empty()) {
    const auto rep0 = compute_replication_estimates(cfg, 0);
    emit_plot_data(rep0.grid, rep0.f_true, rep0.estimates, cfg.out_plot);
  }
  return 0;
}

struct DiagnoseArgs {
  std::string dict_type = "laguerre", fn = "f1", out;
  int n = 32, p = 0, s = 4, probes = 200, reps = 50;
  double snr = 3.0, T = 4.0, delta = 0.5, K0 = 0.0, C1 = 1.0, mu = 3.0, tau = 1.0;
  std::uint64_t seed = 1;
};

int run_diagnose(const DiagnoseArgs& args) {
  const Grid grid = Grid::uniform(args.T, args.n);
  const Matrix Q = build_convolution_operator([](double x) { return std::exp(-x); }, grid);
  const Vector f = evaluate_test_function(test_function_from_string(args.fn), grid);
  const Vector q = Q * f;
  const double sigma = args.snr > 0 ? sigma_from_snr(q, args.snr, args.T) : 0.0;

  DictionarySpec spec;
  spec.type = args.dict_type;
  spec.p = args.p;
  spec.seed = args.seed;
  const Dictionary dict = spec.build(grid);

  InverseProblem pb{grid, Q, f, q, sigma};
  const auto sys = precondition(pb, dict, args.tau);

  // one lasso fit at α₀ per noise replication feeds the sparsity condition
  std::vector<LassoFit> fits;
  fits.reserve(args.reps);
  LassoOptions opts;
  opts.tol = 1e-8;
  for (int r = 0; r < args.reps; ++r) {
    const Vector y = synthesize_observations(Q, f, sigma, grid, derive_seed(args.seed, r));
    const Vector b = sys.Psi.transpose() * y;
    fits.push_back(weighted_lasso(sys.G, b, sys.nu, sys.alpha0, Vector(), opts));
  }

  const double K0 = args.K0 > 0 ? args.K0 : 4.0 / ((1.0 - args.delta) * (1.0 - args.delta));
  Theorem1Options t1;
  t1.mu = args.mu;
  t1.probes = args.probes;
  t1.seed = args.seed;
  t1.C1 = args.C1;
  t1.tau = args.tau;
  const ConditionReport rep =
      check_theorem1_conditions(dict, sys.nu, sys.alpha0, args.s, args.delta, K0, fits, f, t1);
  write_or_print(args.out, to_json(rep).dump(2) + "\n");
  return 0;
}

struct SolveArgs {
  std::string input, kernel = "exp", out;
  double T = 0.0, sigma = -1.0, tau = 1.0;
  // finer than the benchmark default: a single solve is cheap and the grid
  // floor α_max/N bounds the attainable accuracy at low noise
  int n_grid = 2000;
};

double estimate_sigma_mad(const Vector& y, double T) {
  // robust σ from the finest-level detail coefficients
  const int n = static_cast<int>(y.size());
  if (!is_power_of_two(n)) return 0.0;
  const Vector c = dwt_forward(y, 1);
  std::vector<double> mag;
  for (int i = n / 2; i < n; ++i) mag.push_back(std::abs(c[i]));
  std::nth_element(mag.begin(), mag.begin() + mag.size() / 2, mag.end());
  const double sigma_eff = mag[mag.size() / 2] / 0.6745;
  return sigma_eff / std::sqrt(T / n);
}

int run_solve(const SolveArgs& args) {
  if (args.kernel != "exp") throw usage_error("solve: unknown kernel '" + args.kernel + "'");
  LoadedObservations obs;
  try {
    obs = observations_from_csv(args.input);
  } catch (const io_error& e) {
    throw usage_error(e.what());
  }
  Grid grid = obs.grid;
  if (args.T > 0 && std::abs(args.T - grid.T) > 1e-9 * grid.T)
    throw usage_error("solve: --T disagrees with the input grid endpoint");

  const Matrix Q = build_convolution_operator([](double x) { return std::exp(-x); }, grid);
  std::vector<double> scales;
  for (int k = 1; k <= 16; ++k) scales.push_back(k / 4.0);
  const Dictionary dict = build_laguerre_dictionary(grid, {0, 1, 2, 3}, scales);

  const double sigma = args.sigma >= 0 ? args.sigma : estimate_sigma_mad(obs.y, grid.T);
  InverseProblem pb{grid, Q, obs.f_true, obs.y, sigma};
  const auto sys = precondition(pb, dict, args.tau);
  LassoOptions opts;
  opts.tol = 1e-9;
  const LassoPath path = lasso_path(sys.G, sys.b, sys.nu, args.n_grid, opts);

  const double sigma_eff = sigma * std::sqrt(grid.T / grid.n);
  Vector q_hat = obs.y;
  if (is_power_of_two(grid.n)) q_hat = pilot_estimate_q(obs.y, sigma_eff).q_hat;
  const SelectionResult sel = cp_select(path, Q, dict, q_hat, sigma_eff);
  const Vector f_hat = estimate_f(path.fits[sel.k_hat], dict);

  std::ostringstream text;
  text << "x,f_hat\n";
  for (int i = 0; i < grid.n; ++i)
    text << csv::format_double(grid.points[i]) << ',' << csv::format_double(f_hat[i]) << '\n';
  write_or_print(args.out, text.str());
  return 0;
}

struct DictArgs {
  std::string type = "laguerre", out;
  int n = 32, p = 0, frame_m = 0;
  double T = 4.0, frame_k = 1.0;
  std::uint64_t seed = 7;
  std::vector<int> degrees = {0, 1, 2, 3};
  std::vector<double> scales;
};

int run_dict(const DictArgs& args) {
  const Grid grid = Grid::uniform(args.T, args.n);
  DictionarySpec spec;
  spec.type = args.type;
  spec.degrees = args.degrees;
  if (!args.scales.empty()) spec.scales = args.scales;
  spec.p = args.p;
  spec.seed = args.seed;
  spec.frame_k = args.frame_k;
  spec.frame_m = args.frame_m;
  write_or_print(args.out, dictionary_to_csv(spec.build(grid)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted-Lasso deconvolution over overcomplete dictionaries"};
  app.require_subcommand(1);

  BenchArgs bench;
  auto* cb = app.add_subcommand("bench", "run a Monte Carlo benchmark");
  cb->add_option("--config", bench.config_path, "JSON experiment config");
  cb->add_option("--fn", bench.fn, "test function: f1|f2|f3");
  cb->add_option("--n", bench.n, "grid size");
  cb->add_option("--reps", bench.reps, "replication count");
  cb->add_option("--snr", bench.snr, "signal-to-noise ratio");
  cb->add_option("--seed", bench.seed, "master seed")->each([&](const std::string&) {
    bench.seed_set = true;
  });
  cb->add_option("--threads", bench.threads, "worker threads (0: ILLPOSED_THREADS or 1)");
  cb->add_option("--out", bench.out, "table output path (default stdout)");
  cb->add_option("--format", bench.format, "csv|markdown")
      ->check(CLI::IsMember({"csv", "markdown"}));

  DiagnoseArgs diag;
  auto* cd = app.add_subcommand("diagnose", "check the theorem conditions on a dictionary");
  cd->add_option("--dict", diag.dict_type, "laguerre|rows|cols|rademacher|structured");
  cd->add_option("--fn", diag.fn, "test function");
  cd->add_option("--n", diag.n, "grid size");
  cd->add_option("--p", diag.p, "dictionary size for random families (default 2n)");
  cd->add_option("--s", diag.s, "sparsity level");
  cd->add_option("--delta", diag.delta, "restricted-eigenvalue gap in (0,1)");
  cd->add_option("--K0", diag.K0, "oracle constant (default 4/(1-delta)^2)");
  cd->add_option("--C1", diag.C1, "sample-size constant");
  cd->add_option("--mu", diag.mu, "compatibility cone opening");
  cd->add_option("--probes", diag.probes, "random probes for eigenvalue/kappa search");
  cd->add_option("--reps", diag.reps, "noise replications for the sparsity condition");
  cd->add_option("--snr", diag.snr, "signal-to-noise ratio");
  cd->add_option("--T", diag.T, "domain endpoint");
  cd->add_option("--tau", diag.tau, "confidence exponent");
  cd->add_option("--seed", diag.seed, "seed");
  cd->add_option("--out", diag.out, "JSON output path (default stdout)");

  SolveArgs solve;
  auto* cs = app.add_subcommand("solve", "deconvolve a single (x, y) CSV");
  cs->add_option("--input", solve.input, "CSV with columns x, y")->required();
  cs->add_option("--kernel", solve.kernel, "convolution kernel (exp)");
  cs->add_option("--T", solve.T, "domain endpoint (checked against the grid)");
  cs->add_option("--sigma", solve.sigma, "noise level σ (default: wavelet MAD estimate)");
  cs->add_option("--n-grid", solve.n_grid, "penalty grid size");
  cs->add_option("--tau", solve.tau, "confidence exponent");
  cs->add_option("--out", solve.out, "output CSV path (default stdout)");

  DictArgs dict;
  auto* cx = app.add_subcommand("dict", "emit a dictionary as CSV");
  cx->add_option("--type", dict.type, "laguerre|rows|cols|rademacher|structured");
  cx->add_option("--n", dict.n, "grid size");
  cx->add_option("--p", dict.p, "dictionary size for random families");
  cx->add_option("--T", dict.T, "domain endpoint");
  cx->add_option("--seed", dict.seed, "seed");
  cx->add_option("--degrees", dict.degrees, "laguerre degrees");
  cx->add_option("--scales", dict.scales, "laguerre scales");
  cx->add_option("--frame-k", dict.frame_k, "tight-frame constant");
  cx->add_option("--frame-m", dict.frame_m, "tight-frame width (default 2n)");
  cx->add_option("--out", dict.out, "output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
    if (cb->parsed()) return run_bench(bench);
    if (cd->parsed()) return run_diagnose(diag);
    if (cs->parsed()) return run_solve(solve);
    if (cx->parsed()) return run_dict(dict);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
